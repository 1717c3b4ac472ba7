#pragma once

// End-to-end distinguishability experiment: a homogeneous reference body
// against a candidate body on the same domain.  Both boundary response
// datasets are simulated; if they agree to within the discretization noise
// floor the candidate's parameters are reconstructed from its own boundary
// data (arrival picking, two conformal inversions, a density fit) and
// compared against the candidate truth.  If they disagree, the bodies are
// distinguishable and no reconstruction is attempted.

#include <string>
#include <vector>

#include "elab/density_fit.hpp"
#include "elab/inversion.hpp"
#include "elab/picking.hpp"
#include "elab/wave.hpp"

namespace elab {

struct RigidityConfig {
  // Shared layout and numerics for both bodies; domain and material are
  // overwritten (domain from the candidate, material per body).
  SimulationConfig sim;
  int threads = 1;

  // Discretization noise floor: compare identical physics at h and h/sqrt(2)
  // and scale up.  An override >= 0 skips the refinement pair.
  double noise_floor_override = -1.0;
  double floor_safety = 1.5;
  int floor_sources = 2;

  // Hypothesis checks.
  int geometry_m = 12;            // boundary samples for the simplicity scan
  int admissibility_samples = 64;

  // Reconstruction branch.
  PickOptions pick_p;
  PickOptions pick_s;
  double min_confidence = 0.2;
  double s_over_p_guard = 0.98;   // drop s-picks below guard*sqrt(2)*t_p
  InversionOptions inversion;
  DensityFitConfig density;
};

struct HypothesisCheck {
  std::string name;
  // "pass" | "fail" | "heuristic-pass" | "heuristic-fail" | "skipped".
  std::string tag = "skipped";
  bool ok = false;
  double metric = 0.0;
  std::string detail;
};

struct RigidityReport {
  std::string verdict;  // "indistinguishable", "distinguishable", "refused"
  bool hypotheses_ok = false;
  std::vector<HypothesisCheck> hypotheses;

  double time_window = 0.0;
  double window_required = 0.0;

  double discrepancy = -1.0;
  double noise_floor = -1.0;

  bool reconstructed = false;
  int picks_p_used = 0, picks_s_used = 0;
  double cp_rel_l2 = -1.0, cs_rel_l2 = -1.0;  // vs candidate, 90% subdisk
  double lam_hat = 0.0, mu_hat = 0.0, rho_hat = 0.0;
  double lam_err = -1.0, mu_err = -1.0, rho_err = -1.0;

  InversionResult inv_p, inv_s;
  DensityFitResult density;
};

RigidityReport rigidity_experiment(const LameTriplet& reference,
                                   const LameField2& candidate,
                                   const RigidityConfig& cfg = {});

} // namespace elab
