#pragma once

// Constant-density fit on top of known wave-speed fields.  A trial density
// together with the speeds fixes a full material triplet; its simulated
// boundary response is compared against the observed dataset.  A coarse
// log-spaced scan brackets the minimum and golden-section refines it.  A scan
// without a clean interior minimum is reported as ambiguous, not guessed at.

#include <string>
#include <utility>
#include <vector>

#include "elab/scalar_field.hpp"
#include "elab/wave.hpp"

namespace elab {

// lam = rho (cp^2 - 2 cs^2), mu = rho cs^2.
LameField2 triplet_from_speeds(const Domain2& dom, const ScalarField2& cp,
                               const ScalarField2& cs, double rho);

struct DensityFitConfig {
  double scan_lo = 0.4;
  double scan_hi = 2.5;
  int scan_points = 7;
  int refine_iters = 8;
  int max_sources = 4;  // candidate runs use at most this many sources
  int threads = 1;
  // Numerics for the candidate simulations (grid, CFL, source profile).
  // Layout fields are overwritten from the observed dataset: domain, source
  // subset, receiver count, sample clock, wavelet frequency and onset.
  SimulationConfig sim;
};

struct DensityFitResult {
  double rho = 0.0;
  double residual = 0.0;
  bool ambiguous = false;
  std::string note;
  int sources_used = 0;
  std::vector<std::pair<double, double>> scan;    // (rho, residual), in order
  std::vector<std::pair<double, double>> refine;  // golden-section evals
};

DensityFitResult fit_density(const DNDataset& observed, const ScalarField2& cp,
                             const ScalarField2& cs,
                             const DensityFitConfig& cfg = {});

} // namespace elab
