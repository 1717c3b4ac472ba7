#pragma once

// Experiment configuration: one JSON document fully determines a run.
// Scalar-field specs stay as raw JSON subtrees so configs round-trip exactly;
// named presets are embedded in the library and shipped as files under
// presets/ with identical content.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "elab/density_fit.hpp"
#include "elab/inversion.hpp"
#include "elab/metric.hpp"
#include "elab/rigidity.hpp"
#include "elab/wave.hpp"

namespace elab {

using ordered_json = nlohmann::ordered_json;

// Kinds: constant {value}, radial_quadratic {alpha, beta, center}, bump
// {amplitude, center, radius, power}, sum {terms}, product {terms}.
ScalarField2 build_field(const ordered_json& spec);

struct ExperimentConfig {
  std::string name;
  std::string out_dir = "out";
  uint64_t seed = 0;

  Domain2 domain;
  LameTriplet reference{1.0, 1.0, 1.0};
  ordered_json cand_lambda, cand_mu, cand_rho;
  bool inversion_symmetric = false;

  SimulationConfig sim;  // domain and material are derived, not parsed

  int distances_m = 16;
  std::string distances_mode = "s";
  int checks_m = 12;

  InversionOptions inversion;

  double density_scan_lo = 0.4, density_scan_hi = 2.5;
  int density_scan_points = 7, density_refine_iters = 8;
  int density_max_sources = 4;

  double noise_floor_override = -1.0;
  double floor_safety = 1.5;
  int floor_sources = 2;
  int geometry_m = 12;
  double min_confidence = 0.2;
  double s_over_p_guard = 0.98;
  PickOptions pick_p, pick_s;
};

ExperimentConfig parse_config(const ordered_json& j);
ordered_json serialize_config(const ExperimentConfig& c);
ExperimentConfig load_config_file(const std::string& path);

// Throws ConfigError with the violation list; called by parse_config.
void validate_config(const ExperimentConfig& c);

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);
// The embedded JSON text of a preset, identical to its presets/ file.
std::string preset_text(const std::string& name);

std::string config_hash(const ExperimentConfig& c);

LameField2 candidate_field(const ExperimentConfig& c);
ConformalMetric2 mode_metric(const ExperimentConfig& c, char mode);
SimulationConfig simulation_config(const ExperimentConfig& c);
DensityFitConfig density_config(const ExperimentConfig& c, int threads);
RigidityConfig rigidity_config(const ExperimentConfig& c, int threads);

} // namespace elab
