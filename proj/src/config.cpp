#include "elab/config.hpp"

#include <cmath>

#include "elab/errors.hpp"
#include "elab/io.hpp"

#include "preset_data.inc"

namespace elab {

ScalarField2 build_field(const ordered_json& spec) {
  if (!spec.is_object() || !spec.contains("kind"))
    throw ConfigError("field spec needs a kind");
  std::string kind = spec.at("kind").get<std::string>();
  auto center_of = [&](const ordered_json& s) {
    if (!s.contains("center")) return Vec2(0.0, 0.0);
    return Vec2(s.at("center")[0].get<double>(),
                s.at("center")[1].get<double>());
  };
  if (kind == "constant")
    return ScalarField2::constant(spec.at("value").get<double>());
  if (kind == "radial_quadratic")
    return ScalarField2::radial_quadratic(spec.at("alpha").get<double>(),
                                          spec.at("beta").get<double>(),
                                          center_of(spec));
  if (kind == "bump")
    return ScalarField2::bump(spec.at("amplitude").get<double>(),
                              center_of(spec), spec.at("radius").get<double>(),
                              spec.value("power", 4));
  if (kind == "sum" || kind == "product") {
    const auto& terms = spec.at("terms");
    if (!terms.is_array() || terms.empty())
      throw ConfigError(kind + " field spec needs non-empty terms");
    ScalarField2 f = build_field(terms[0]);
    for (size_t k = 1; k < terms.size(); ++k)
      f = kind == "sum" ? f + build_field(terms[k])
                        : f * build_field(terms[k]);
    return f;
  }
  throw ConfigError("unknown field kind: " + kind);
}

ExperimentConfig parse_config(const ordered_json& j) {
  ExperimentConfig c;
  c.name = j.value("name", std::string());
  c.out_dir = j.value("out_dir", std::string("out"));
  c.seed = j.value("seed", uint64_t{0});

  if (j.contains("domain")) {
    const auto& d = j.at("domain");
    if (d.contains("center"))
      c.domain.center =
          Vec2(d.at("center")[0].get<double>(), d.at("center")[1].get<double>());
    if (d.contains("semiaxes"))
      c.domain.semiaxes = Vec2(d.at("semiaxes")[0].get<double>(),
                               d.at("semiaxes")[1].get<double>());
  }
  if (j.contains("reference")) {
    const auto& r = j.at("reference");
    c.reference.lam = r.value("lambda", 1.0);
    c.reference.mu = r.value("mu", 1.0);
    c.reference.rho = r.value("rho", 1.0);
  }
  ordered_json unit = {{"kind", "constant"}, {"value", 1.0}};
  c.cand_lambda = unit;
  c.cand_mu = unit;
  c.cand_rho = unit;
  if (j.contains("candidate")) {
    const auto& k = j.at("candidate");
    if (k.contains("lambda")) c.cand_lambda = k.at("lambda");
    if (k.contains("mu")) c.cand_mu = k.at("mu");
    if (k.contains("rho")) c.cand_rho = k.at("rho");
  }
  c.inversion_symmetric = j.value("inversion_symmetric", false);

  if (j.contains("simulation")) {
    const auto& s = j.at("simulation");
    c.sim.grid_nodes = s.value("grid_nodes", c.sim.grid_nodes);
    c.sim.cfl = s.value("cfl", c.sim.cfl);
    c.sim.duration = s.value("duration", c.sim.duration);
    c.sim.f0 = s.value("f0", c.sim.f0);
    c.sim.source_width_cells =
        s.value("source_width_cells", c.sim.source_width_cells);
    c.sim.onset_delay_periods =
        s.value("onset_delay_periods", c.sim.onset_delay_periods);
    c.sim.n_receivers = s.value("n_receivers", c.sim.n_receivers);
    c.sim.target_samples = s.value("target_samples", c.sim.target_samples);
    c.sim.box_margin = s.value("box_margin", c.sim.box_margin);
  }
  c.sim.sources.clear();
  if (j.contains("sources"))
    for (const auto& s : j.at("sources")) {
      WaveSource w;
      w.param = s.value("param", 0.0);
      w.polarization = s.value("polarization", std::string("normal"));
      w.amplitude = s.value("amplitude", 1.0);
      c.sim.sources.push_back(w);
    }

  if (j.contains("distances")) {
    c.distances_m = j.at("distances").value("m", c.distances_m);
    c.distances_mode = j.at("distances").value("mode", c.distances_mode);
  }
  if (j.contains("checks")) c.checks_m = j.at("checks").value("m", c.checks_m);

  if (j.contains("inversion")) {
    const auto& v = j.at("inversion");
    c.inversion.grid_nodes = v.value("grid_nodes", c.inversion.grid_nodes);
    c.inversion.max_iters = v.value("max_iters", c.inversion.max_iters);
    c.inversion.rel_residual_stop =
        v.value("rel_residual_stop", c.inversion.rel_residual_stop);
    c.inversion.reg_weight = v.value("reg_weight", c.inversion.reg_weight);
    c.inversion.noise_estimate =
        v.value("noise_estimate", c.inversion.noise_estimate);
    c.inversion.estimate_offset =
        v.value("estimate_offset", c.inversion.estimate_offset);
    c.inversion.cg_iters = v.value("cg_iters", c.inversion.cg_iters);
    c.inversion.cg_tol = v.value("cg_tol", c.inversion.cg_tol);
    c.inversion.scan_iters = v.value("scan_iters", c.inversion.scan_iters);
  }
  if (j.contains("density")) {
    const auto& d = j.at("density");
    c.density_scan_lo = d.value("scan_lo", c.density_scan_lo);
    c.density_scan_hi = d.value("scan_hi", c.density_scan_hi);
    c.density_scan_points = d.value("scan_points", c.density_scan_points);
    c.density_refine_iters = d.value("refine_iters", c.density_refine_iters);
    c.density_max_sources = d.value("max_sources", c.density_max_sources);
  }
  if (j.contains("rigidity")) {
    const auto& r = j.at("rigidity");
    c.noise_floor_override =
        r.value("noise_floor_override", c.noise_floor_override);
    c.floor_safety = r.value("floor_safety", c.floor_safety);
    c.floor_sources = r.value("floor_sources", c.floor_sources);
    c.geometry_m = r.value("geometry_m", c.geometry_m);
    c.min_confidence = r.value("min_confidence", c.min_confidence);
    c.s_over_p_guard = r.value("s_over_p_guard", c.s_over_p_guard);
    if (r.contains("pick")) {
      const auto& p = r.at("pick");
      PickOptions base;
      base.rel_threshold = p.value("rel_threshold", base.rel_threshold);
      base.noise_mult = p.value("noise_mult", base.noise_mult);
      base.gate_factor = p.value("gate_factor", base.gate_factor);
      base.window_periods = p.value("window_periods", base.window_periods);
      c.pick_p = base;
      c.pick_s = base;
      c.pick_p.min_separation =
          p.value("min_separation_p", c.pick_p.min_separation);
      c.pick_s.min_separation = p.value("min_separation_s", 0.3);
    }
  }
  validate_config(c);
  return c;
}

ordered_json serialize_config(const ExperimentConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  j["out_dir"] = c.out_dir;
  j["seed"] = c.seed;
  j["domain"] = {{"center", {c.domain.center[0], c.domain.center[1]}},
                 {"semiaxes", {c.domain.semiaxes[0], c.domain.semiaxes[1]}}};
  j["reference"] = {{"lambda", c.reference.lam},
                    {"mu", c.reference.mu},
                    {"rho", c.reference.rho}};
  j["candidate"] = {{"lambda", c.cand_lambda},
                    {"mu", c.cand_mu},
                    {"rho", c.cand_rho}};
  j["inversion_symmetric"] = c.inversion_symmetric;
  j["simulation"] = {{"grid_nodes", c.sim.grid_nodes},
                     {"cfl", c.sim.cfl},
                     {"duration", c.sim.duration},
                     {"f0", c.sim.f0},
                     {"source_width_cells", c.sim.source_width_cells},
                     {"onset_delay_periods", c.sim.onset_delay_periods},
                     {"n_receivers", c.sim.n_receivers},
                     {"target_samples", c.sim.target_samples},
                     {"box_margin", c.sim.box_margin}};
  ordered_json srcs = ordered_json::array();
  for (const WaveSource& s : c.sim.sources)
    srcs.push_back({{"param", s.param},
                    {"polarization", s.polarization},
                    {"amplitude", s.amplitude}});
  j["sources"] = srcs;
  j["distances"] = {{"m", c.distances_m}, {"mode", c.distances_mode}};
  j["checks"] = {{"m", c.checks_m}};
  j["inversion"] = {{"grid_nodes", c.inversion.grid_nodes},
                    {"max_iters", c.inversion.max_iters},
                    {"rel_residual_stop", c.inversion.rel_residual_stop},
                    {"reg_weight", c.inversion.reg_weight},
                    {"noise_estimate", c.inversion.noise_estimate},
                    {"estimate_offset", c.inversion.estimate_offset},
                    {"cg_iters", c.inversion.cg_iters},
                    {"cg_tol", c.inversion.cg_tol},
                    {"scan_iters", c.inversion.scan_iters}};
  j["density"] = {{"scan_lo", c.density_scan_lo},
                  {"scan_hi", c.density_scan_hi},
                  {"scan_points", c.density_scan_points},
                  {"refine_iters", c.density_refine_iters},
                  {"max_sources", c.density_max_sources}};
  j["rigidity"] = {
      {"noise_floor_override", c.noise_floor_override},
      {"floor_safety", c.floor_safety},
      {"floor_sources", c.floor_sources},
      {"geometry_m", c.geometry_m},
      {"min_confidence", c.min_confidence},
      {"s_over_p_guard", c.s_over_p_guard},
      {"pick",
       {{"rel_threshold", c.pick_p.rel_threshold},
        {"noise_mult", c.pick_p.noise_mult},
        {"gate_factor", c.pick_p.gate_factor},
        {"window_periods", c.pick_p.window_periods},
        {"min_separation_p", c.pick_p.min_separation},
        {"min_separation_s", c.pick_s.min_separation}}}};
  return j;
}

ExperimentConfig load_config_file(const std::string& path) {
  ordered_json j;
  try {
    j = read_json(path);
  } catch (const ordered_json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

void validate_config(const ExperimentConfig& c) {
  std::string bad;
  auto flag = [&bad](const std::string& msg) {
    bad += (bad.empty() ? "" : "; ") + msg;
  };
  if (!(c.domain.semiaxes.minCoeff() > 0.0))
    flag("domain semiaxes must be positive");
  if (!(c.reference.mu > 0.0))
    flag("reference mu must be positive (mu=" + format_g17(c.reference.mu) +
         ")");
  if (!(c.reference.rho > 0.0))
    flag("reference rho must be positive (rho=" +
         format_g17(c.reference.rho) + ")");
  if (!(2.0 * c.reference.lam + 2.0 * c.reference.mu > 0.0))
    flag("reference 2 lam + 2 mu must be positive (lam=" +
         format_g17(c.reference.lam) + ", mu=" + format_g17(c.reference.mu) +
         ")");
  if (bad.empty()) {
    LameField2 cand{c.domain, build_field(c.cand_lambda),
                    build_field(c.cand_mu), build_field(c.cand_rho)};
    AdmissibilityReport ar = check_admissibility(cand);
    if (!ar.ok)
      flag("candidate field violates positivity (min mu=" +
           format_g17(ar.min_mu) + ", min rho=" + format_g17(ar.min_rho) +
           ", min 2 lam + 2 mu=" + format_g17(ar.min_bulk) + ")");
  }
  if (c.sim.grid_nodes < 40) flag("simulation grid_nodes must be >= 40");
  if (!(c.sim.cfl > 0.0 && c.sim.cfl <= 0.6))
    flag("simulation cfl must be in (0, 0.6]");
  if (!(c.sim.duration > 0.0)) flag("simulation duration must be positive");
  if (c.sim.f0 < 0.0) flag("simulation f0 must be >= 0");
  if (!(c.sim.source_width_cells > 0.0))
    flag("simulation source_width_cells must be positive");
  if (!(c.sim.onset_delay_periods > 0.0))
    flag("simulation onset_delay_periods must be positive");
  if (c.sim.n_receivers < 4) flag("simulation n_receivers must be >= 4");
  if (c.sim.target_samples < 2) flag("simulation target_samples must be >= 2");
  if (c.sim.box_margin < 0.0) flag("simulation box_margin must be >= 0");
  for (const WaveSource& s : c.sim.sources)
    if (s.polarization != "normal" && s.polarization != "tangential") {
      flag("source polarization must be normal or tangential");
      break;
    }
  if (c.distances_m < 2) flag("distances m must be >= 2");
  if (c.distances_mode != "p" && c.distances_mode != "s")
    flag("distances mode must be p or s");
  if (c.checks_m < 2) flag("checks m must be >= 2");
  if (c.inversion.grid_nodes < 10) flag("inversion grid_nodes must be >= 10");
  if (!(c.density_scan_lo > 0.0 && c.density_scan_hi > c.density_scan_lo))
    flag("density scan range must satisfy 0 < lo < hi");
  if (c.density_scan_points < 3) flag("density scan_points must be >= 3");
  if (!bad.empty()) throw ConfigError(bad);
}

std::vector<std::string> preset_names() {
  return {"homogeneous-disk", "hyperbolic-disk", "spherical-cap",
          "mu-bump-10pct"};
}

std::string preset_text(const std::string& name) {
  if (name == "homogeneous-disk") return kPresetHomogeneousDisk;
  if (name == "hyperbolic-disk") return kPresetHyperbolicDisk;
  if (name == "spherical-cap") return kPresetSphericalCap;
  if (name == "mu-bump-10pct") return kPresetMuBump10pct;
  throw ConfigError("unknown preset: " + name);
}

ExperimentConfig preset(const std::string& name) {
  return parse_config(ordered_json::parse(preset_text(name)));
}

std::string config_hash(const ExperimentConfig& c) {
  std::string text = serialize_config(c).dump(2);
  return hex64(fnv1a(text.data(), text.size()));
}

LameField2 candidate_field(const ExperimentConfig& c) {
  return {c.domain, build_field(c.cand_lambda), build_field(c.cand_mu),
          build_field(c.cand_rho)};
}

ConformalMetric2 mode_metric(const ExperimentConfig& c, char mode) {
  if (mode != 'p' && mode != 's') throw ConfigError("mode must be p or s");
  LameField2 f = candidate_field(c);
  ScalarField2 speed =
      mode == 'p' ? f.pressure_speed_field() : f.shear_speed_field();
  ConformalMetric2 m = ConformalMetric2::make(speed, c.domain);
  m.inversion_symmetric = c.inversion_symmetric;
  return m;
}

SimulationConfig simulation_config(const ExperimentConfig& c) {
  SimulationConfig s = c.sim;
  s.domain = c.domain;
  s.material = candidate_field(c);
  return s;
}

DensityFitConfig density_config(const ExperimentConfig& c, int threads) {
  DensityFitConfig d;
  d.scan_lo = c.density_scan_lo;
  d.scan_hi = c.density_scan_hi;
  d.scan_points = c.density_scan_points;
  d.refine_iters = c.density_refine_iters;
  d.max_sources = c.density_max_sources;
  d.threads = threads;
  d.sim = c.sim;
  return d;
}

RigidityConfig rigidity_config(const ExperimentConfig& c, int threads) {
  RigidityConfig r;
  r.sim = c.sim;
  r.threads = threads;
  r.noise_floor_override = c.noise_floor_override;
  r.floor_safety = c.floor_safety;
  r.floor_sources = c.floor_sources;
  r.geometry_m = c.geometry_m;
  r.pick_p = c.pick_p;
  r.pick_s = c.pick_s;
  r.min_confidence = c.min_confidence;
  r.s_over_p_guard = c.s_over_p_guard;
  r.inversion = c.inversion;
  r.density = density_config(c, threads);
  return r;
}

} // namespace elab
