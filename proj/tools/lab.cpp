// Command-line laboratory: wave speeds, boundary distance tables, boundary
// response simulation and comparison, travel-time inversion, the rigidity
// experiment, and geometry hypothesis checks.  Every subcommand writes its
// artifacts under the output directory and records them, with checksums, in
// a run manifest.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "elab/config.hpp"
#include "elab/density_fit.hpp"
#include "elab/geometry_checks.hpp"
#include "elab/io.hpp"
#include "elab/rigidity.hpp"

namespace fs = std::filesystem;
using namespace elab;

namespace {

struct Ctx {
  ExperimentConfig cfg;
  std::string out;
  int threads = 1;
  RunManifest manifest;
  std::chrono::steady_clock::time_point t_start;

  void start() { t_start = std::chrono::steady_clock::now(); }
  void lap(const std::string& name) {
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             t_start)
                   .count();
    manifest.timings.emplace_back(name, s);
    t_start = std::chrono::steady_clock::now();
  }
  void add(const std::string& relpath) {
    manifest_add(manifest, out, relpath);
  }
  void finish() {
    write_manifest(out + "/manifest.json", manifest);
    std::printf("manifest: %s/manifest.json (%zu artifacts)\n", out.c_str(),
                manifest.artifacts.size());
  }
};

Ctx make_ctx(const std::string& config_path, const std::string& preset_name,
             const std::string& out_override, int threads) {
  if (config_path.empty() == preset_name.empty())
    throw ConfigError("give exactly one of --config or --preset");
  Ctx ctx;
  ctx.cfg = config_path.empty() ? preset(preset_name)
                                : load_config_file(config_path);
  ctx.out = out_override.empty() ? ctx.cfg.out_dir : out_override;
  ctx.threads = threads;
  fs::create_directories(ctx.out);
  ctx.manifest.config_hash = config_hash(ctx.cfg);
  ctx.manifest.version = "elastlab 1.0.0";
  // The resolved config is itself an artifact.
  write_json(ctx.out + "/config.json", serialize_config(ctx.cfg));
  ctx.add("config.json");
  ctx.start();
  return ctx;
}

void cmd_speeds(Ctx& ctx) {
  std::printf("c_p=%.7f, c_s=%.7f\n", pressure_speed(ctx.cfg.reference),
              shear_speed(ctx.cfg.reference));
  LameField2 f = candidate_field(ctx.cfg);
  ScalarField2 cp = f.pressure_speed_field(), cs = f.shear_speed_field();
  int n = ctx.cfg.sim.grid_nodes;
  Vec2 lo, hi;
  ctx.cfg.domain.bounding_box(lo, hi, 0.0);
  std::string out = "# x y c_p c_s\n";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec2 x(lo[0] + (hi[0] - lo[0]) * i / (n - 1.0),
             lo[1] + (hi[1] - lo[1]) * j / (n - 1.0));
      out += format_g17(x[0]) + " " + format_g17(x[1]) + " " +
             format_g17(cp.value(x)) + " " + format_g17(cs.value(x)) + "\n";
    }
  write_text(ctx.out + "/speeds.csv", out);
  ctx.lap("speeds");
  ctx.add("speeds.csv");
}

void cmd_distances(Ctx& ctx, const std::string& mode_flag, int m_flag) {
  std::string mode = mode_flag.empty() ? ctx.cfg.distances_mode : mode_flag;
  int m = m_flag > 0 ? m_flag : ctx.cfg.distances_m;
  if (mode != "p" && mode != "s") throw ConfigError("mode must be p or s");
  ConformalMetric2 metric = mode_metric(ctx.cfg, mode[0]);
  TravelTimeTable t = distance_table(metric, m, mode);
  std::printf("distance table %s, m=%d: max=%s asymmetry=%s trapped=%d\n",
              mode.c_str(), m, format_g17(t.d.maxCoeff()).c_str(),
              format_g17(t.max_asymmetry).c_str(), t.trapped_rays);
  std::string base = "distances_" + mode;
  write_table(ctx.out + "/" + base + ".csv", ctx.out + "/" + base + ".json",
              t);
  ctx.lap("distances");
  ctx.add(base + ".csv");
  ctx.add(base + ".json");
}

void cmd_simulate(Ctx& ctx) {
  SimulationConfig sim = simulation_config(ctx.cfg);
  DNDataset d = assemble_dn_data(sim, ctx.threads);
  std::printf("dataset: %zu sources, %ld receivers, %zu samples, h=%s\n",
              d.sources.size(), d.n_receivers(), d.times.size(),
              format_g17(d.grid_h).c_str());
  write_dn(ctx.out + "/dn.bin", ctx.out + "/dn.json", d,
           ctx.manifest.config_hash);
  ctx.lap("simulate");
  ctx.add("dn.bin");
  ctx.add("dn.json");

  // Plot-ready dumps for the first source: a receiver fan of normal-component
  // traces and the energy budget.
  if (!d.traces.empty()) {
    long nt = static_cast<long>(d.times.size());
    long nr = d.n_receivers();
    MatX fan(nt, 1 + nr);
    for (long k = 0; k < nt; ++k) fan(k, 0) = d.times[k];
    std::vector<std::string> names{"time"};
    for (long r = 0; r < nr; ++r) {
      Vec2 xr = d.domain.boundary_point(Vec<1>(d.receiver_params[r]));
      Vec2 nu = d.domain.outward_normal(xr);
      for (long k = 0; k < nt; ++k)
        fan(k, 1 + r) = nu[0] * d.traces[0](2 * r, k) +
                        nu[1] * d.traces[0](2 * r + 1, k);
      names.push_back("rec" + std::to_string(r));
    }
    write_columns(ctx.out + "/traces_src0.dat", names, fan);
    write_columns(ctx.out + "/energy_src0.dat",
                  {"time", "kinetic", "strain"}, d.energy[0]);
    ctx.lap("dumps");
    ctx.add("traces_src0.dat");
    ctx.add("energy_src0.dat");
  }
}

void cmd_dn_compare(Ctx& ctx, const std::string& a_base,
                    const std::string& b_base) {
  if (a_base.empty() || b_base.empty())
    throw ConfigError("dn-compare needs --a and --b dataset base paths");
  DNDataset a = read_dn(a_base + ".bin", a_base + ".json");
  DNDataset b = read_dn(b_base + ".bin", b_base + ".json");
  DNComparison cmp = compare_dn_breakdown(a, b);
  std::printf("discrepancy=%s\n", format_g17(cmp.discrepancy).c_str());
  ordered_json j;
  j["a"] = a_base;
  j["b"] = b_base;
  j["discrepancy"] = cmp.discrepancy;
  ordered_json per = ordered_json::array();
  for (long s = 0; s < cmp.per_source.size(); ++s)
    per.push_back(cmp.per_source[s]);
  j["per_source"] = per;
  write_json(ctx.out + "/dn_compare.json", j);
  ctx.lap("dn-compare");
  ctx.add("dn_compare.json");
}

void cmd_invert(Ctx& ctx, const std::string& table_csv,
                const std::string& table_sidecar) {
  TravelTimeTable t;
  std::string mode = ctx.cfg.distances_mode;
  if (!table_csv.empty()) {
    t = read_table(table_csv, table_sidecar.empty()
                                  ? table_csv.substr(0, table_csv.size() - 4) +
                                        ".json"
                                  : table_sidecar);
    if (!t.mode.empty()) mode = t.mode;
  } else {
    ConformalMetric2 metric = mode_metric(ctx.cfg, mode[0]);
    t = distance_table(metric, ctx.cfg.distances_m, mode);
    std::string base = "distances_" + mode;
    write_table(ctx.out + "/" + base + ".csv", ctx.out + "/" + base + ".json",
                t);
    ctx.add(base + ".csv");
    ctx.add(base + ".json");
  }
  ctx.lap("table");

  double mean_d = 0.0;
  long cnt = 0;
  for (long i = 0; i < t.d.rows(); ++i)
    for (long j = 0; j < t.d.cols(); ++j)
      if (i != j) {
        mean_d += t.d(i, j);
        ++cnt;
      }
  Vec2 z0 = ctx.cfg.domain.boundary_point(Vec<1>(t.params.empty() ? 0.0
                                                                  : t.params[0]));
  Vec2 z1 = ctx.cfg.domain.boundary_point(
      Vec<1>(t.params.size() > 1 ? t.params[t.params.size() / 2] : M_PI));
  double diam = (z1 - z0).norm();
  double c0 = cnt > 0 ? diam / (mean_d / cnt) : 1.0;
  InversionResult r = invert_conformal(t, ctx.cfg.domain,
                                       ScalarField2::constant(c0),
                                       ctx.cfg.inversion);
  std::printf("inversion: converged=%d iters=%d misfit %s -> %s reg=%s\n",
              r.converged, r.iterations, format_g17(r.initial_misfit).c_str(),
              format_g17(r.final_misfit).c_str(),
              format_g17(r.reg_weight_used).c_str());
  write_inversion_log(ctx.out + "/inversion_log.jsonl", r);
  ctx.add("inversion_log.jsonl");

  ScalarField2 c_hat = recovered_speed_field(r);
  int n = 161;
  MatX dump(n * n, 3);
  Vec2 lo, hi;
  ctx.cfg.domain.bounding_box(lo, hi, 0.0);
  long row = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j, ++row) {
      Vec2 x(lo[0] + (hi[0] - lo[0]) * i / (n - 1.0),
             lo[1] + (hi[1] - lo[1]) * j / (n - 1.0));
      dump(row, 0) = x[0];
      dump(row, 1) = x[1];
      dump(row, 2) = c_hat.value(x);
    }
  write_columns(ctx.out + "/recovered_speed.dat", {"x", "y", "c"}, dump);
  ctx.lap("invert");
  ctx.add("recovered_speed.dat");
}

void cmd_rigidity(Ctx& ctx) {
  RigidityConfig rc = rigidity_config(ctx.cfg, ctx.threads);
  RigidityReport rep =
      rigidity_experiment(ctx.cfg.reference, candidate_field(ctx.cfg), rc);
  ordered_json j = rigidity_report_json(rep);

  if (rep.reconstructed) {
    write_inversion_log(ctx.out + "/inversion_p.jsonl", rep.inv_p);
    write_inversion_log(ctx.out + "/inversion_s.jsonl", rep.inv_s);
    ctx.add("inversion_p.jsonl");
    ctx.add("inversion_s.jsonl");
    MatX scan(rep.density.scan.size() + rep.density.refine.size(), 2);
    long row = 0;
    for (auto [rho, res] : rep.density.scan) {
      scan(row, 0) = rho;
      scan(row, 1) = res;
      ++row;
    }
    for (auto [rho, res] : rep.density.refine) {
      scan(row, 0) = rho;
      scan(row, 1) = res;
      ++row;
    }
    write_columns(ctx.out + "/density_scan.dat", {"rho", "residual"}, scan);
    ctx.add("density_scan.dat");
    j["artifacts"] = {"inversion_p.jsonl", "inversion_s.jsonl",
                      "density_scan.dat"};
  }
  write_json(ctx.out + "/rigidity_report.json", j);
  ctx.lap("rigidity");
  ctx.add("rigidity_report.json");

  std::string status = rep.verdict;
  if (rep.reconstructed) status += "; reconstructed within tolerance";
  std::printf("status: %s\n", status.c_str());
  if (rep.reconstructed)
    std::printf("recovered: lambda=%s mu=%s rho=%s\n",
                format_g17(rep.lam_hat).c_str(),
                format_g17(rep.mu_hat).c_str(),
                format_g17(rep.rho_hat).c_str());
}

void cmd_checks(Ctx& ctx) {
  ordered_json j;
  for (char mode : {'p', 's'}) {
    ConformalMetric2 metric = mode_metric(ctx.cfg, mode);
    ConvexityVerdict cv = is_strictly_convex_boundary(metric);
    SimplicityVerdict sv = simplicity_check(metric, ctx.cfg.checks_m);
    FoliationCandidate f;
    f.f = 0.5 * ScalarField2::radial_quadratic(0.0, 1.0, ctx.cfg.domain.center);
    f.description = "half squared distance to the domain center";
    FoliationReport fr = convexity_check_function(metric, f);
    ordered_json m;
    m["convex_boundary"] = cv.convex;
    m["min_sff_eigenvalue"] = cv.min_eigenvalue;
    m["simple"] = sv.simple;
    m["conjugate_free"] = sv.conjugate_free;
    m["multiplicity_free"] = sv.multiplicity_free;
    m["geodesics_checked"] = sv.geodesics_checked;
    m["label"] = sv.label;
    m["convex_function"] = fr.convex_along_geodesics;
    m["convex_function_min_second_derivative"] = fr.min_second_derivative;
    m["convex_function_candidate"] = f.description;
    j[std::string(1, mode)] = m;
    std::printf("%c: convex=%d simple=%d convex_function=%d\n", mode,
                cv.convex, sv.simple, fr.convex_along_geodesics);
  }
  write_json(ctx.out + "/hypothesis_checks.json", j);
  ctx.lap("checks");
  ctx.add("hypothesis_checks.json");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"elastic rigidity laboratory"};
  app.require_subcommand(1);

  std::string config_path, preset_name, out_dir;
  int threads = 1;
  app.add_option("--config", config_path, "experiment config JSON");
  app.add_option("--preset", preset_name, "built-in preset name");
  app.add_option("--out", out_dir, "output directory (default from config)");
  app.add_option("--threads", threads, "global thread cap")
      ->check(CLI::PositiveNumber);

  auto* speeds = app.add_subcommand("speeds", "wave-speed summary and dump");
  auto* distances =
      app.add_subcommand("distances", "boundary distance table");
  std::string mode_flag;
  int m_flag = 0;
  distances->add_option("--mode", mode_flag, "p or s");
  distances->add_option("--m", m_flag, "boundary samples");
  auto* simulate = app.add_subcommand("simulate", "boundary response dataset");
  auto* dncmp = app.add_subcommand("dn-compare", "compare two datasets");
  std::string a_base, b_base;
  dncmp->add_option("--a", a_base, "first dataset base path (no extension)");
  dncmp->add_option("--b", b_base, "second dataset base path (no extension)");
  auto* invert = app.add_subcommand("invert", "travel-time inversion");
  std::string table_csv, table_sidecar;
  invert->add_option("--table", table_csv, "existing distance table CSV");
  invert->add_option("--sidecar", table_sidecar, "its JSON sidecar");
  auto* rigidity = app.add_subcommand("rigidity", "end-to-end experiment");
  auto* checks = app.add_subcommand("checks", "geometry hypothesis checks");

  CLI11_PARSE(app, argc, argv);

  try {
    Ctx ctx = make_ctx(config_path, preset_name, out_dir, threads);
    if (speeds->parsed()) cmd_speeds(ctx);
    if (distances->parsed()) cmd_distances(ctx, mode_flag, m_flag);
    if (simulate->parsed()) cmd_simulate(ctx);
    if (dncmp->parsed()) cmd_dn_compare(ctx, a_base, b_base);
    if (invert->parsed()) cmd_invert(ctx, table_csv, table_sidecar);
    if (rigidity->parsed()) cmd_rigidity(ctx);
    if (checks->parsed()) cmd_checks(ctx);
    ctx.finish();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const PhysicsError& e) {
    std::fprintf(stderr, "physics error: %s\n", e.what());
    return 3;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return 4;
  }
  return 0;
}
