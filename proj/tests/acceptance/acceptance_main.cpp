// Acceptance gate: nine numbered criteria, each printing one PASS/FAIL line.
// Run all, or a single one with --criterion N.  The exit code is the number
// of failed criteria among those executed.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "elab/config.hpp"
#include "elab/geometry_checks.hpp"
#include "elab/io.hpp"
#include "elab/picking.hpp"
#include "elab/rigidity.hpp"

using namespace elab;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  std::string summary;
  double budget_s;  // wall-clock allowance; exceeding it fails the criterion
  std::function<bool()> run;
};

bool g_verbose = true;

void detail(const char* fmt, ...) {
  if (!g_verbose) return;
  va_list ap;
  va_start(ap, fmt);
  std::printf("       ");
  std::vprintf(fmt, ap);
  std::printf("\n");
  va_end(ap);
  std::fflush(stdout);
}

struct Gate {
  bool ok = true;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      std::printf("       FAILED: %s\n", what.c_str());
    }
  }
};

const Domain2 kDisk = Domain2::ball(Vec2::Zero(), 1.0);

ConformalMetric2 lens_metric() {
  return ConformalMetric2::make(ScalarField2::radial_quadratic(1.0, 0.3),
                                kDisk);
}

ConformalMetric2 hyperbolic_metric() {
  return ConformalMetric2::make(ScalarField2::radial_quadratic(0.5, -0.5),
                                Domain2::ball(Vec2::Zero(), 0.5));
}

ConformalMetric2 spherical_metric() {
  ConformalMetric2 m = ConformalMetric2::make(
      ScalarField2::radial_quadratic(0.5, 0.5), Domain2::ball(Vec2::Zero(), 2.0));
  m.inversion_symmetric = true;
  return m;
}

double hyperbolic_distance(const Vec2& z, const Vec2& w) {
  double q = 1.0 + 2.0 * (z - w).squaredNorm() /
                       ((1.0 - z.squaredNorm()) * (1.0 - w.squaredNorm()));
  return std::acosh(q);
}

// ---------------------------------------------------------------- C1

bool c1_christoffel() {
  Gate g;
  std::mt19937_64 rng(0x101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> up(0.1, 3.0);
  double worst = 0.0;
  long draws = 0;
  auto check2 = [&]() {
    LameTriplet t{4.0 * u(rng), up(rng), up(rng)};
    if (!is_admissible<2>(t)) return;
    Vec2 xi(u(rng), u(rng));
    if (xi.norm() < 1e-2) return;
    ++draws;
    double n2 = xi.squaredNorm();
    double lp = (t.lam + 2.0 * t.mu) / t.rho * n2;
    double ls = t.mu / t.rho * n2;
    Eigen::SelfAdjointEigenSolver<Mat2> es(christoffel_matrix(t, xi));
    worst = std::max(worst, std::abs(es.eigenvalues()[0] - ls) / ls);
    worst = std::max(worst, std::abs(es.eigenvalues()[1] - lp) / lp);
    Vec2 r = christoffel_matrix(t, xi) * xi - lp * xi;
    worst = std::max(worst, r.norm() / (lp * xi.norm()));
  };
  auto check3 = [&]() {
    LameTriplet t{4.0 * u(rng), up(rng), up(rng)};
    if (!is_admissible<3>(t)) return;
    Vec3 xi(u(rng), u(rng), u(rng));
    if (xi.norm() < 1e-2) return;
    ++draws;
    double n2 = xi.squaredNorm();
    double lp = (t.lam + 2.0 * t.mu) / t.rho * n2;
    double ls = t.mu / t.rho * n2;
    Eigen::SelfAdjointEigenSolver<Mat3> es(christoffel_matrix(t, xi));
    worst = std::max(worst, std::abs(es.eigenvalues()[0] - ls) / ls);
    worst = std::max(worst, std::abs(es.eigenvalues()[1] - ls) / ls);
    worst = std::max(worst, std::abs(es.eigenvalues()[2] - lp) / lp);
    Vec3 r = christoffel_matrix(t, xi) * xi - lp * xi;
    worst = std::max(worst, r.norm() / (lp * xi.norm()));
  };
  while (draws < 5000) check2();
  while (draws < 10000) check3();
  detail("10000 draws, worst relative eigen deviation %.3e", worst);
  g.require(worst <= 1e-10, "eigenstructure deviation above 1e-10");
  return g.ok;
}

// ---------------------------------------------------------------- C2

bool c2_sff_invariance() {
  Gate g;
  ScalarField2 base_c = ScalarField2::radial_quadratic(1.0, 0.3);
  ConformalMetric2 base = ConformalMetric2::make(base_c, kDisk);
  const int n_pts = 32;
  std::vector<double> s0(n_pts);
  for (int k = 0; k < n_pts; ++k) {
    double th = 2.0 * M_PI * k / n_pts;
    s0[k] = second_fundamental_form(base, Vec2(std::cos(th), std::sin(th)))
                .min_eigenvalue();
  }
  std::mt19937_64 rng(0x202);
  std::uniform_real_distribution<double> ua(-0.5, 0.5);
  double worst = 0.0;
  for (int p = 0; p < 20; ++p) {
    double amp = ua(rng);
    // (1 + amp (1-|x|^2)^2) has value 1 and vanishing gradient on |x| = 1.
    ScalarField2 factor = ScalarField2::constant(1.0) +
                          ScalarField2::bump(amp, Vec2::Zero(), 1.0, 2);
    ConformalMetric2 pert = ConformalMetric2::make(base_c * factor, kDisk);
    for (int k = 0; k < n_pts; ++k) {
      double th = 2.0 * M_PI * k / n_pts;
      double s = second_fundamental_form(pert, Vec2(std::cos(th), std::sin(th)))
                     .min_eigenvalue();
      worst = std::max(worst, std::abs(s - s0[k]));
    }
  }
  detail("20 perturbations, worst boundary-operator deviation %.3e", worst);
  g.require(worst <= 1e-6, "second fundamental form moved above 1e-6");
  return g.ok;
}

// ---------------------------------------------------------------- C3

bool c3_model_distances() {
  Gate g;
  // Euclidean chords.
  ConformalMetric2 euclid = ConformalMetric2::make(ScalarField2::constant(1.0),
                                                   kDisk);
  std::mt19937_64 rng(0x303);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  double worst_e = 0.0;
  int done = 0;
  while (done < 20) {
    double a = u(rng), b = u(rng);
    double chord = 2.0 * std::abs(std::sin(0.5 * (a - b)));
    if (chord < 0.3) continue;
    double d = boundary_distance(euclid, a, b).distance;
    worst_e = std::max(worst_e, std::abs(d - chord) / chord);
    ++done;
  }
  detail("euclidean: 20 chords, worst relative error %.3e", worst_e);
  g.require(worst_e <= 1e-8, "euclidean chord error above 1e-8");

  ConformalMetric2 hyp = hyperbolic_metric();
  double worst_h = 0.0;
  done = 0;
  while (done < 100) {
    double a = u(rng), b = u(rng);
    Vec2 z = 0.5 * Vec2(std::cos(a), std::sin(a));
    Vec2 w = 0.5 * Vec2(std::cos(b), std::sin(b));
    if ((z - w).norm() < 0.15) continue;
    double exact = hyperbolic_distance(z, w);
    double d = boundary_distance(hyp, a, b).distance;
    worst_h = std::max(worst_h, std::abs(d - exact) / exact);
    ++done;
  }
  detail("hyperbolic: 100 pairs, worst relative error %.3e", worst_h);
  g.require(worst_h <= 1e-4, "hyperbolic distance error above 1e-4");

  ConformalMetric2 sph = spherical_metric();
  std::uniform_real_distribution<double> ux(-0.6, 0.6);
  double worst_c = 0.0;
  for (int k = 0; k < 5; ++k) {
    Vec2 x0(ux(rng), ux(rng));
    double a = u(rng);
    auto tc = conjugate_point_scan(sph, x0, Vec2(std::cos(a), std::sin(a)), 3.5);
    if (!tc) {
      g.require(false, "no conjugate point found on the round sphere");
      continue;
    }
    worst_c = std::max(worst_c, std::abs(*tc - M_PI));
  }
  detail("spherical: 5 scans, worst |t_conj - pi| %.3e", worst_c);
  g.require(worst_c <= 1e-4, "conjugate time misses pi by more than 1e-4");
  return g.ok;
}

// ---------------------------------------------------------------- C4

bool c4_shooting_vs_marching() {
  Gate g;
  struct Case {
    const char* name;
    ConformalMetric2 metric;
  };
  std::vector<Case> cases;
  cases.push_back({"lens", lens_metric()});
  cases.push_back({"hyperbolic", hyperbolic_metric()});
  std::mt19937_64 rng(0x404);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  for (auto& c : cases) {
    EikonalGrid geom = make_eikonal_grid(c.metric.domain, 400);
    VecX s = sample_slowness(geom, c.metric.speed);
    double worst = 0.0;
    int pairs = 0;
    for (int is = 0; is < 10; ++is) {
      double a = u(rng);
      Vec2 z = c.metric.domain.boundary_point(Vec<1>(a));
      EikonalField f = eikonal_solve(geom, s, z);
      int got = 0;
      while (got < 5) {
        double b = u(rng);
        Vec2 w = c.metric.domain.boundary_point(Vec<1>(b));
        if ((w - z).norm() < 0.25 * c.metric.domain.semiaxes[0]) continue;
        double d_ray = boundary_distance(c.metric, a, b).distance;
        double d_fmm = make_time_probe(geom, w).apply(f.t);
        worst = std::max(worst, std::abs(d_fmm - d_ray) / d_ray);
        ++got;
        ++pairs;
      }
    }
    detail("%s: %d pairs on a 400 grid, worst relative gap %.3e", c.name,
           pairs, worst);
    g.require(worst <= 0.01, std::string(c.name) + " gap above 1%");
  }
  return g.ok;
}

// ---------------------------------------------------------------- C5

struct DiametricPicks {
  double tp = -1.0, ts = -1.0;
};

DiametricPicks diametric_picks(int grid) {
  SimulationConfig cfg;
  cfg.domain = kDisk;
  cfg.material = constant_lame_field(kDisk, LameTriplet{1.0, 1.0, 1.0});
  cfg.grid_nodes = grid;
  cfg.duration = 3.0;
  cfg.n_receivers = 64;
  cfg.target_samples = 1200;

  cfg.sources = {WaveSource{0.0, "normal", 1.0}};
  DNDataset dn_p = assemble_dn_data(cfg);
  cfg.sources = {WaveSource{0.0, "tangential", 1.0}};
  DNDataset dn_s = assemble_dn_data(cfg);

  PickOptions popt;
  std::vector<Arrival> picks_p = pick_arrivals(dn_p, 'p');

  // Gate the shear picks behind the pressure packet seen at each receiver;
  // the material is known here so the guard uses the true speed ratio.
  double ratio = std::sqrt(3.0);
  std::vector<VecX> gates(1);
  gates[0] = VecX::Constant(dn_s.n_receivers(), -1.0);
  for (const Arrival& a : picks_p)
    if (a.confidence >= 0.2)
      gates[0][a.receiver_id] =
          shear_gate(a.t_pick, dn_s.f0, dn_s.t0, popt, ratio);
  PickOptions sopt;
  sopt.min_separation = 0.3;
  std::vector<Arrival> picks_s = pick_arrivals(dn_s, 's', &gates, sopt);

  long r_far = 0;
  double best = 1e9;
  for (long r = 0; r < dn_p.n_receivers(); ++r) {
    double gap = std::abs(std::remainder(dn_p.receiver_params[r] - M_PI,
                                         2.0 * M_PI));
    if (gap < best) {
      best = gap;
      r_far = r;
    }
  }
  DiametricPicks out;
  for (const Arrival& a : picks_p)
    if (a.receiver_id == r_far && a.confidence >= 0.2) out.tp = a.t_pick;
  for (const Arrival& a : picks_s)
    if (a.receiver_id == r_far && a.confidence >= 0.2) out.ts = a.t_pick;
  return out;
}

bool c5_arrival_convergence() {
  Gate g;
  double tp_true = 2.0 / std::sqrt(3.0), ts_true = 2.0;
  DiametricPicks coarse = diametric_picks(200);
  DiametricPicks fine = diametric_picks(400);
  g.require(coarse.tp > 0 && coarse.ts > 0, "missing pick on the 200 grid");
  g.require(fine.tp > 0 && fine.ts > 0, "missing pick on the 400 grid");
  if (!g.ok) return false;

  double ep_c = std::abs(coarse.tp - tp_true) / tp_true;
  double es_c = std::abs(coarse.ts - ts_true) / ts_true;
  double ep_f = std::abs(fine.tp - tp_true) / tp_true;
  double es_f = std::abs(fine.ts - ts_true) / ts_true;
  detail("200 grid: t_p %.5f (err %.2e), t_s %.5f (err %.2e)", coarse.tp,
         ep_c, coarse.ts, es_c);
  detail("400 grid: t_p %.5f (err %.2e), t_s %.5f (err %.2e)", fine.tp, ep_f,
         fine.ts, es_f);
  g.require(ep_f <= 0.05, "pressure arrival off by more than 5%");
  g.require(es_f <= 0.05, "shear arrival off by more than 5%");
  double e_c = std::max(ep_c, es_c), e_f = std::max(ep_f, es_f);
  g.require(e_f <= 0.5 * e_c, "combined pick error did not halve with h");
  return g.ok;
}

// ---------------------------------------------------------------- C6

bool c6_bump_visibility() {
  Gate g;
  SimulationConfig cfg;
  cfg.domain = kDisk;
  cfg.material = constant_lame_field(kDisk, LameTriplet{1.0, 1.0, 1.0});
  cfg.grid_nodes = 400;
  cfg.duration = 3.0;
  cfg.f0 = 9.0;  // pinned so all resolutions share the wavelet
  cfg.n_receivers = 64;
  cfg.target_samples = 1200;
  for (int k = 0; k < 4; ++k)
    cfg.sources.push_back(WaveSource{M_PI_2 * k, "normal", 1.0});

  DNDataset hom = assemble_dn_data(cfg);
  g.require(compare_dn(hom, hom) == 0.0, "self comparison is not exactly 0");

  SimulationConfig fine = cfg;
  fine.grid_nodes = static_cast<int>(std::lround((cfg.grid_nodes - 1) *
                                                 std::sqrt(2.0))) + 1;
  DNDataset hom_fine = assemble_dn_data(fine);
  double floor = compare_dn(hom, hom_fine);
  detail("grid refinement noise floor (400 vs %d): %.3e", fine.grid_nodes,
         floor);

  SimulationConfig bump_cfg = cfg;
  bump_cfg.material =
      LameField2{kDisk, ScalarField2::constant(1.0),
                 ScalarField2::constant(1.0) +
                     ScalarField2::bump(0.1, Vec2::Zero(), 0.85, 4),
                 ScalarField2::constant(1.0)};
  DNDataset bump = assemble_dn_data(bump_cfg);
  double disc = compare_dn(hom, bump);
  detail("10%% shear-modulus bump discrepancy: %.3e (%.1fx floor)", disc,
         disc / floor);
  g.require(disc > 10.0 * floor, "bump sits below 10x the noise floor");
  return g.ok;
}

// ---------------------------------------------------------------- C7

bool c7_inversion() {
  Gate g;
  GradientSelfCheck sc = gradient_selfcheck();
  detail("gradient selfcheck: adjoint %.2e, zero-dir %.2e, reg %.2e",
         sc.max_rel_error, sc.zero_direction_error, sc.reg_gradient_error);
  g.require(sc.max_rel_error <= 1e-3, "adjoint gradient off by more than 1e-3");
  g.require(sc.zero_direction_error <= 1e-14, "zero direction not exact");
  g.require(sc.reg_gradient_error <= 1e-10, "regularizer gradient not exact");

  // Constant speed from exact chords, started away from the truth.
  {
    int m = 32;
    std::vector<TravelObservation> obs;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        double a = 2.0 * M_PI * i / m, b = 2.0 * M_PI * j / m;
        obs.push_back({a, b, 2.0 * std::abs(std::sin(0.5 * (a - b)))});
      }
    InversionOptions opts;
    opts.grid_nodes = 161;
    opts.reg_weight = 1e-5;
    InversionResult r =
        invert_conformal(obs, kDisk, ScalarField2::constant(1.2), opts);
    double err = r.relative_l2_error(ScalarField2::constant(1.0));
    detail("constant: %d iterations, misfit %.3e -> %.3e, L2 error %.4f",
           r.iterations, r.initial_misfit, r.final_misfit, err);
    g.require(err <= 0.02, "constant speed error above 2% on the 90% subdisk");
  }

  // Smooth lens from shot rays: large residual contraction.
  {
    ScalarField2 truth = ScalarField2::radial_quadratic(1.0, 0.3);
    TravelTimeTable table = distance_table(lens_metric(), 16, "s");
    InversionOptions opts;
    opts.grid_nodes = 161;
    opts.reg_weight = 1e-5;
    InversionResult r =
        invert_conformal(table, kDisk, ScalarField2::constant(1.2), opts);
    double drop = r.initial_misfit / std::max(r.final_misfit, 1e-300);
    double err = r.relative_l2_error(truth);
    detail("lens: misfit %.3e -> %.3e (%.0fx), L2 error %.4f",
           r.initial_misfit, r.final_misfit, drop, err);
    g.require(drop >= 100.0, "lens residual dropped by less than 100x");
  }
  return g.ok;
}

// ---------------------------------------------------------------- C8

bool c8_end_to_end() {
  Gate g;
  ExperimentConfig c = preset("homogeneous-disk");
  RigidityConfig rc = rigidity_config(c, 1);
  RigidityReport rep =
      rigidity_experiment(c.reference, candidate_field(c), rc);

  detail("verdict: %s, discrepancy %.3e vs floor %.3e", rep.verdict.c_str(),
         rep.discrepancy, rep.noise_floor);
  for (const auto& h : rep.hypotheses)
    detail("hypothesis %-24s %-15s metric % .3e", h.name.c_str(),
           h.tag.c_str(), h.metric);
  g.require(rep.verdict == "indistinguishable",
            "identical bodies were not indistinguishable");
  g.require(rep.hypotheses_ok, "a hypothesis check failed");
  g.require(rep.reconstructed, "no reconstruction was produced");
  if (!rep.reconstructed) return g.ok;

  detail("picks: %d pressure, %d shear", rep.picks_p_used, rep.picks_s_used);
  detail("speed errors: c_p %.4f, c_s %.4f", rep.cp_rel_l2, rep.cs_rel_l2);
  detail("recovered lam %.4f mu %.4f rho %.4f (errors %.3e %.3e %.3e)",
         rep.lam_hat, rep.mu_hat, rep.rho_hat, rep.lam_err, rep.mu_err,
         rep.rho_err);
  g.require(rep.lam_err <= 0.02, "lambda off by more than 2%");
  g.require(rep.mu_err <= 0.02, "mu off by more than 2%");
  g.require(rep.rho_err <= 0.02, "rho off by more than 2%");
  return g.ok;
}

// ---------------------------------------------------------------- C9

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in.good()) return "<missing " + p.string() + ">";
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

bool c9_determinism() {
  Gate g;
  fs::path root = fs::temp_directory_path() / "elab_acceptance_rerun";
  fs::remove_all(root);
  fs::create_directories(root);

  // A small simulation config keeps the rerun fast while exercising the
  // binary trace format.
  ordered_json j = ordered_json::parse(preset_text("homogeneous-disk"));
  j["simulation"]["grid_nodes"] = 120;
  j["simulation"]["duration"] = 1.2;
  j["simulation"]["target_samples"] = 300;
  j["simulation"]["n_receivers"] = 16;
  j["sources"] = ordered_json::array(
      {ordered_json{{"param", 0.0}, {"polarization", "normal"},
                    {"amplitude", 1.0}}});
  fs::path cfg_path = root / "small.json";
  {
    std::ofstream out(cfg_path);
    out << j.dump(2) << "\n";
  }

  struct Job {
    std::string args;
    std::vector<std::string> artifacts;
  };
  std::vector<Job> jobs = {
      {"speeds --preset mu-bump-10pct", {"speeds.csv", "config.json"}},
      {"distances --preset hyperbolic-disk --m 6",
       {"distances_s.csv", "distances_s.json", "config.json"}},
      {"simulate --config " + cfg_path.string(),
       {"dn.bin", "dn.json", "traces_src0.dat", "energy_src0.dat"}},
  };
  int job_id = 0;
  for (const Job& job : jobs) {
    fs::path a = root / ("a" + std::to_string(job_id));
    fs::path b = root / ("b" + std::to_string(job_id));
    for (const fs::path& out : {a, b}) {
      std::string cmd = std::string(LAB_BINARY) + " " + job.args + " --out " +
                        out.string() + " > " + (out.string() + ".log") +
                        " 2>&1";
      int rc = std::system(cmd.c_str());
      g.require(rc != -1 && WEXITSTATUS(rc) == 0,
                "run failed: " + job.args);
    }
    for (const std::string& f : job.artifacts) {
      bool same = slurp(a / f) == slurp(b / f);
      g.require(same, "rerun changed " + f + " (" + job.args + ")");
    }
    // Manifests may differ in timings only; the checksum lists must agree.
    ordered_json ma = ordered_json::parse(slurp(a / "manifest.json"));
    ordered_json mb = ordered_json::parse(slurp(b / "manifest.json"));
    g.require(ma["artifacts"] == mb["artifacts"],
              "manifest checksums changed on rerun (" + job.args + ")");
    g.require(ma["config_hash"] == mb["config_hash"],
              "config hash changed on rerun");
    ++job_id;
  }
  detail("3 subcommands rerun byte-identically");
  return g.ok;
}

} // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (arg == "--quiet") {
      g_verbose = false;
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N] [--quiet]\n", argv[0]);
      return 64;
    }
  }

  std::vector<Criterion> criteria = {
      {1, "christoffel eigenstructure on random draws", 10.0, c1_christoffel},
      {2, "boundary shape operator ignores vanishing 1-jets", 30.0,
       c2_sff_invariance},
      {3, "model geometry distances and conjugate points", 120.0,
       c3_model_distances},
      {4, "ray shooting agrees with fast marching", 120.0,
       c4_shooting_vs_marching},
      {5, "picked arrivals converge to both body-wave times", 600.0,
       c5_arrival_convergence},
      {6, "a 10% shear bump clears the refinement noise floor", 1800.0,
       c6_bump_visibility},
      {7, "travel-time inversion recovers model speeds", 600.0, c7_inversion},
      {8, "end-to-end homogeneous reconstruction", 3600.0, c8_end_to_end},
      {9, "artifacts are byte-identical on rerun", 300.0, c9_determinism},
  };

  int failures = 0, executed = 0;
  for (auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ++executed;
    std::printf("[C%d] %s\n", c.id, c.summary.c_str());
    std::fflush(stdout);
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string err;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      err = e.what();
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();
    if (!err.empty()) std::printf("       threw: %s\n", err.c_str());
    if (ok && dt > c.budget_s) {
      std::printf("       over budget: %.1f s > %.0f s allowed\n", dt,
                  c.budget_s);
      ok = false;
    }
    std::printf("[C%d %s] (%.1f s)\n", c.id, ok ? "PASS" : "FAIL", dt);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (executed == 0) {
    std::fprintf(stderr, "no such criterion\n");
    return 64;
  }
  return failures;
}
