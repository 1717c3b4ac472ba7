#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "elab/picking.hpp"
#include "elab/wave.hpp"

using namespace elab;

namespace {

SimulationConfig disk_config(int grid, double duration, int samples,
                             int receivers) {
  SimulationConfig cfg;
  cfg.domain = Domain2::ball(Vec2::Zero(), 1.0);
  cfg.material = constant_lame_field(cfg.domain, LameTriplet{1.0, 1.0, 1.0});
  cfg.grid_nodes = grid;
  cfg.duration = duration;
  cfg.target_samples = samples;
  cfg.n_receivers = receivers;
  return cfg;
}

double wrap_angle(double a) {
  return std::remainder(a, 2.0 * M_PI);
}

} // namespace

TEST_CASE("zero amplitude means a zero field and zero traces") {
  SimulationConfig cfg = disk_config(100, 0.6, 120, 12);
  WaveSource src{0.0, "normal", 0.0};
  cfg.sources = {src};
  WaveField wf = solve_ibvp(cfg, src, 3);
  for (const auto& a : {wf.ux, wf.uy, wf.vx, wf.vy})
    for (const auto& snap : a) CHECK(snap.abs().maxCoeff() == 0.0);
  DNDataset d = assemble_dn_data(cfg);
  CHECK(d.traces[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the solve is linear in the source amplitude") {
  SimulationConfig cfg = disk_config(120, 1.0, 200, 16);
  cfg.sources = {WaveSource{0.7, "normal", 1.0}};
  DNDataset d1 = assemble_dn_data(cfg);
  cfg.sources = {WaveSource{0.7, "normal", 2.0}};
  DNDataset d2 = assemble_dn_data(cfg);
  double scale = d2.traces[0].cwiseAbs().maxCoeff();
  REQUIRE(scale > 0.0);
  double dev = (d2.traces[0] - 2.0 * d1.traces[0]).cwiseAbs().maxCoeff();
  CHECK(dev <= 1e-12 * scale);
}

TEST_CASE("nothing arrives before the pressure front") {
  SimulationConfig cfg = disk_config(160, 1.6, 400, 8);
  cfg.sources = {WaveSource{0.0, "normal", 1.0}};
  DNDataset d = assemble_dn_data(cfg);
  // Receiver opposite the source; the excitation arc is a few cells wide, so
  // the shortest path is slightly under the diameter.
  long r_far = 0;
  double best = 1e9;
  for (long r = 0; r < d.n_receivers(); ++r) {
    double gap = std::abs(wrap_angle(d.receiver_params[r] - M_PI));
    if (gap < best) {
      best = gap;
      r_far = r;
    }
  }
  double cp = std::sqrt(3.0);
  double emit_start = d.t0 - 1.5 / d.f0;
  double t_quiet = emit_start + 1.8 / cp;
  double gmax = 0.0, quiet = 0.0;
  for (long k = 0; k < static_cast<long>(d.times.size()); ++k) {
    double amp = std::hypot(d.traces[0](2 * r_far, k),
                            d.traces[0](2 * r_far + 1, k));
    gmax = std::max(gmax, amp);
    if (d.times[k] < t_quiet) quiet = std::max(quiet, amp);
  }
  REQUIRE(gmax > 0.0);
  CHECK(quiet <= 1e-8 * gmax);
}

TEST_CASE("energy does not grow once the source has shut off") {
  SimulationConfig cfg = disk_config(240, 2.4, 240, 8);
  cfg.sources = {WaveSource{1.3, "normal", 1.0}};
  DNDataset d = assemble_dn_data(cfg);
  const MatX& e = d.energy[0];
  REQUIRE(e.rows() > 10);
  double t_off = d.t0 + 1.5 / d.f0;
  std::vector<double> ts, es;
  for (long k = 0; k < e.rows(); ++k) {
    double tot = e(k, 1) + e(k, 2);
    CHECK(std::isfinite(tot));
    if (e(k, 0) < t_off) continue;
    ts.push_back(e(k, 0));
    es.push_back(tot);
  }
  REQUIRE(ts.size() > 10);
  REQUIRE(*std::max_element(es.begin(), es.end()) > 0.0);
  // Growth between any two later samples stays under half a percent per
  // wave-crossing time (diameter over the shear speed).
  double t_cross = 2.0 / 1.0;
  for (size_t i = 0; i < es.size(); ++i)
    for (size_t j = i + 1; j < es.size(); ++j) {
      double budget = 0.005 * std::max(1.0, (ts[j] - ts[i]) / t_cross);
      CHECK(es[j] <= es[i] * (1.0 + budget));
    }
}

TEST_CASE("boundary data pairing is reciprocal") {
  // Betti pairing with identical wavelets: conv-in-time of the traction of
  // one source against the Dirichlet profile of the other, summed over the
  // boundary, is symmetric under swapping the sources.
  SimulationConfig cfg = disk_config(160, 2.4, 480, 128);
  cfg.source_width_cells = 12.0;
  cfg.sources = {WaveSource{0.0, "normal", 1.0},
                 WaveSource{2.1, "normal", 1.0}};
  DNDataset d = assemble_dn_data(cfg);

  double h = d.grid_h;
  double w = cfg.source_width_cells * h;
  long nt = static_cast<long>(d.times.size());
  long nr = d.n_receivers();
  auto pairing = [&](int a, int b) {
    double acc = 0.0;
    double t_end = d.times.back();
    for (long r = 0; r < nr; ++r) {
      double arc = std::abs(wrap_angle(d.receiver_params[r] -
                                       d.sources[b].param));
      double profile = std::exp(-0.5 * (arc / w) * (arc / w));
      if (profile < 1e-12) continue;
      Vec2 xr = d.domain.boundary_point(Vec<1>(d.receiver_params[r]));
      Vec2 nu = d.domain.outward_normal(xr);
      double conv = 0.0;
      for (long k = 0; k < nt; ++k) {
        double tn = nu[0] * d.traces[a](2 * r, k) +
                    nu[1] * d.traces[a](2 * r + 1, k);
        conv += tn * ricker(t_end - d.times[k], d.f0, d.t0);
      }
      acc += profile * conv;
    }
    return acc;
  };
  double p01 = pairing(0, 1), p10 = pairing(1, 0);
  REQUIRE(std::abs(p01) > 0.0);
  CHECK(std::abs(p01 - p10) <= 0.05 * std::max(std::abs(p01), std::abs(p10)));
}

TEST_CASE("free space plane pulses travel at the body wave speeds") {
  PulseFit p = free_space_pulse_speed('p', {1.0, 1.0, 1.0}, 400);
  CHECK(p.reference == doctest::Approx(std::sqrt(3.0)));
  CHECK(p.relative_error() <= 0.02);
  PulseFit s = free_space_pulse_speed('s', {1.0, 1.0, 1.0}, 400);
  CHECK(s.reference == doctest::Approx(1.0));
  CHECK(s.relative_error() <= 0.02);
  // Quadrupling the density halves both speeds.
  PulseFit heavy = free_space_pulse_speed('p', {1.0, 1.0, 4.0}, 400);
  CHECK(heavy.reference == doctest::Approx(0.5 * std::sqrt(3.0)));
  CHECK(heavy.relative_error() <= 0.02);
}

TEST_CASE("dataset comparison: identity, gain, and layout guards") {
  SimulationConfig cfg = disk_config(100, 0.9, 160, 12);
  cfg.sources = {WaveSource{0.4, "normal", 1.0}};
  DNDataset a = assemble_dn_data(cfg);
  CHECK(compare_dn(a, a) == 0.0);

  DNDataset b = a;
  for (auto& t : b.traces) t *= 2.0;
  CHECK(compare_dn(a, b) == doctest::Approx(0.5).epsilon(1e-12));
  DNComparison cmp = compare_dn_breakdown(a, b);
  CHECK(cmp.discrepancy == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(cmp.per_source.size() == 1);
  CHECK(cmp.per_source[0] == doctest::Approx(0.5).epsilon(1e-12));

  DNDataset c = a;
  c.receiver_params.pop_back();
  CHECK_THROWS_AS(compare_dn(a, c), ConfigError);
  DNDataset e = a;
  e.sources[0].polarization = "tangential";
  CHECK_THROWS_AS(compare_dn(a, e), ConfigError);
}

TEST_CASE("unknown polarization is rejected") {
  SimulationConfig cfg = disk_config(100, 0.5, 100, 8);
  cfg.sources = {WaveSource{0.0, "sideways", 1.0}};
  CHECK_THROWS_AS(assemble_dn_data(cfg), ConfigError);
}

TEST_CASE("sample clock is uniform and resolution independent") {
  SimulationConfig cfg = disk_config(100, 1.2, 240, 12);
  cfg.f0 = 3.0;  // resolved on both grids of the pair
  cfg.sources = {WaveSource{0.0, "normal", 1.0}};
  DNDataset a = assemble_dn_data(cfg);
  REQUIRE(static_cast<int>(a.times.size()) == cfg.target_samples);
  CHECK(a.times.front() == 0.0);
  CHECK(a.times.back() == doctest::Approx(cfg.duration).epsilon(1e-12));
  double dts = cfg.duration / (cfg.target_samples - 1);
  for (size_t k = 1; k < a.times.size(); ++k)
    CHECK(a.times[k] - a.times[k - 1] == doctest::Approx(dts).epsilon(1e-9));
  CHECK(a.traces[0].rows() == 2 * cfg.n_receivers);
  CHECK(a.traces[0].cols() == cfg.target_samples);

  // A finer grid fills the same clock, so the comparison is well posed.
  SimulationConfig fine = cfg;
  fine.grid_nodes = 141;
  fine.f0 = a.f0;
  DNDataset b = assemble_dn_data(fine);
  REQUIRE(b.times.size() == a.times.size());
  double disc = compare_dn(a, b);
  CHECK(disc > 0.0);
  CHECK(disc < 0.2);
}

TEST_CASE("first arrivals on the homogeneous disk match both speeds") {
  double cp = std::sqrt(3.0), cs = 1.0;
  SimulationConfig cfg = disk_config(200, 3.2, 800, 48);
  cfg.f0 = 9.0;  // short packet so the shear gate clears the pressure coda
  cfg.sources = {WaveSource{0.0, "normal", 1.0}};
  DNDataset dp = assemble_dn_data(cfg);
  std::vector<Arrival> picks = pick_arrivals(dp, 'p');

  auto chord = [&](double a, double b) {
    return 2.0 * std::abs(std::sin(0.5 * (a - b)));
  };
  int checked = 0;
  for (const Arrival& a : picks) {
    if (a.confidence < 0.2) continue;
    double dist = chord(dp.sources[a.source_id].param,
                        dp.receiver_params[a.receiver_id]);
    // No pick can beat the fastest straight ray by more than the wavelet
    // half-width.
    CHECK(a.t_pick >= dist / cp - 1.0 / dp.f0);
    if (dist > 1.9) {
      CHECK(a.t_pick == doctest::Approx(dist / cp).epsilon(0.05));
      ++checked;
    }
  }
  CHECK(checked >= 1);

  // Shear picks from a tangential source, gated past the pressure packet.
  // The speed ratio is known here, so the gate guard can use it.
  cfg.sources = {WaveSource{0.0, "tangential", 1.0}};
  DNDataset ds = assemble_dn_data(cfg);
  PickOptions popt;
  std::vector<VecX> gates(1);
  gates[0].resize(ds.n_receivers());
  for (long r = 0; r < ds.n_receivers(); ++r) {
    double dist = chord(0.0, ds.receiver_params[r]);
    gates[0][r] = shear_gate(dist / cp, ds.f0, ds.t0, popt, cp / cs);
  }
  PickOptions sopt;
  sopt.min_separation = 0.3;
  std::vector<Arrival> spicks = pick_arrivals(ds, 's', &gates, sopt);
  int s_checked = 0;
  for (const Arrival& a : spicks) {
    if (a.confidence < 0.2) continue;
    double dist = chord(0.0, ds.receiver_params[a.receiver_id]);
    if (dist > 1.9) {
      CHECK(a.t_pick == doctest::Approx(dist / cs).epsilon(0.05));
      ++s_checked;
    }
  }
  CHECK(s_checked >= 1);
}

TEST_CASE("three dimensional smoke stays bounded") {
  Wave3DSmoke s = wave3d_smoke(24, 30);
  CHECK(s.finite);
  CHECK(s.energy_initial > 0.0);
  CHECK(s.energy_final <= 1.01 * s.energy_initial);
  CHECK(s.front_radius > 0.0);
}
