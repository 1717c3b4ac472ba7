#include "elab/density_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "elab/errors.hpp"

namespace elab {

LameField2 triplet_from_speeds(const Domain2& dom, const ScalarField2& cp,
                               const ScalarField2& cs, double rho) {
  if (rho <= 0.0) throw ConfigError("density must be positive");
  ScalarField2 mu = rho * (cs * cs);
  ScalarField2 lam = rho * (cp * cp) - 2.0 * mu;
  return {dom, lam, mu, ScalarField2::constant(rho)};
}

namespace {

DNDataset take_sources(const DNDataset& d, const std::vector<size_t>& idx) {
  DNDataset out = d;
  out.sources.clear();
  out.traces.clear();
  out.energy.clear();
  for (size_t i : idx) {
    out.sources.push_back(d.sources[i]);
    out.traces.push_back(d.traces[i]);
    out.energy.push_back(d.energy[i]);
  }
  return out;
}

} // namespace

DensityFitResult fit_density(const DNDataset& observed, const ScalarField2& cp,
                             const ScalarField2& cs,
                             const DensityFitConfig& cfg) {
  if (observed.sources.empty() || observed.times.size() < 2)
    throw ConfigError("observed dataset is empty");
  if (!(cfg.scan_lo > 0.0) || !(cfg.scan_hi > cfg.scan_lo))
    throw ConfigError("density scan range must satisfy 0 < lo < hi");
  if (cfg.scan_points < 3) throw ConfigError("density scan needs >= 3 points");

  size_t n_src = observed.sources.size();
  size_t n_use = std::max<size_t>(1, std::min<size_t>(cfg.max_sources, n_src));
  std::vector<size_t> idx(n_use);
  for (size_t j = 0; j < n_use; ++j) idx[j] = j * n_src / n_use;
  DNDataset obs = take_sources(observed, idx);

  SimulationConfig base = cfg.sim;
  base.domain = observed.domain;
  base.sources = obs.sources;
  base.n_receivers = static_cast<int>(observed.n_receivers());
  base.target_samples = static_cast<int>(observed.times.size());
  base.duration = observed.times.back();
  base.f0 = observed.f0;
  base.onset_delay_periods = observed.t0 * observed.f0;

  auto residual_at = [&](double rho) {
    SimulationConfig c = base;
    c.material = triplet_from_speeds(base.domain, cp, cs, rho);
    DNDataset sim = assemble_dn_data(c, cfg.threads);
    return compare_dn(sim, obs);
  };

  DensityFitResult res;
  res.sources_used = static_cast<int>(n_use);

  int np = cfg.scan_points;
  double llo = std::log(cfg.scan_lo), lhi = std::log(cfg.scan_hi);
  for (int j = 0; j < np; ++j) {
    double rho = std::exp(llo + (lhi - llo) * j / (np - 1));
    res.scan.emplace_back(rho, residual_at(rho));
  }

  int jmin = 0;
  for (int j = 1; j < np; ++j)
    if (res.scan[j].second < res.scan[jmin].second) jmin = j;

  auto slack = [](double r) { return 1e-12 + 1e-9 * r; };
  bool unimodal = true;
  for (int j = 0; j < jmin; ++j)
    if (res.scan[j + 1].second > res.scan[j].second + slack(res.scan[j].second))
      unimodal = false;
  for (int j = jmin; j + 1 < np; ++j)
    if (res.scan[j + 1].second < res.scan[j].second - slack(res.scan[j].second))
      unimodal = false;

  double qnan = std::numeric_limits<double>::quiet_NaN();
  if (!unimodal) {
    res.ambiguous = true;
    res.rho = qnan;
    res.residual = qnan;
    res.note = "residual scan is not unimodal over the tested range";
    return res;
  }
  if (jmin == 0 || jmin == np - 1) {
    res.ambiguous = true;
    res.rho = qnan;
    res.residual = qnan;
    res.note = "residual minimum sits at the scan edge";
    return res;
  }

  // Golden-section on log density between the bracketing scan neighbors.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(res.scan[jmin - 1].first);
  double b = std::log(res.scan[jmin + 1].first);
  auto eval = [&](double lx) {
    double rho = std::exp(lx);
    double r = residual_at(rho);
    res.refine.emplace_back(rho, r);
    return r;
  };
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  for (int it = 0; it < cfg.refine_iters; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = eval(x2);
    }
  }
  if (f1 < f2) {
    res.rho = std::exp(x1);
    res.residual = f1;
  } else {
    res.rho = std::exp(x2);
    res.residual = f2;
  }
  return res;
}

} // namespace elab
