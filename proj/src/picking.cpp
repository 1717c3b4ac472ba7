#include "elab/picking.hpp"

#include <cmath>

namespace elab {

namespace {

double arc_separation(const Domain2& dom, double a, double b) {
  if (dom.is_ball())
    return dom.semiaxes[0] * std::abs(std::remainder(a - b, 2.0 * M_PI));
  return (dom.boundary_point(Vec<1>(a)) - dom.boundary_point(Vec<1>(b)))
      .norm();
}

} // namespace

std::vector<Arrival> pick_arrivals(const DNDataset& data, char mode,
                                   const std::vector<VecX>* gates,
                                   const PickOptions& opts) {
  if (mode != 'p' && mode != 's') throw ConfigError("pick mode must be p or s");
  const long n_rec = data.n_receivers();
  const long n_t = static_cast<long>(data.times.size());
  const double delay =
      ricker_first_crossing(data.f0, data.t0, opts.rel_threshold);

  std::vector<Arrival> out;
  out.reserve(data.sources.size() * n_rec);
  VecX series(n_t);

  for (size_t s = 0; s < data.sources.size(); ++s) {
    const MatX& tr = data.traces[s];
    for (long r = 0; r < n_rec; ++r) {
      Arrival a;
      a.source_id = static_cast<int>(s);
      a.receiver_id = static_cast<int>(r);
      a.mode = mode;
      out.push_back(a);
      Arrival& pick = out.back();

      if (arc_separation(data.domain, data.sources[s].param,
                         data.receiver_params[r]) < opts.min_separation)
        continue;
      double t_gate = 0.0;
      if (gates) {
        t_gate = (*gates)[s][r];
        if (t_gate < 0.0) continue;
      }

      Vec2 xr = data.domain.boundary_point(Vec<1>(data.receiver_params[r]));
      Vec2 nu = data.domain.outward_normal(xr);
      double px = mode == 'p' ? nu[0] : -nu[1];
      double py = mode == 'p' ? nu[1] : nu[0];
      for (long k = 0; k < n_t; ++k)
        series[k] = px * tr(2 * r, k) + py * tr(2 * r + 1, k);

      double global_max = series.cwiseAbs().maxCoeff();
      if (global_max <= 0.0) continue;
      long n0 = std::max<long>(8, n_t / 10);
      double noise =
          std::sqrt(series.head(n0).squaredNorm() / static_cast<double>(n0));
      double floor =
          std::max(opts.noise_mult * noise, 1e-7 * global_max);

      long start = 0;
      while (start < n_t && data.times[start] < t_gate) ++start;
      long onset = -1;
      for (long k = start; k < n_t; ++k)
        if (std::abs(series[k]) > floor) {
          onset = k;
          break;
        }
      if (onset <= 0) continue;

      double t_win = data.times[onset] + opts.window_periods / data.f0;
      double local_amp = 0.0;
      for (long k = onset; k < n_t && data.times[k] <= t_win; ++k)
        local_amp = std::max(local_amp, std::abs(series[k]));
      double threshold = std::max(opts.rel_threshold * local_amp, floor);

      long k1 = onset;
      while (k1 < n_t && std::abs(series[k1]) < threshold) ++k1;
      if (k1 >= n_t || k1 == 0) continue;
      double y0 = std::abs(series[k1 - 1]), y1 = std::abs(series[k1]);
      double frac = y1 > y0 ? (threshold - y0) / (y1 - y0) : 1.0;
      double t_cross =
          data.times[k1 - 1] + frac * (data.times[k1] - data.times[k1 - 1]);

      double t_pick = t_cross - delay;
      if (t_pick <= 0.0) continue;
      pick.t_pick = t_pick;
      pick.confidence =
          std::min(1.0, local_amp / (10.0 * std::max(floor, 1e-300)));
    }
  }
  return out;
}

double shear_gate(double t_p, double f0, double t0, const PickOptions& opts,
                  double min_speed_ratio) {
  double delay = ricker_first_crossing(f0, t0, opts.rel_threshold);
  double clear =
      std::max(opts.gate_factor * t_p, t_p + opts.gate_clear_periods / f0);
  if (clear > 0.95 * min_speed_ratio * t_p) return -1.0;
  return delay + clear;
}

std::vector<TravelObservation> picks_to_observations(
    const std::vector<Arrival>& picks, const DNDataset& data,
    double min_confidence) {
  std::vector<TravelObservation> obs;
  for (const Arrival& a : picks) {
    if (a.confidence < min_confidence) continue;
    obs.push_back({data.sources[a.source_id].param,
                   data.receiver_params[a.receiver_id], a.t_pick});
  }
  return obs;
}

} // namespace elab
