#pragma once

// Unit-speed geodesics of g = c^{-2} delta by classic 4th-order fixed-step
// integration.  The geodesic equation in coordinates reads
//   x'' = (2 (grad c . x') x' - |x'|^2 grad c) / c,
// and unit g-speed means |x'|_e = c along the path.  Exit events against the
// domain's implicit function are refined by bisection on a fractional step.

#include <optional>
#include <vector>

#include "elab/metric.hpp"

namespace elab {

template <int N>
struct GeodesicState {
  Vec<N> x;
  Vec<N> v;
};

template <int N>
Vec<N> geodesic_accel(const Jet<N>& c, const Vec<N>& v) {
  return (2.0 * c.g.dot(v) * v - v.squaredNorm() * c.g) / c.v;
}

template <int N, class FieldFn>
GeodesicState<N> rk4_step(const FieldFn& c, const GeodesicState<N>& s,
                          double dt) {
  Vec<N> a1 = geodesic_accel<N>(c(s.x), s.v);
  Vec<N> x2 = s.x + 0.5 * dt * s.v, v2 = s.v + 0.5 * dt * a1;
  Vec<N> a2 = geodesic_accel<N>(c(x2), v2);
  Vec<N> x3 = s.x + 0.5 * dt * v2, v3 = s.v + 0.5 * dt * a2;
  Vec<N> a3 = geodesic_accel<N>(c(x3), v3);
  Vec<N> x4 = s.x + dt * v3, v4 = s.v + dt * a3;
  Vec<N> a4 = geodesic_accel<N>(c(x4), v4);
  return {s.x + dt / 6.0 * (s.v + 2.0 * v2 + 2.0 * v3 + v4),
          s.v + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)};
}

template <int N>
struct PathSample {
  double t;
  Vec<N> x;
  Vec<N> v;
};

template <int N>
struct GeodesicPath {
  std::vector<PathSample<N>> samples;
  double step = 0.0;
  double max_speed_drift = 0.0;    // max | |v|_e / c - 1 |
  double richardson_error = -1.0;  // max per-step estimate when monitored
};

struct ShootOptions {
  int record_stride = 1;
  bool monitor = false;           // Richardson per-step error estimate
  double step_override = 0.0;     // 0: metric default
  double monitor_tol = 1e-9;
};

template <int N>
GeodesicPath<N> shoot(const ConformalMetric<N>& metric, const Vec<N>& x0,
                      const Vec<N>& v0, double t_max,
                      const ShootOptions& opts = {});

struct ExitRecordBase {
  bool entered = false;
  bool possibly_trapped = false;
  double delta = 0.0;  // g-time of first boundary contact
  double tau = 0.0;    // g-time of first boundary crossing after entry
};

template <int N>
struct ExitRecord : ExitRecordBase {
  Vec<N> exit_point = Vec<N>::Zero();
  Vec<N> exit_velocity = Vec<N>::Zero();

  double in_domain_length() const { return tau - delta; }
};

// Integrates from x0 with initial direction dir (renormalized to unit
// g-speed) until the first boundary crossing after entering the domain.
// Starting points on the boundary (|F| small) count as already entered with
// delta = 0.  No sample storage: this is the fast path under the direction
// fans.
template <int N>
ExitRecord<N> trace_exit(const ConformalMetric<N>& metric, const Vec<N>& x0,
                         const Vec<N>& dir, double step_override = 0.0);

// First conjugate g-time along the geodesic from x0 with direction v0, or
// nullopt if none before t_max.  Integrates the Jacobi system J(0) = 0,
// J'(0) = w over metric-normal w and finds sign changes of the normal
// component g(J, E), refined by bisection to 1e-6.  2D only.
std::optional<double> conjugate_point_scan(const ConformalMetric<2>& metric,
                                           const Vec2& x0, const Vec2& v0,
                                           double t_max,
                                           double step_override = 0.0);

} // namespace elab
