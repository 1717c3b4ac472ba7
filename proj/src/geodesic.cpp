#include "elab/geodesic.hpp"

#include <cmath>

namespace elab {

namespace {

// Fractional-step bisection for the crossing of the domain's implicit
// function between s and rk4_step(s, dt).  Returns the sub-step length.
template <int N, class FieldFn>
double refine_crossing(const FieldFn& c, const Domain<N>& dom,
                       const GeodesicState<N>& s, double dt, double f_lo) {
  double lo = 0.0, hi = dt;
  bool rising = f_lo < 0.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    double f = dom.implicit(rk4_step<N>(c, s, mid).x).v;
    if ((f < 0.0) == rising)
      lo = mid;
    else
      hi = mid;
    if (std::abs(f) < 1e-14) break;
  }
  return 0.5 * (lo + hi);
}

} // namespace

template <int N>
GeodesicPath<N> shoot(const ConformalMetric<N>& metric, const Vec<N>& x0,
                      const Vec<N>& v0, double t_max,
                      const ShootOptions& opts) {
  const auto& c = metric.speed.evaluator();
  double dt = opts.step_override > 0.0 ? opts.step_override
                                       : metric.default_step();
  GeodesicPath<N> path;
  for (int attempt = 0; attempt < 4; ++attempt) {
    path.samples.clear();
    path.step = dt;
    path.max_speed_drift = 0.0;
    path.richardson_error = opts.monitor ? 0.0 : -1.0;
    GeodesicState<N> s{x0, metric.unit_g(x0, v0)};
    path.samples.push_back({0.0, s.x, s.v});
    double t = 0.0;
    long k = 0;
    bool redo = false;
    while (t < t_max - 1e-15 * t_max) {
      double h = std::min(dt, t_max - t);
      GeodesicState<N> next = rk4_step<N>(c, s, h);
      if (opts.monitor) {
        GeodesicState<N> half =
            rk4_step<N>(c, rk4_step<N>(c, s, 0.5 * h), 0.5 * h);
        double err = (next.x - half.x).norm() / 15.0;
        path.richardson_error = std::max(path.richardson_error, err);
        if (err > opts.monitor_tol) {
          dt *= 0.5;
          redo = true;
          break;
        }
        next = half;
      }
      s = next;
      t += h;
      ++k;
      if (k % opts.record_stride == 0 || t >= t_max - 1e-15 * t_max) {
        path.samples.push_back({t, s.x, s.v});
        double drift = std::abs(s.v.norm() / metric.speed.value(s.x) - 1.0);
        path.max_speed_drift = std::max(path.max_speed_drift, drift);
      }
    }
    if (!redo) break;
  }
  return path;
}

template <int N>
ExitRecord<N> trace_exit(const ConformalMetric<N>& metric, const Vec<N>& x0,
                         const Vec<N>& dir, double step_override) {
  const auto& c = metric.speed.evaluator();
  const Domain<N>& dom = metric.domain;
  double dt = step_override > 0.0 ? step_override : metric.default_step();
  double cap = metric.trapping_cap();
  double far2 = 4.0 * dom.diameter_euclidean() * dom.diameter_euclidean();

  ExitRecord<N> rec;
  GeodesicState<N> s{x0, metric.unit_g(x0, dir)};
  double f = dom.implicit(s.x).v;
  rec.entered = f <= 1e-12;
  double t = 0.0;
  while (t < cap) {
    GeodesicState<N> next = rk4_step<N>(c, s, dt);
    double fn = dom.implicit(next.x).v;
    if (!rec.entered) {
      if (fn < 0.0) {
        double ss = refine_crossing<N>(c, dom, s, dt, /*f_lo=*/1.0);
        rec.entered = true;
        rec.delta = t + ss;
        s = rk4_step<N>(c, s, ss);
        t += ss;
        continue;
      }
      if ((next.x - dom.center).squaredNorm() > far2 &&
          (next.x - dom.center).dot(next.v) > 0.0)
        return rec;  // moving away, never met the domain
    } else if (fn > 0.0) {
      double ss = refine_crossing<N>(c, dom, s, dt, /*f_lo=*/-1.0);
      GeodesicState<N> e = rk4_step<N>(c, s, ss);
      rec.tau = t + ss;
      rec.exit_point = e.x;
      rec.exit_velocity = e.v;
      return rec;
    }
    s = next;
    t += dt;
  }
  rec.possibly_trapped = true;
  return rec;
}

namespace {

struct AugState {
  Vec2 x, v, dx, dv;
};

struct AugDeriv {
  Vec2 xd, vd, dxd, dvd;
};

template <class FieldFn>
AugDeriv aug_rhs(const FieldFn& cf, const AugState& s) {
  Jet2 c = cf(s.x);
  Vec2 a = geodesic_accel<2>(c, s.v);
  double gv = c.g.dot(s.v), vv = s.v.squaredNorm();
  Mat2 ax = (2.0 * (c.h * s.v) * s.v.transpose()).transpose() / c.v -
            vv * c.h / c.v - a * c.g.transpose() / c.v;
  Mat2 av = (2.0 * s.v * c.g.transpose() - 2.0 * c.g * s.v.transpose() +
             2.0 * gv * Mat2::Identity()) /
            c.v;
  return {s.v, a, s.dv, ax * s.dx + av * s.dv};
}

template <class FieldFn>
AugState aug_rk4(const FieldFn& cf, const AugState& s, double dt) {
  auto add = [](const AugState& a, const AugDeriv& d, double h) {
    return AugState{a.x + h * d.xd, a.v + h * d.vd, a.dx + h * d.dxd,
                    a.dv + h * d.dvd};
  };
  AugDeriv k1 = aug_rhs(cf, s);
  AugDeriv k2 = aug_rhs(cf, add(s, k1, 0.5 * dt));
  AugDeriv k3 = aug_rhs(cf, add(s, k2, 0.5 * dt));
  AugDeriv k4 = aug_rhs(cf, add(s, k3, dt));
  AugState out = s;
  out.x += dt / 6.0 * (k1.xd + 2.0 * k2.xd + 2.0 * k3.xd + k4.xd);
  out.v += dt / 6.0 * (k1.vd + 2.0 * k2.vd + 2.0 * k3.vd + k4.vd);
  out.dx += dt / 6.0 * (k1.dxd + 2.0 * k2.dxd + 2.0 * k3.dxd + k4.dxd);
  out.dv += dt / 6.0 * (k1.dvd + 2.0 * k2.dvd + 2.0 * k3.dvd + k4.dvd);
  return out;
}

// Chart inversion x -> x/|x|^2 applied to the augmented state.  Valid when
// the metric is invariant under the inversion (round-sphere chart); it maps
// far coordinate regions back near the origin so the Jacobi integration
// stays conditioned.
AugState invert_chart(const AugState& s) {
  double r2 = s.x.squaredNorm();
  Mat2 A = (Mat2::Identity() - 2.0 * (s.x * s.x.transpose()) / r2) / r2;
  // dA[k](i,j) = dA_ij/dx_k contracted with a vector u: (dA u)_i = sum_jk
  // dA_ij/dx_k u_j w_k applied below with explicit loops.
  auto dA_contract = [&](const Vec2& u, const Vec2& w) {
    Vec2 out = Vec2::Zero();
    double r4 = r2 * r2, r6 = r4 * r2;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          double dAijk = -2.0 * s.x[k] * (i == j ? 1.0 : 0.0) / r4 -
                         2.0 * ((i == k ? 1.0 : 0.0) * s.x[j] +
                                (j == k ? 1.0 : 0.0) * s.x[i]) /
                             r4 +
                         8.0 * s.x[i] * s.x[j] * s.x[k] / r6;
          out[i] += dAijk * u[j] * w[k];
        }
    return out;
  };
  AugState o;
  o.x = s.x / r2;
  o.v = A * s.v;
  o.dx = A * s.dx;
  o.dv = dA_contract(s.v, s.dx) + A * s.dv;
  return o;
}

} // namespace

std::optional<double> conjugate_point_scan(const ConformalMetric<2>& metric,
                                           const Vec2& x0, const Vec2& v0,
                                           double t_max,
                                           double step_override) {
  const auto& cf = metric.speed.evaluator();
  double dt = step_override > 0.0 ? step_override : metric.default_step();

  AugState s;
  s.x = x0;
  s.v = metric.unit_g(x0, v0);
  s.dx = Vec2::Zero();
  double c0 = metric.speed.value(x0);
  Vec2 vhat = s.v / s.v.norm();
  s.dv = c0 * Vec2(-vhat[1], vhat[0]);  // g-unit normal at start

  double orient = 1.0;
  auto normal_component = [&](const AugState& a) {
    Vec2 n(-a.v[1], a.v[0]);
    n /= n.norm();
    return orient * a.dx.dot(n) / cf(a.x).v;
  };

  double t = 0.0;
  double y_prev = 0.0;
  bool armed = false;
  while (t < t_max) {
    if (metric.inversion_symmetric && s.x.squaredNorm() > 2.25) {
      double before = normal_component(s);
      AugState flipped = invert_chart(s);
      if (before * normal_component(flipped) < 0.0) orient = -orient;
      s = flipped;
    }
    double h = std::min(dt, t_max - t);
    AugState next = aug_rk4(cf, s, h);
    double y = normal_component(next);
    if (armed && y_prev * y < 0.0) {
      double lo = 0.0, hi = h;
      for (int it = 0; it < 50; ++it) {
        double mid = 0.5 * (lo + hi);
        double ym = normal_component(aug_rk4(cf, s, mid));
        if (ym * y_prev > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      return t + 0.5 * (lo + hi);
    }
    if (t > 5.0 * dt) armed = true;
    y_prev = y;
    s = next;
    t += h;
  }
  return std::nullopt;
}

template GeodesicPath<2> shoot(const ConformalMetric<2>&, const Vec2&,
                               const Vec2&, double, const ShootOptions&);
template GeodesicPath<3> shoot(const ConformalMetric<3>&, const Vec3&,
                               const Vec3&, double, const ShootOptions&);
template ExitRecord<2> trace_exit(const ConformalMetric<2>&, const Vec2&,
                                  const Vec2&, double);
template ExitRecord<3> trace_exit(const ConformalMetric<3>&, const Vec3&,
                                  const Vec3&, double);

} // namespace elab
