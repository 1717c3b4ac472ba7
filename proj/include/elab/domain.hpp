#pragma once

// Bounded smooth coordinate domains: balls and axis-aligned ellipsoids,
// described by the implicit function F(x) = sum ((x_i-c_i)/a_i)^2 - 1.
// Everything downstream (normals, boundary shape operator, embedded-boundary
// masks) reads geometry through this interface.

#include <cmath>
#include <stdexcept>

#include "elab/jet.hpp"

namespace elab {

template <int N>
struct Domain {
  Vec<N> center = Vec<N>::Zero();
  Vec<N> semiaxes = Vec<N>::Ones();

  static Domain ball(const Vec<N>& c, double radius) {
    return {c, Vec<N>::Constant(radius)};
  }
  static Domain ellipsoid(const Vec<N>& c, const Vec<N>& axes) {
    return {c, axes};
  }

  bool is_ball() const {
    return (semiaxes.array() == semiaxes[0]).all();
  }

  Jet<N> implicit(const Vec<N>& x) const {
    Vec<N> inv2 = semiaxes.array().square().inverse();
    Vec<N> d = x - center;
    Jet<N> j(d.cwiseProduct(d).dot(inv2) - 1.0);
    j.g = 2.0 * d.cwiseProduct(inv2);
    j.h = 2.0 * inv2.asDiagonal();
    return j;
  }

  bool inside(const Vec<N>& x) const { return implicit(x).v < 0.0; }

  Vec<N> outward_normal(const Vec<N>& x) const {
    Vec<N> g = implicit(x).g;
    return g / g.norm();
  }

  // 2D: params = {theta}.  3D: params = {theta, phi} with phi the polar angle.
  Vec<N> boundary_point(const Vec<N - 1>& params) const;

  // Inverse of boundary_point in 2D; monotone along the boundary.
  double boundary_param(const Vec2& p) const
    requires(N == 2)
  {
    return std::atan2((p[1] - center[1]) / semiaxes[1],
                      (p[0] - center[0]) / semiaxes[0]);
  }

  Vec<N> closest_boundary_point(const Vec<N>& x) const {
    Vec<N> y = x - center;
    if (is_ball()) {
      double r = y.norm();
      if (r == 0.0) {
        Vec<N> p = Vec<N>::Zero();
        p[0] = semiaxes[0];
        return center + p;
      }
      return center + y * (semiaxes[0] / r);
    }
    // Root of G(t) = sum (a_i y_i / (a_i^2 + t))^2 - 1, monotone decreasing on
    // (-min a_i^2, inf); closest point is p_i = a_i^2 y_i / (a_i^2 + t).
    double amin2 = semiaxes.minCoeff() * semiaxes.minCoeff();
    auto G = [&](double t) {
      double s = 0.0;
      for (int i = 0; i < N; ++i) {
        double u = semiaxes[i] * y[i] / (semiaxes[i] * semiaxes[i] + t);
        s += u * u;
      }
      return s - 1.0;
    };
    double lo = -amin2 * (1.0 - 1e-12), hi = semiaxes.maxCoeff() * y.norm() + amin2;
    if (G(lo) < 0.0) lo = -amin2 * (1.0 - 1e-9);  // deep interior, nearly axis
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (G(mid) > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    double t = 0.5 * (lo + hi);
    Vec<N> p;
    for (int i = 0; i < N; ++i)
      p[i] = semiaxes[i] * semiaxes[i] * y[i] / (semiaxes[i] * semiaxes[i] + t);
    return center + p;
  }

  double signed_distance(const Vec<N>& x) const {
    if (is_ball()) return (x - center).norm() - semiaxes[0];
    double d = (x - closest_boundary_point(x)).norm();
    return inside(x) ? -d : d;
  }

  // Shape operator of the boundary w.r.t. the outward normal, as an N x N
  // matrix whose restriction to the tangent space is P Hess(F) P / |grad F|.
  Mat<N> euclidean_shape_operator(const Vec<N>& xb) const {
    Jet<N> F = implicit(xb);
    double gn = F.g.norm();
    Vec<N> nu = F.g / gn;
    Mat<N> P = Mat<N>::Identity() - nu * nu.transpose();
    return P * F.h * P / gn;
  }

  // Orthonormal tangent frame at a boundary point; columns span ker(nu^T).
  Eigen::Matrix<double, N, N - 1> tangent_frame(const Vec<N>& xb) const {
    Vec<N> nu = outward_normal(xb);
    Eigen::Matrix<double, N, N - 1> T;
    if constexpr (N == 2) {
      T.col(0) = Vec2(-nu[1], nu[0]);
    } else {
      int k = 0;
      nu.cwiseAbs().minCoeff(&k);
      Vec<N> e = Vec<N>::Zero();
      e[k] = 1.0;
      Vec<N> t1 = (e - nu.dot(e) * nu).normalized();
      T.col(0) = t1;
      T.col(1) = Vec3(nu[1] * t1[2] - nu[2] * t1[1], nu[2] * t1[0] - nu[0] * t1[2],
                      nu[0] * t1[1] - nu[1] * t1[0]);
    }
    return T;
  }

  double diameter_euclidean() const { return 2.0 * semiaxes.maxCoeff(); }

  void bounding_box(Vec<N>& lo, Vec<N>& hi, double margin = 0.0) const {
    lo = center - semiaxes - Vec<N>::Constant(margin);
    hi = center + semiaxes + Vec<N>::Constant(margin);
  }
};

template <>
inline Vec2 Domain<2>::boundary_point(const Vec<1>& params) const {
  double th = params[0];
  return center + Vec2(semiaxes[0] * std::cos(th), semiaxes[1] * std::sin(th));
}

template <>
inline Vec3 Domain<3>::boundary_point(const Vec2& params) const {
  double th = params[0], ph = params[1];
  return center + Vec3(semiaxes[0] * std::sin(ph) * std::cos(th),
                       semiaxes[1] * std::sin(ph) * std::sin(th),
                       semiaxes[2] * std::cos(ph));
}

using Domain2 = Domain<2>;
using Domain3 = Domain<3>;

} // namespace elab
