#pragma once

// Boundary curvature and convexity checks for conformal metrics.  The shape
// operator of the boundary w.r.t. g, expressed in a g-orthonormal tangent
// frame, is S = c * S_e - (d_nu c) * I with S_e the Euclidean shape operator
// and nu the outward Euclidean unit normal; positive definiteness of S is
// strict convexity of the boundary.

#include <cmath>
#include <limits>
#include <string>

#include "elab/boundary_distance.hpp"
#include "elab/metric.hpp"

namespace elab {

template <int N>
struct SecondFundamentalForm {
  Vec<N> point;
  Eigen::Matrix<double, N, N - 1> frame;  // Euclidean-orthonormal tangent basis
  Mat<N - 1> s;                           // in the g-orthonormal frame c*frame

  double min_eigenvalue() const {
    if constexpr (N == 2) return s(0, 0);
    else {
      Eigen::SelfAdjointEigenSolver<Mat<N - 1>> es(s);
      return es.eigenvalues().minCoeff();
    }
  }
};

template <int N>
SecondFundamentalForm<N> second_fundamental_form(const ConformalMetric<N>& metric,
                                                 const Vec<N>& xb) {
  const Domain<N>& dom = metric.domain;
  SecondFundamentalForm<N> out;
  out.point = xb;
  out.frame = dom.tangent_frame(xb);
  Vec<N> nu = dom.outward_normal(xb);
  Mat<N> se = dom.euclidean_shape_operator(xb);
  Jet<N> c = metric.speed.jet(xb);
  double dnu_c = c.g.dot(nu);
  out.s = c.v * (out.frame.transpose() * se * out.frame).eval() -
          dnu_c * Mat<N - 1>::Identity();
  return out;
}

struct ConvexityVerdict {
  bool convex = false;
  double min_eigenvalue = 0.0;
};

template <int N>
ConvexityVerdict is_strictly_convex_boundary(const ConformalMetric<N>& metric,
                                             int samples = 256) {
  ConvexityVerdict v;
  v.min_eigenvalue = std::numeric_limits<double>::infinity();
  if constexpr (N == 2) {
    for (int k = 0; k < samples; ++k) {
      Vec2 xb = metric.domain.boundary_point(Vec<1>(2.0 * M_PI * k / samples));
      v.min_eigenvalue = std::min(v.min_eigenvalue,
                                  second_fundamental_form(metric, xb).s(0, 0));
    }
  } else {
    int nt = static_cast<int>(std::sqrt(double(samples))) + 1;
    for (int i = 0; i < nt; ++i)
      for (int j = 1; j < nt; ++j) {
        Vec3 xb = metric.domain.boundary_point(
            Vec2(2.0 * M_PI * i / nt, M_PI * j / nt));
        v.min_eigenvalue = std::min(
            v.min_eigenvalue,
            second_fundamental_form(metric, xb).min_eigenvalue());
      }
  }
  v.convex = v.min_eigenvalue > 0.0;
  return v;
}

struct FoliationCandidate {
  ScalarField2 f;
  std::string description;
};

struct FoliationReport {
  bool convex_along_geodesics = false;
  double min_second_derivative = 0.0;
  int geodesics_checked = 0;
  double epsilon = 1e-6;
};

// Second differences of f along integrated geodesics, nominal step 1e-3 in
// g-time snapped to the integrator grid; passes iff the minimum over sampled
// geodesics and interior times stays >= epsilon.
FoliationReport convexity_check_function(const ConformalMetric2& metric,
                                         const FoliationCandidate& cand,
                                         int boundary_samples = 16,
                                         int fan_per_sample = 9,
                                         double epsilon = 1e-6);

// Exact g-Hessian quadratic form of f at x in direction w (test oracle):
// Hess_g f (w,w) = w^T Hess_e f w + (2 (grad c . w)(grad f . w)
//                  - (w.w)(grad c . grad f)) / c.
double hessian_g_quadratic(const ConformalMetric2& metric,
                           const ScalarField2& f, const Vec2& x,
                           const Vec2& w);

} // namespace elab
