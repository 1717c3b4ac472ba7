#pragma once

// Isotropic elasticity built from Lame parameter fields: stiffness tensors,
// Christoffel matrices, body wave speeds, pointwise stability constraints,
// and the smooth extension of material fields past the domain boundary that
// the embedded-boundary wave solver samples.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "elab/domain.hpp"
#include "elab/errors.hpp"
#include "elab/scalar_field.hpp"

namespace elab {

// Pointwise isotropic stiffness c_ijkl = lam d_ij d_kl + mu (d_ik d_jl +
// d_il d_jk), stored by its two moduli.
template <int N>
struct StiffnessTensor {
  double lam = 0.0;
  double mu = 0.0;

  double component(int i, int j, int k, int l) const {
    auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    return lam * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
  }

  // Stress from a displacement gradient: sigma_ij = c_ijkl g_kl.
  Mat<N> apply(const Mat<N>& g) const {
    return lam * g.trace() * Mat<N>::Identity() + mu * (g + g.transpose());
  }

  // c(A, A) = lam tr(A)^2 + 2 mu |sym A|^2.
  double quadratic_form(const Mat<N>& a) const {
    Mat<N> s = 0.5 * (a + a.transpose());
    double t = a.trace();
    return lam * t * t + 2.0 * mu * s.squaredNorm();
  }
};

// Boundary traction of a displacement gradient: (C : sym grad u) nu.
template <int N>
Vec<N> traction(const StiffnessTensor<N>& c, const Mat<N>& grad_u,
                const Vec<N>& nu) {
  return c.apply(grad_u) * nu;
}

// Pointwise triplet and its derived quantities.
struct LameTriplet {
  double lam = 0.0;
  double mu = 0.0;
  double rho = 0.0;
};

// Strong convexity on symmetric matrices requires mu > 0 and N lam + 2 mu > 0;
// rho > 0 makes the wave operator hyperbolic.  The sharp constant in
// c(A, A) >= kappa |A|^2 over symmetric A is min(2 mu, N lam + 2 mu).
template <int N>
bool is_admissible(const LameTriplet& t) {
  return t.rho > 0.0 && t.mu > 0.0 && N * t.lam + 2.0 * t.mu > 0.0;
}

template <int N>
double sharp_convexity_constant(const LameTriplet& t) {
  return std::min(2.0 * t.mu, N * t.lam + 2.0 * t.mu);
}

inline double pressure_speed(const LameTriplet& t) {
  return std::sqrt((t.lam + 2.0 * t.mu) / t.rho);
}
inline double shear_speed(const LameTriplet& t) {
  return std::sqrt(t.mu / t.rho);
}

// Christoffel matrix rho^{-1} c_ijkl xi_j xi_k; eigenvalues are c_p^2 |xi|^2
// (eigenvector xi) and c_s^2 |xi|^2 with multiplicity N-1.
template <int N>
Mat<N> christoffel_matrix(const LameTriplet& t, const Vec<N>& xi) {
  return ((t.lam + t.mu) * (xi * xi.transpose()) +
          t.mu * xi.squaredNorm() * Mat<N>::Identity()) /
         t.rho;
}

// Smooth material triplet over a domain.
template <int N>
struct LameField {
  Domain<N> domain;
  ScalarField<N> lambda;
  ScalarField<N> mu;
  ScalarField<N> rho;

  LameTriplet at(const Vec<N>& x) const {
    return {lambda.value(x), mu.value(x), rho.value(x)};
  }
  StiffnessTensor<N> stiffness_at(const Vec<N>& x) const {
    return {lambda.value(x), mu.value(x)};
  }

  ScalarField<N> pressure_speed_field() const {
    return sqrt((lambda + 2.0 * mu) / rho);
  }
  ScalarField<N> shear_speed_field() const {
    return sqrt(mu / rho);
  }
};

template <int N>
LameField<N> constant_lame_field(const Domain<N>& dom, double lam, double mu,
                                 double rho) {
  return {dom, ScalarField<N>::constant(lam), ScalarField<N>::constant(mu),
          ScalarField<N>::constant(rho)};
}

template <int N>
LameField<N> constant_lame_field(const Domain<N>& dom, const LameTriplet& t) {
  return constant_lame_field(dom, t.lam, t.mu, t.rho);
}

using LameField2 = LameField<2>;
using LameField3 = LameField<3>;

struct AdmissibilityReport {
  bool ok = true;
  double min_mu = 0.0;
  double min_rho = 0.0;
  double min_bulk = 0.0;  // min over samples of N lam + 2 mu
};

// Scans a node grid over the bounding box (interior nodes only) plus a ring of
// boundary samples.
template <int N>
AdmissibilityReport check_admissibility(const LameField<N>& f,
                                        int samples_per_axis = 64) {
  AdmissibilityReport r;
  r.min_mu = r.min_rho = r.min_bulk = std::numeric_limits<double>::infinity();
  auto visit = [&](const Vec<N>& x) {
    LameTriplet t = f.at(x);
    r.min_mu = std::min(r.min_mu, t.mu);
    r.min_rho = std::min(r.min_rho, t.rho);
    r.min_bulk = std::min(r.min_bulk, N * t.lam + 2.0 * t.mu);
  };
  Vec<N> lo, hi;
  f.domain.bounding_box(lo, hi);
  if constexpr (N == 2) {
    for (int i = 0; i < samples_per_axis; ++i)
      for (int j = 0; j < samples_per_axis; ++j) {
        Vec2 x(lo[0] + (hi[0] - lo[0]) * i / (samples_per_axis - 1.0),
               lo[1] + (hi[1] - lo[1]) * j / (samples_per_axis - 1.0));
        if (f.domain.inside(x)) visit(x);
      }
    for (int k = 0; k < 4 * samples_per_axis; ++k) {
      Vec<1> th(2.0 * M_PI * k / (4.0 * samples_per_axis));
      visit(f.domain.boundary_point(th));
    }
  } else {
    for (int i = 0; i < samples_per_axis; ++i)
      for (int j = 0; j < samples_per_axis; ++j)
        for (int k = 0; k < samples_per_axis; ++k) {
          Vec3 x(lo[0] + (hi[0] - lo[0]) * i / (samples_per_axis - 1.0),
                 lo[1] + (hi[1] - lo[1]) * j / (samples_per_axis - 1.0),
                 lo[2] + (hi[2] - lo[2]) * k / (samples_per_axis - 1.0));
          if (f.domain.inside(x)) visit(x);
        }
  }
  r.ok = r.min_mu > 0.0 && r.min_rho > 0.0 && r.min_bulk > 0.0;
  return r;
}

template <int N>
void require_admissible(const LameField<N>& f) {
  AdmissibilityReport r = check_admissibility(f);
  if (!r.ok)
    throw PhysicsError("material violates positivity: min mu=" +
                       std::to_string(r.min_mu) + " min rho=" +
                       std::to_string(r.min_rho) + " min (N lam + 2 mu)=" +
                       std::to_string(r.min_bulk));
}

// Extends a material field past the boundary by pulling exterior points back
// to their closest boundary point.  Interior values are untouched; exterior
// values are constant along boundary normals, which is all the ghost-node
// sampling of the wave solver needs.  Valid within `margin` of the boundary.
template <int N>
ScalarField<N> extend_past_boundary(const ScalarField<N>& f,
                                    const Domain<N>& dom, double margin) {
  auto ev = f.evaluator();
  return ScalarField<N>([ev, dom, margin](const Vec<N>& x) {
    if (dom.inside(x)) return ev(x);
    Vec<N> p = dom.closest_boundary_point(x);
    Jet<N> j = ev(p);
    j.g.setZero();
    j.h.setZero();
    return j;
  });
}

template <int N>
LameField<N> extend_lame_field(const LameField<N>& f, double margin) {
  return {f.domain, extend_past_boundary(f.lambda, f.domain, margin),
          extend_past_boundary(f.mu, f.domain, margin),
          extend_past_boundary(f.rho, f.domain, margin)};
}

struct JetMismatch {
  double value = 0.0;
  double gradient = 0.0;
  double hessian = 0.0;

  double up_to(int order) const {
    double m = value;
    if (order >= 1) m = std::max(m, gradient);
    if (order >= 2) m = std::max(m, hessian);
    return m;
  }
};

// Largest mismatch of the two triplets and their first two derivatives over
// boundary samples.  Used to test agreement of boundary jets.
template <int N>
JetMismatch boundary_jet_compare(const LameField<N>& a, const LameField<N>& b,
                                 int n_samples = 256) {
  JetMismatch m;
  const ScalarField<N>* fa[3] = {&a.lambda, &a.mu, &a.rho};
  const ScalarField<N>* fb[3] = {&b.lambda, &b.mu, &b.rho};
  auto compare_at = [&](const Vec<N>& x) {
    for (int c = 0; c < 3; ++c) {
      Jet<N> ja = fa[c]->jet(x), jb = fb[c]->jet(x);
      m.value = std::max(m.value, std::abs(ja.v - jb.v));
      m.gradient =
          std::max(m.gradient, (ja.g - jb.g).template lpNorm<Eigen::Infinity>());
      m.hessian =
          std::max(m.hessian, (ja.h - jb.h).template lpNorm<Eigen::Infinity>());
    }
  };
  if constexpr (N == 2) {
    for (int k = 0; k < n_samples; ++k)
      compare_at(a.domain.boundary_point(Vec<1>(2.0 * M_PI * k / n_samples)));
  } else {
    int nt = static_cast<int>(std::sqrt(double(n_samples))) + 1;
    for (int i = 0; i < nt; ++i)
      for (int j = 1; j < nt; ++j)
        compare_at(a.domain.boundary_point(
            Vec2(2.0 * M_PI * i / nt, M_PI * j / nt)));
  }
  return m;
}

} // namespace elab
