#pragma once

// Second-order forward-mode values: a scalar together with its gradient and
// Hessian with respect to an N-dimensional evaluation point.  Field
// expressions built from these propagate exact derivatives, so downstream
// geometry (Christoffel terms, Jacobi systems, shape operators) never touches
// finite differences.

#include <cmath>

#include "elab/types.hpp"

namespace elab {

template <int N>
struct Jet {
  double v = 0.0;
  Vec<N> g = Vec<N>::Zero();
  Mat<N> h = Mat<N>::Zero();

  Jet() = default;
  explicit Jet(double value) : v(value) {}
  Jet(double value, const Vec<N>& grad, const Mat<N>& hess)
      : v(value), g(grad), h(hess) {}

  static Jet constant(double value) { return Jet(value); }

  // Jet of the i-th coordinate function evaluated at x_i = value.
  static Jet coordinate(double value, int i) {
    Jet j(value);
    j.g[i] = 1.0;
    return j;
  }

  Jet operator-() const { return Jet(-v, -g, -h); }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    g += o.g;
    h += o.h;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    g -= o.g;
    h -= o.h;
    return *this;
  }
};

template <int N>
Jet<N> operator+(const Jet<N>& a, const Jet<N>& b) {
  return {a.v + b.v, a.g + b.g, a.h + b.h};
}
template <int N>
Jet<N> operator-(const Jet<N>& a, const Jet<N>& b) {
  return {a.v - b.v, a.g - b.g, a.h - b.h};
}
template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Mat<N> cross = a.g * b.g.transpose();
  return {a.v * b.v, a.v * b.g + b.v * a.g,
          a.v * b.h + b.v * a.h + cross + cross.transpose()};
}
template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
  double iv = 1.0 / b.v;
  double q = a.v * iv;
  Vec<N> qg = (a.g - q * b.g) * iv;
  Mat<N> cross = qg * b.g.transpose();
  Mat<N> qh = (a.h - q * b.h - cross - cross.transpose()) * iv;
  return {q, qg, qh};
}

template <int N>
Jet<N> operator+(const Jet<N>& a, double s) {
  return {a.v + s, a.g, a.h};
}
template <int N>
Jet<N> operator+(double s, const Jet<N>& a) {
  return a + s;
}
template <int N>
Jet<N> operator-(const Jet<N>& a, double s) {
  return {a.v - s, a.g, a.h};
}
template <int N>
Jet<N> operator-(double s, const Jet<N>& a) {
  return {s - a.v, -a.g, -a.h};
}
template <int N>
Jet<N> operator*(const Jet<N>& a, double s) {
  return {a.v * s, a.g * s, a.h * s};
}
template <int N>
Jet<N> operator*(double s, const Jet<N>& a) {
  return a * s;
}
template <int N>
Jet<N> operator/(const Jet<N>& a, double s) {
  return a * (1.0 / s);
}
template <int N>
Jet<N> operator/(double s, const Jet<N>& a) {
  return Jet<N>(s) / a;
}

// Chain rule for f(u): value f, first derivative d1, second derivative d2.
template <int N>
Jet<N> apply_chain(const Jet<N>& u, double f, double d1, double d2) {
  return {f, d1 * u.g, d1 * u.h + d2 * (u.g * u.g.transpose())};
}

template <int N>
Jet<N> sqrt(const Jet<N>& u) {
  double r = std::sqrt(u.v);
  return apply_chain(u, r, 0.5 / r, -0.25 / (r * u.v));
}
template <int N>
Jet<N> exp(const Jet<N>& u) {
  double e = std::exp(u.v);
  return apply_chain(u, e, e, e);
}
template <int N>
Jet<N> log(const Jet<N>& u) {
  double iv = 1.0 / u.v;
  return apply_chain(u, std::log(u.v), iv, -iv * iv);
}
template <int N>
Jet<N> pow(const Jet<N>& u, int k) {
  double p2 = (k >= 2) ? std::pow(u.v, k - 2) : std::pow(u.v, double(k - 2));
  return apply_chain(u, p2 * u.v * u.v, k * p2 * u.v, double(k) * (k - 1) * p2);
}

using Jet2 = Jet<2>;
using Jet3 = Jet<3>;

} // namespace elab
