#pragma once

// Smooth scalar fields over R^N evaluated as second-order jets.  Fields
// compose through arithmetic operators, so a wave-speed field like
// sqrt((lam + 2*mu)/rho) carries exact gradients and Hessians wherever the
// ingredients do.

#include <functional>
#include <memory>
#include <utility>

#include "elab/jet.hpp"

namespace elab {

template <int N>
class ScalarField {
 public:
  using Evaluator = std::function<Jet<N>(const Vec<N>&)>;

  ScalarField() : eval_(nullptr) {}
  explicit ScalarField(Evaluator eval) : eval_(std::move(eval)) {}

  static ScalarField constant(double v) {
    return ScalarField([v](const Vec<N>&) { return Jet<N>(v); });
  }

  // alpha + beta * |x - center|^2
  static ScalarField radial_quadratic(double alpha, double beta,
                                      const Vec<N>& center = Vec<N>::Zero()) {
    return ScalarField([=](const Vec<N>& x) {
      Vec<N> d = x - center;
      Jet<N> j(alpha + beta * d.squaredNorm());
      j.g = 2.0 * beta * d;
      j.h = 2.0 * beta * Mat<N>::Identity();
      return j;
    });
  }

  // amplitude * ((1 - |x-center|^2/radius^2)_+)^power, compactly supported,
  // C^{power-1} across the support boundary.
  static ScalarField bump(double amplitude, const Vec<N>& center, double radius,
                          int power = 4) {
    return ScalarField([=](const Vec<N>& x) {
      Vec<N> d = x - center;
      double q = 1.0 - d.squaredNorm() / (radius * radius);
      if (q <= 0.0) return Jet<N>(0.0);
      Jet<N> jq(q, -2.0 / (radius * radius) * d,
                -2.0 / (radius * radius) * Mat<N>::Identity());
      return amplitude * pow(jq, power);
    });
  }

  bool valid() const { return static_cast<bool>(eval_); }

  Jet<N> jet(const Vec<N>& x) const { return eval_(x); }
  double value(const Vec<N>& x) const { return eval_(x).v; }
  Vec<N> gradient(const Vec<N>& x) const { return eval_(x).g; }
  Mat<N> hessian(const Vec<N>& x) const { return eval_(x).h; }

  const Evaluator& evaluator() const { return eval_; }

 private:
  Evaluator eval_;
};

template <int N>
ScalarField<N> operator+(const ScalarField<N>& a, const ScalarField<N>& b) {
  auto fa = a.evaluator(), fb = b.evaluator();
  return ScalarField<N>([fa, fb](const Vec<N>& x) { return fa(x) + fb(x); });
}
template <int N>
ScalarField<N> operator-(const ScalarField<N>& a, const ScalarField<N>& b) {
  auto fa = a.evaluator(), fb = b.evaluator();
  return ScalarField<N>([fa, fb](const Vec<N>& x) { return fa(x) - fb(x); });
}
template <int N>
ScalarField<N> operator*(const ScalarField<N>& a, const ScalarField<N>& b) {
  auto fa = a.evaluator(), fb = b.evaluator();
  return ScalarField<N>([fa, fb](const Vec<N>& x) { return fa(x) * fb(x); });
}
template <int N>
ScalarField<N> operator/(const ScalarField<N>& a, const ScalarField<N>& b) {
  auto fa = a.evaluator(), fb = b.evaluator();
  return ScalarField<N>([fa, fb](const Vec<N>& x) { return fa(x) / fb(x); });
}
template <int N>
ScalarField<N> operator*(double s, const ScalarField<N>& a) {
  auto fa = a.evaluator();
  return ScalarField<N>([fa, s](const Vec<N>& x) { return s * fa(x); });
}
template <int N>
ScalarField<N> operator*(const ScalarField<N>& a, double s) {
  return s * a;
}
template <int N>
ScalarField<N> operator+(const ScalarField<N>& a, double s) {
  auto fa = a.evaluator();
  return ScalarField<N>([fa, s](const Vec<N>& x) { return fa(x) + s; });
}
template <int N>
ScalarField<N> operator+(double s, const ScalarField<N>& a) {
  return a + s;
}

template <int N>
ScalarField<N> sqrt(const ScalarField<N>& a) {
  auto fa = a.evaluator();
  return ScalarField<N>([fa](const Vec<N>& x) { return sqrt(fa(x)); });
}
template <int N>
ScalarField<N> log(const ScalarField<N>& a) {
  auto fa = a.evaluator();
  return ScalarField<N>([fa](const Vec<N>& x) { return log(fa(x)); });
}

// Bicubic Catmull-Rom interpolant of nodal samples on a uniform 2D grid.
// Interpolates the samples exactly and is C^1; the Hessian is the second
// derivative of the local cubic patch.  Edge cells clamp the stencil.
ScalarField<2> make_grid_field(std::shared_ptr<const MatX> samples,
                               const Vec2& origin, double spacing);

using ScalarField2 = ScalarField<2>;
using ScalarField3 = ScalarField<3>;

} // namespace elab
