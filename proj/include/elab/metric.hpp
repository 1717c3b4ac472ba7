#pragma once

// Conformally Euclidean metrics g = c^{-2} delta given by a positive speed
// field c on a box enlarged past the domain.  The conformal factor is
// e^{2 phi} with phi = -log c.

#include <array>
#include <cmath>
#include <limits>

#include "elab/domain.hpp"
#include "elab/errors.hpp"
#include "elab/scalar_field.hpp"

namespace elab {

template <int N>
struct ConformalMetric {
  ScalarField<N> speed;
  Domain<N> domain;
  double min_speed = 0.0;   // over the enlarged box, sampled
  double max_speed = 0.0;
  // The round-sphere chart metric is invariant under x -> x/|x|^2; the
  // conjugate-point scan may switch charts through that inversion.
  bool inversion_symmetric = false;

  static ConformalMetric make(ScalarField<N> c, const Domain<N>& dom,
                              double margin = 0.1) {
    ConformalMetric m;
    m.speed = std::move(c);
    m.domain = dom;
    Vec<N> lo, hi;
    dom.bounding_box(lo, hi, margin);
    m.min_speed = std::numeric_limits<double>::infinity();
    m.max_speed = 0.0;
    const int K = 48;
    std::array<int, N> idx{};
    for (long l = 0; l < static_cast<long>(std::pow(K, N)); ++l) {
      long r = l;
      Vec<N> x;
      for (int d = 0; d < N; ++d) {
        x[d] = lo[d] + (hi[d] - lo[d]) * (r % K) / (K - 1.0);
        r /= K;
      }
      double v = m.speed.value(x);
      m.min_speed = std::min(m.min_speed, v);
      m.max_speed = std::max(m.max_speed, v);
    }
    (void)idx;
    if (m.min_speed <= 0.0)
      throw PhysicsError("speed field not positive on the enlarged box");
    return m;
  }

  double g_norm(const Vec<N>& x, const Vec<N>& v) const {
    return v.norm() / speed.value(x);
  }

  // Rescales v to unit g-length, i.e. Euclidean length c(x).
  Vec<N> unit_g(const Vec<N>& x, const Vec<N>& v) const {
    return v * (speed.value(x) / v.norm());
  }

  // Default integrator step in g-time.
  double default_step() const {
    return domain.diameter_euclidean() / (4000.0 * max_speed);
  }

  double trapping_cap() const {
    return 20.0 * domain.diameter_euclidean() / min_speed;
  }
};

using ConformalMetric2 = ConformalMetric<2>;
using ConformalMetric3 = ConformalMetric<3>;

} // namespace elab
