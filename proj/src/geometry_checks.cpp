#include "elab/geometry_checks.hpp"

#include <cmath>

namespace elab {

FoliationReport convexity_check_function(const ConformalMetric2& metric,
                                         const FoliationCandidate& cand,
                                         int boundary_samples,
                                         int fan_per_sample, double epsilon) {
  FoliationReport rep;
  rep.epsilon = epsilon;
  rep.min_second_derivative = std::numeric_limits<double>::infinity();
  double step = metric.default_step();
  int j = std::max(1, static_cast<int>(std::lround(1e-3 / step)));
  double delta = j * step;

  for (int i = 0; i < boundary_samples; ++i) {
    double theta = 2.0 * M_PI * i / boundary_samples;
    Vec2 z = metric.domain.boundary_point(Vec<1>(theta));
    Vec2 nu = metric.domain.outward_normal(z);
    Vec2 tangent(-nu[1], nu[0]);
    for (int k = 0; k < fan_per_sample; ++k) {
      double alpha =
          -0.5 * M_PI + 0.05 + (M_PI - 0.1) * k / (fan_per_sample - 1.0);
      Vec2 dir = std::cos(alpha) * (-nu) + std::sin(alpha) * tangent;
      ExitRecord<2> rec = trace_exit(metric, z, dir);
      if (!rec.entered || rec.possibly_trapped) continue;
      GeodesicPath<2> path = shoot(metric, z, metric.unit_g(z, dir), rec.tau);
      ++rep.geodesics_checked;
      const auto& s = path.samples;
      for (size_t q = j; q + j < s.size(); ++q) {
        // The final sample sits on a refined fractional step; only uniform
        // stencils are valid.
        if (std::abs((s[q].t - s[q - j].t) - delta) > 1e-9 * delta ||
            std::abs((s[q + j].t - s[q].t) - delta) > 1e-9 * delta)
          continue;
        double d2 = (cand.f.value(s[q + j].x) - 2.0 * cand.f.value(s[q].x) +
                     cand.f.value(s[q - j].x)) /
                    (delta * delta);
        rep.min_second_derivative = std::min(rep.min_second_derivative, d2);
      }
    }
  }
  rep.convex_along_geodesics = rep.min_second_derivative >= epsilon;
  return rep;
}

double hessian_g_quadratic(const ConformalMetric2& metric,
                           const ScalarField2& f, const Vec2& x,
                           const Vec2& w) {
  Jet2 jf = f.jet(x);
  Jet2 jc = metric.speed.jet(x);
  double base = w.dot(jf.h * w);
  double corr = (2.0 * jc.g.dot(w) * jf.g.dot(w) -
                 w.squaredNorm() * jc.g.dot(jf.g)) /
                jc.v;
  return base + corr;
}

} // namespace elab
