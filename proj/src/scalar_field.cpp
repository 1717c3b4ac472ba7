#include "elab/scalar_field.hpp"

#include <algorithm>
#include <cmath>

namespace elab {

namespace {

struct CubicWeights {
  double w[4], d1[4], d2[4];
};

// Catmull-Rom segment weights for samples p_{-1}..p_2 at local t in [0,1].
CubicWeights catmull_rom(double t) {
  CubicWeights cw;
  double t2 = t * t, t3 = t2 * t;
  cw.w[0] = -0.5 * t + t2 - 0.5 * t3;
  cw.w[1] = 1.0 - 2.5 * t2 + 1.5 * t3;
  cw.w[2] = 0.5 * t + 2.0 * t2 - 1.5 * t3;
  cw.w[3] = -0.5 * t2 + 0.5 * t3;
  cw.d1[0] = -0.5 + 2.0 * t - 1.5 * t2;
  cw.d1[1] = -5.0 * t + 4.5 * t2;
  cw.d1[2] = 0.5 + 4.0 * t - 4.5 * t2;
  cw.d1[3] = -t + 1.5 * t2;
  cw.d2[0] = 2.0 - 3.0 * t;
  cw.d2[1] = -5.0 + 9.0 * t;
  cw.d2[2] = 4.0 - 9.0 * t;
  cw.d2[3] = -1.0 + 3.0 * t;
  return cw;
}

} // namespace

ScalarField<2> make_grid_field(std::shared_ptr<const MatX> samples,
                               const Vec2& origin, double spacing) {
  return ScalarField<2>([samples, origin, spacing](const Vec2& x) {
    const MatX& p = *samples;
    const long nx = p.rows(), ny = p.cols();
    double fx = (x[0] - origin[0]) / spacing;
    double fy = (x[1] - origin[1]) / spacing;
    long ix = std::clamp(static_cast<long>(std::floor(fx)), 0L, nx - 2);
    long iy = std::clamp(static_cast<long>(std::floor(fy)), 0L, ny - 2);
    CubicWeights cx = catmull_rom(fx - ix);
    CubicWeights cy = catmull_rom(fy - iy);
    auto at = [&](long a, long b) {
      return p(std::clamp(ix + a - 1, 0L, nx - 1),
               std::clamp(iy + b - 1, 0L, ny - 1));
    };
    double v = 0.0, gx = 0.0, gy = 0.0, hxx = 0.0, hxy = 0.0, hyy = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double pv = at(a, b);
        v += cx.w[a] * cy.w[b] * pv;
        gx += cx.d1[a] * cy.w[b] * pv;
        gy += cx.w[a] * cy.d1[b] * pv;
        hxx += cx.d2[a] * cy.w[b] * pv;
        hxy += cx.d1[a] * cy.d1[b] * pv;
        hyy += cx.w[a] * cy.d2[b] * pv;
      }
    Jet2 j(v);
    j.g = Vec2(gx, gy) / spacing;
    j.h << hxx, hxy, hxy, hyy;
    j.h /= spacing * spacing;
    return j;
  });
}

} // namespace elab
