#include "elab/wave.hpp"

#include <cmath>
#include <vector>

namespace elab {

// Free-space 3D staggered update on a homogeneous cube.  Exercised by a smoke
// run only: a velocity bump must spread at bounded energy and stay finite.
Wave3DSmoke wave3d_smoke(int nodes, int steps) {
  if (nodes < 16) throw ConfigError("3d smoke grid needs >= 16 nodes");
  const int n = nodes;
  const double lam = 1.0, mu = 1.0, rho = 1.0;
  const double L = 2.0, h = L / (n - 1);
  const double cp = std::sqrt((lam + 2.0 * mu) / rho);
  const double dt = 0.35 * h / cp;
  const double C1 = 9.0 / (8.0 * h), C2 = -1.0 / (24.0 * h);

  const size_t total = static_cast<size_t>(n) * n * n;
  auto idx = [n](int i, int j, int k) {
    return (static_cast<size_t>(i) * n + j) * n + k;
  };
  std::vector<double> vx(total, 0.0), vy(total, 0.0), vz(total, 0.0);
  std::vector<double> sxx(total, 0.0), syy(total, 0.0), szz(total, 0.0);
  std::vector<double> sxy(total, 0.0), sxz(total, 0.0), syz(total, 0.0);

  const double w = 4.0 * h;
  const double c0 = 0.5 * L;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double dx = (i + 0.5) * h - c0, dy = j * h - c0, dz = k * h - c0;
        vx[idx(i, j, k)] =
            std::exp(-0.5 * (dx * dx + dy * dy + dz * dz) / (w * w));
      }

  auto energy = [&]() {
    double kin = 0.0, strain = 0.0;
    for (size_t q = 0; q < total; ++q)
      kin += vx[q] * vx[q] + vy[q] * vy[q] + vz[q] * vz[q];
    kin *= 0.5 * rho;
    // (1/2) s : C^-1 s = (s:s)/(4 mu) - lam (tr s)^2 / (4 mu (3 lam + 2 mu))
    for (size_t q = 0; q < total; ++q) {
      double tr = sxx[q] + syy[q] + szz[q];
      double ss = sxx[q] * sxx[q] + syy[q] * syy[q] + szz[q] * szz[q] +
                  2.0 * (sxy[q] * sxy[q] + sxz[q] * sxz[q] + syz[q] * syz[q]);
      strain += ss / (4.0 * mu) -
                lam * tr * tr / (4.0 * mu * (3.0 * lam + 2.0 * mu));
    }
    return (kin + strain) * h * h * h;
  };

  Wave3DSmoke out;
  out.energy_initial = energy();

  const int m = 3;  // stencil margin
  for (int step = 0; step < steps; ++step) {
    for (int i = m; i < n - m; ++i)
      for (int j = m; j < n - m; ++j)
        for (int k = m; k < n - m; ++k) {
          size_t q = idx(i, j, k);
          vx[q] += (dt / rho) *
                   (C1 * (sxx[idx(i + 1, j, k)] - sxx[q]) +
                    C2 * (sxx[idx(i + 2, j, k)] - sxx[idx(i - 1, j, k)]) +
                    C1 * (sxy[q] - sxy[idx(i, j - 1, k)]) +
                    C2 * (sxy[idx(i, j + 1, k)] - sxy[idx(i, j - 2, k)]) +
                    C1 * (sxz[q] - sxz[idx(i, j, k - 1)]) +
                    C2 * (sxz[idx(i, j, k + 1)] - sxz[idx(i, j, k - 2)]));
          vy[q] += (dt / rho) *
                   (C1 * (sxy[q] - sxy[idx(i - 1, j, k)]) +
                    C2 * (sxy[idx(i + 1, j, k)] - sxy[idx(i - 2, j, k)]) +
                    C1 * (syy[idx(i, j + 1, k)] - syy[q]) +
                    C2 * (syy[idx(i, j + 2, k)] - syy[idx(i, j - 1, k)]) +
                    C1 * (syz[q] - syz[idx(i, j, k - 1)]) +
                    C2 * (syz[idx(i, j, k + 1)] - syz[idx(i, j, k - 2)]));
          vz[q] += (dt / rho) *
                   (C1 * (sxz[q] - sxz[idx(i - 1, j, k)]) +
                    C2 * (sxz[idx(i + 1, j, k)] - sxz[idx(i - 2, j, k)]) +
                    C1 * (syz[q] - syz[idx(i, j - 1, k)]) +
                    C2 * (syz[idx(i, j + 1, k)] - syz[idx(i, j - 2, k)]) +
                    C1 * (szz[idx(i, j, k + 1)] - szz[q]) +
                    C2 * (szz[idx(i, j, k + 2)] - szz[idx(i, j, k - 1)]));
        }
    for (int i = m; i < n - m; ++i)
      for (int j = m; j < n - m; ++j)
        for (int k = m; k < n - m; ++k) {
          size_t q = idx(i, j, k);
          double dxvx = C1 * (vx[q] - vx[idx(i - 1, j, k)]) +
                        C2 * (vx[idx(i + 1, j, k)] - vx[idx(i - 2, j, k)]);
          double dyvy = C1 * (vy[q] - vy[idx(i, j - 1, k)]) +
                        C2 * (vy[idx(i, j + 1, k)] - vy[idx(i, j - 2, k)]);
          double dzvz = C1 * (vz[q] - vz[idx(i, j, k - 1)]) +
                        C2 * (vz[idx(i, j, k + 1)] - vz[idx(i, j, k - 2)]);
          double div = dxvx + dyvy + dzvz;
          sxx[q] += dt * (lam * div + 2.0 * mu * dxvx);
          syy[q] += dt * (lam * div + 2.0 * mu * dyvy);
          szz[q] += dt * (lam * div + 2.0 * mu * dzvz);
          sxy[q] += dt * mu *
                    (C1 * (vx[idx(i, j + 1, k)] - vx[q]) +
                     C2 * (vx[idx(i, j + 2, k)] - vx[idx(i, j - 1, k)]) +
                     C1 * (vy[idx(i + 1, j, k)] - vy[q]) +
                     C2 * (vy[idx(i + 2, j, k)] - vy[idx(i - 1, j, k)]));
          sxz[q] += dt * mu *
                    (C1 * (vx[idx(i, j, k + 1)] - vx[q]) +
                     C2 * (vx[idx(i, j, k + 2)] - vx[idx(i, j, k - 1)]) +
                     C1 * (vz[idx(i + 1, j, k)] - vz[q]) +
                     C2 * (vz[idx(i + 2, j, k)] - vz[idx(i - 1, j, k)]));
          syz[q] += dt * mu *
                    (C1 * (vy[idx(i, j, k + 1)] - vy[q]) +
                     C2 * (vy[idx(i, j, k + 2)] - vy[idx(i, j, k - 1)]) +
                     C1 * (vz[idx(i, j + 1, k)] - vz[q]) +
                     C2 * (vz[idx(i, j + 2, k)] - vz[idx(i, j - 1, k)]));
        }
  }

  out.energy_final = energy();
  out.finite = std::isfinite(out.energy_final);

  double mass = 0.0, wr2 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        size_t q = idx(i, j, k);
        double v2 = vx[q] * vx[q] + vy[q] * vy[q] + vz[q] * vz[q];
        double dx = (i + 0.5) * h - c0, dy = j * h - c0, dz = k * h - c0;
        mass += v2;
        wr2 += v2 * (dx * dx + dy * dy + dz * dz);
      }
  out.front_radius = mass > 0.0 ? std::sqrt(wr2 / mass) : 0.0;
  return out;
}

} // namespace elab
