#pragma once

// Fast-marching solver for |grad t| = s(x) on a masked nodal grid, first-order
// Godunov upwind with second-order one-sided upgrades where two accepted
// neighbors line up.  Every accepted node records the exact linearization of
// its update (coefficients w.r.t. upstream times and local slowness), so
// directional derivatives and adjoints of the discrete solution are a single
// forward or reverse sweep over the acceptance order.  2D.

#include <cstdint>
#include <vector>

#include "elab/domain.hpp"
#include "elab/errors.hpp"
#include "elab/grid.hpp"
#include "elab/scalar_field.hpp"

namespace elab {

struct EikonalGrid {
  Grid2 grid;
  Domain2 domain;
  std::vector<int32_t> dense_of;  // grid linear index -> dense index or -1
  std::vector<long> node_of;      // dense index -> grid linear index
  int nx = 0, ny = 0;

  int dense(long gx, long gy) const { return dense_of[gx * ny + gy]; }
  long count() const { return static_cast<long>(node_of.size()); }
  Vec2 point(long dense_idx) const {
    long l = node_of[dense_idx];
    return grid.point({static_cast<int>(l / ny), static_cast<int>(l % ny)});
  }
};

// Nodes with signed distance below `collar` (default 1.5h) are kept, so
// boundary reads interpolate across the boundary instead of extrapolating.
EikonalGrid make_eikonal_grid(const Domain2& dom, int nodes_major,
                              double collar_factor = 1.5);

// Exact linearization of one accepted node's update.
struct EikonalDep {
  int n_t = 0;
  int32_t t_nodes[4];
  double t_coefs[4];
  int n_s = 0;
  int32_t s_nodes[5];
  double s_coefs[5];
};

struct EikonalField {
  const EikonalGrid* geom = nullptr;
  Vec2 source;
  VecX t;                        // dense travel times
  std::vector<int32_t> order;    // acceptance order (dense indices)
  std::vector<EikonalDep> deps;  // aligned with dense indices

  // J v and J^T u for the map (slowness vector) -> (dense time vector).
  void tangent(const VecX& ds, VecX& dt) const;
  void adjoint(const VecX& tbar, VecX& sbar) const;
};

// Linear functional reading t at an arbitrary point by bilinear interpolation
// over masked nodes (weights renormalized if the cell is clipped).
struct TimeProbe {
  int n = 0;
  int32_t nodes[4];
  double w[4];

  double apply(const VecX& t) const {
    double v = 0.0;
    for (int k = 0; k < n; ++k) v += w[k] * t[nodes[k]];
    return v;
  }
};

TimeProbe make_time_probe(const EikonalGrid& geom, const Vec2& p);

// Slowness samples at masked nodes from a speed field.
VecX sample_slowness(const EikonalGrid& geom, const ScalarField2& speed);

// source may sit on the boundary; nodes within init_radius_factor*h get the
// exact two-point-trapezoid initialization t = |x-z| (s(x)+s(z))/2.
EikonalField eikonal_solve(const EikonalGrid& geom, const VecX& slowness,
                           const Vec2& source,
                           double init_radius_factor = 4.0);

} // namespace elab
