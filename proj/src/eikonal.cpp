#include "elab/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace elab {

EikonalGrid make_eikonal_grid(const Domain2& dom, int nodes_major,
                              double collar_factor) {
  EikonalGrid g;
  g.domain = dom;
  Vec2 lo, hi;
  double pre_h = dom.diameter_euclidean() / (nodes_major - 1.0);
  dom.bounding_box(lo, hi, 2.0 * collar_factor * pre_h);
  g.grid = Grid2::covering(lo, hi, nodes_major);
  g.nx = g.grid.dims[0];
  g.ny = g.grid.dims[1];
  double collar = collar_factor * g.grid.h;
  g.dense_of.assign(static_cast<size_t>(g.nx) * g.ny, -1);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      Vec2 x = g.grid.point({i, j});
      if (dom.signed_distance(x) < collar) {
        g.dense_of[static_cast<long>(i) * g.ny + j] =
            static_cast<int32_t>(g.node_of.size());
        g.node_of.push_back(static_cast<long>(i) * g.ny + j);
      }
    }
  return g;
}

VecX sample_slowness(const EikonalGrid& geom, const ScalarField2& speed) {
  VecX s(geom.count());
  for (long k = 0; k < geom.count(); ++k) {
    double c = speed.value(geom.point(k));
    if (c <= 0.0) throw PhysicsError("non-positive speed at a grid node");
    s[k] = 1.0 / c;
  }
  return s;
}

TimeProbe make_time_probe(const EikonalGrid& geom, const Vec2& p) {
  TimeProbe probe;
  double fx = (p[0] - geom.grid.origin[0]) / geom.grid.h;
  double fy = (p[1] - geom.grid.origin[1]) / geom.grid.h;
  long ix = std::clamp(static_cast<long>(std::floor(fx)), 0L,
                       static_cast<long>(geom.nx) - 2);
  long iy = std::clamp(static_cast<long>(std::floor(fy)), 0L,
                       static_cast<long>(geom.ny) - 2);
  double tx = fx - ix, ty = fy - iy;
  double w[4] = {(1 - tx) * (1 - ty), (1 - tx) * ty, tx * (1 - ty), tx * ty};
  long nodes[4][2] = {{ix, iy}, {ix, iy + 1}, {ix + 1, iy}, {ix + 1, iy + 1}};
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    int32_t d = geom.dense(nodes[k][0], nodes[k][1]);
    if (d < 0 || w[k] == 0.0) continue;
    probe.nodes[probe.n] = d;
    probe.w[probe.n] = w[k];
    total += w[k];
    ++probe.n;
  }
  if (probe.n == 0) {
    // Fall back to the nearest masked node.
    double best = std::numeric_limits<double>::infinity();
    int32_t best_d = -1;
    for (long k = 0; k < geom.count(); ++k) {
      double d2 = (geom.point(k) - p).squaredNorm();
      if (d2 < best) {
        best = d2;
        best_d = static_cast<int32_t>(k);
      }
    }
    probe.nodes[0] = best_d;
    probe.w[0] = 1.0;
    probe.n = 1;
    return probe;
  }
  for (int k = 0; k < probe.n; ++k) probe.w[k] /= total;
  return probe;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Solve {
  double t = kInf;
  double W = 0.0;    // sum w_d (t - a_d), for the derivative coefficients
  int n_axes = 0;
  struct Axis {
    double a;        // effective upwind value
    double w;        // 1 / h_eff^2
    int32_t n1, n2;  // n2 < 0 for first-order
  } axes[2];
};

// Godunov update from accepted neighbors only.
Solve local_solve(const EikonalGrid& geom, const std::vector<uint8_t>& acc,
                  const VecX& t, long gx, long gy, double s) {
  const double h = geom.grid.h;
  Solve out;
  Solve::Axis cand[2];
  int n = 0;
  const long dirs[2][2] = {{1, 0}, {0, 1}};
  for (int d = 0; d < 2; ++d) {
    double best = kInf;
    int32_t b1 = -1, b2 = -1;
    for (int side = -1; side <= 1; side += 2) {
      long nx1 = gx + side * dirs[d][0], ny1 = gy + side * dirs[d][1];
      if (nx1 < 0 || ny1 < 0 || nx1 >= geom.nx || ny1 >= geom.ny) continue;
      int32_t d1 = geom.dense(nx1, ny1);
      if (d1 < 0 || !acc[d1]) continue;
      if (t[d1] < best) {
        best = t[d1];
        b1 = d1;
        b2 = -1;
        long nx2 = gx + 2 * side * dirs[d][0], ny2 = gy + 2 * side * dirs[d][1];
        if (nx2 >= 0 && ny2 >= 0 && nx2 < geom.nx && ny2 < geom.ny) {
          int32_t dd2 = geom.dense(nx2, ny2);
          if (dd2 >= 0 && acc[dd2] && t[dd2] <= t[d1]) b2 = dd2;
        }
      }
    }
    if (b1 < 0) continue;
    Solve::Axis ax;
    ax.n1 = b1;
    ax.n2 = b2;
    if (b2 >= 0) {
      ax.a = (4.0 * t[b1] - t[b2]) / 3.0;
      double he = 2.0 / 3.0 * h;
      ax.w = 1.0 / (he * he);
    } else {
      ax.a = t[b1];
      ax.w = 1.0 / (h * h);
    }
    cand[n++] = ax;
  }
  if (n == 0) return out;

  // Try the full stencil; drop the larger-a axis when the root is invalid.
  for (int attempt = 0; attempt < 2; ++attempt) {
    double A = 0.0, B = 0.0, C = -s * s;
    for (int d = 0; d < n; ++d) {
      A += cand[d].w;
      B += cand[d].w * cand[d].a;
      C += cand[d].w * cand[d].a * cand[d].a;
    }
    double disc = B * B - A * C;
    if (disc >= 0.0) {
      double root = (B + std::sqrt(disc)) / A;
      bool causal = true;
      for (int d = 0; d < n; ++d)
        if (root < cand[d].a) causal = false;
      if (causal) {
        out.t = root;
        out.n_axes = n;
        out.W = 0.0;
        for (int d = 0; d < n; ++d) {
          out.axes[d] = cand[d];
          out.W += cand[d].w * (root - cand[d].a);
        }
        return out;
      }
    }
    if (n == 1) break;
    int drop = cand[0].a > cand[1].a ? 0 : 1;
    cand[drop] = cand[1 - drop];
    n = 1;
  }
  // Single-axis fallback always has a root t = a + s h_eff.
  double he = 1.0 / std::sqrt(cand[0].w);
  out.t = cand[0].a + s * he;
  out.n_axes = 1;
  out.axes[0] = cand[0];
  out.W = cand[0].w * (out.t - cand[0].a);
  return out;
}

EikonalDep dep_from_solve(const Solve& sol, int32_t self, double s) {
  EikonalDep dep;
  for (int d = 0; d < sol.n_axes; ++d) {
    const Solve::Axis& ax = sol.axes[d];
    double dt_da = ax.w * (sol.t - ax.a) / sol.W;
    if (ax.n2 >= 0) {
      dep.t_nodes[dep.n_t] = ax.n1;
      dep.t_coefs[dep.n_t++] = dt_da * 4.0 / 3.0;
      dep.t_nodes[dep.n_t] = ax.n2;
      dep.t_coefs[dep.n_t++] = -dt_da / 3.0;
    } else {
      dep.t_nodes[dep.n_t] = ax.n1;
      dep.t_coefs[dep.n_t++] = dt_da;
    }
  }
  dep.s_nodes[0] = self;
  dep.s_coefs[0] = s / sol.W;
  dep.n_s = 1;
  return dep;
}

struct HeapEntry {
  double t;
  int32_t node;
  bool operator>(const HeapEntry& o) const {
    if (t != o.t) return t > o.t;
    return node > o.node;
  }
};

} // namespace

EikonalField eikonal_solve(const EikonalGrid& geom, const VecX& slowness,
                           const Vec2& source, double init_radius_factor) {
  const long M = geom.count();
  if (slowness.size() != M) throw ConfigError("slowness size mismatch");
  if (slowness.minCoeff() <= 0.0)
    throw PhysicsError("non-positive slowness in eikonal solve");

  EikonalField field;
  field.geom = &geom;
  field.source = source;
  field.t = VecX::Constant(M, kInf);
  field.deps.assign(M, EikonalDep{});
  field.order.reserve(M);

  std::vector<uint8_t> accepted(M, 0);
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;

  // Exact initialization near the source; the source slowness itself is the
  // probe interpolation of nodal slowness, so the linearization spreads over
  // the probe nodes.
  TimeProbe sp = make_time_probe(geom, source);
  double s_src = sp.apply(slowness);
  double r0 = init_radius_factor * geom.grid.h;
  std::vector<int32_t> seeds;
  for (long k = 0; k < M; ++k) {
    Vec2 x = geom.point(k);
    double r = (x - source).norm();
    if (r > r0) continue;
    field.t[k] = r * 0.5 * (slowness[k] + s_src);
    EikonalDep& dep = field.deps[k];
    dep.n_t = 0;
    dep.s_nodes[0] = static_cast<int32_t>(k);
    dep.s_coefs[0] = 0.5 * r;
    dep.n_s = 1;
    for (int q = 0; q < sp.n; ++q) {
      if (sp.nodes[q] == k) {
        dep.s_coefs[0] += 0.5 * r * sp.w[q];
      } else {
        dep.s_nodes[dep.n_s] = sp.nodes[q];
        dep.s_coefs[dep.n_s++] = 0.5 * r * sp.w[q];
      }
    }
    seeds.push_back(static_cast<int32_t>(k));
  }
  if (seeds.empty()) throw ConfigError("eikonal source off the masked grid");
  std::sort(seeds.begin(), seeds.end(), [&](int32_t a, int32_t b) {
    if (field.t[a] != field.t[b]) return field.t[a] < field.t[b];
    return a < b;
  });
  for (int32_t k : seeds) {
    accepted[k] = 1;
    field.order.push_back(k);
  }

  auto push_neighbors = [&](int32_t k) {
    long l = geom.node_of[k];
    long gx = l / geom.ny, gy = l % geom.ny;
    const long offs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (auto& o : offs) {
      long nx1 = gx + o[0], ny1 = gy + o[1];
      if (nx1 < 0 || ny1 < 0 || nx1 >= geom.nx || ny1 >= geom.ny) continue;
      int32_t d = geom.dense(nx1, ny1);
      if (d < 0 || accepted[d]) continue;
      Solve sol = local_solve(geom, accepted, field.t, nx1, ny1, slowness[d]);
      if (sol.t < field.t[d]) {
        field.t[d] = sol.t;
        heap.push({sol.t, d});
      }
    }
  };
  for (int32_t k : seeds) push_neighbors(k);

  while (!heap.empty()) {
    HeapEntry e = heap.top();
    heap.pop();
    if (accepted[e.node] || e.t > field.t[e.node]) continue;
    long l = geom.node_of[e.node];
    // Final value and linearization from accepted neighbors only.
    Solve sol = local_solve(geom, accepted, field.t, l / geom.ny, l % geom.ny,
                            slowness[e.node]);
    field.t[e.node] = sol.t;
    field.deps[e.node] = dep_from_solve(sol, e.node, slowness[e.node]);
    accepted[e.node] = 1;
    field.order.push_back(e.node);
    push_neighbors(e.node);
  }
  return field;
}

void EikonalField::tangent(const VecX& ds, VecX& dt) const {
  dt.setZero(t.size());
  for (int32_t k : order) {
    const EikonalDep& dep = deps[k];
    double v = 0.0;
    for (int q = 0; q < dep.n_t; ++q) v += dep.t_coefs[q] * dt[dep.t_nodes[q]];
    for (int q = 0; q < dep.n_s; ++q) v += dep.s_coefs[q] * ds[dep.s_nodes[q]];
    dt[k] = v;
  }
}

void EikonalField::adjoint(const VecX& tbar_in, VecX& sbar) const {
  VecX tbar = tbar_in;
  sbar.setZero(t.size());
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int32_t k = *it;
    const EikonalDep& dep = deps[k];
    double b = tbar[k];
    if (b == 0.0) continue;
    for (int q = 0; q < dep.n_t; ++q) tbar[dep.t_nodes[q]] += dep.t_coefs[q] * b;
    for (int q = 0; q < dep.n_s; ++q) sbar[dep.s_nodes[q]] += dep.s_coefs[q] * b;
  }
}

} // namespace elab
