#pragma once

#include <array>

#include "elab/types.hpp"

namespace elab {

// Uniform node-centered grid over an axis-aligned box.  Node (i0,..) sits at
// origin + h * index; dims counts nodes per axis.
template <int N>
struct Grid {
  Vec<N> origin = Vec<N>::Zero();
  double h = 1.0;
  std::array<int, N> dims{};

  static Grid covering(const Vec<N>& lo, const Vec<N>& hi, int nodes_major) {
    Grid g;
    double extent = (hi - lo).maxCoeff();
    g.h = extent / (nodes_major - 1);
    g.origin = lo;
    for (int d = 0; d < N; ++d)
      g.dims[d] = static_cast<int>(std::ceil((hi[d] - lo[d]) / g.h)) + 1;
    return g;
  }

  long total() const {
    long t = 1;
    for (int d = 0; d < N; ++d) t *= dims[d];
    return t;
  }

  Vec<N> point(const std::array<int, N>& idx) const {
    Vec<N> p = origin;
    for (int d = 0; d < N; ++d) p[d] += h * idx[d];
    return p;
  }

  bool contains(const std::array<int, N>& idx) const {
    for (int d = 0; d < N; ++d)
      if (idx[d] < 0 || idx[d] >= dims[d]) return false;
    return true;
  }

  // Row-major linearization, last axis fastest.
  long linear(const std::array<int, N>& idx) const {
    long l = 0;
    for (int d = 0; d < N; ++d) l = l * dims[d] + idx[d];
    return l;
  }

  std::array<int, N> unlinear(long l) const {
    std::array<int, N> idx{};
    for (int d = N - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(l % dims[d]);
      l /= dims[d];
    }
    return idx;
  }
};

using Grid2 = Grid<2>;
using Grid3 = Grid<3>;

} // namespace elab
