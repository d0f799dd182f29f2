#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sqglab/grid.hpp"
#include "sqglab/parallel.hpp"

namespace sqglab {

/// Offset directions used by the sampled estimators: the d axes and the
/// 2^{d-1} diagonals (one of each +-pair), as integer cell steps.
inline std::vector<Index> sampling_directions(int dim) {
  std::vector<Index> dirs;
  for (int a = 0; a < dim; ++a) {
    Index e{0, 0, 0};
    e[a] = 1;
    dirs.push_back(e);
  }
  if (dim >= 2) {
    const int combos = 1 << (dim - 1);
    for (int m = 0; m < combos; ++m) {
      Index e{1, 0, 0};
      for (int a = 1; a < dim; ++a) e[a] = (m >> (a - 1)) & 1 ? -1 : 1;
      dirs.push_back(e);
    }
  }
  return dirs;
}

/// Integer offsets k * dir with dyadic k and Euclidean length at most pi.
inline std::vector<Index> dyadic_offsets(const TorusGrid& g) {
  std::vector<Index> out;
  for (const Index& e : sampling_directions(g.dim())) {
    const double unit = g.spacing() * mode_norm(e);
    for (int k = 1; k <= g.n() / 2; k *= 2) {
      if (k * unit > kPi + 1e-12) break;
      out.push_back({k * e[0], k * e[1], k * e[2]});
    }
  }
  return out;
}

/// Sampled Lipschitz constant: max over axis and diagonal dyadic offsets of
/// |v(x+o) - v(x)| / |o| (Euclidean norm over components for vector fields).
inline double sampled_lipschitz(const VectorField& v) {
  if (v.empty()) return 0.0;
  const TorusGrid& g = v[0].grid();
  double best = 0.0;
  for (const Index& o : dyadic_offsets(g)) {
    const double len = g.spacing() * mode_norm(o);
    for (std::size_t i = 0; i < g.size(); ++i) {
      Index k = g.unravel(i);
      for (int a = 0; a < g.dim(); ++a) k[a] += o[a];
      const std::size_t j = g.ravel(k);
      double s = 0.0;
      for (const auto& c : v) s += (c[j] - c[i]) * (c[j] - c[i]);
      best = std::max(best, std::sqrt(s) / len);
    }
  }
  return best;
}

inline double sampled_lipschitz(const GridField& f) { return sampled_lipschitz(VectorField{f}); }

/// Exact grid Lipschitz constant over all pairs of grid points with periodic
/// distance; O(N^{2d}).
inline double all_pairs_lipschitz(const GridField& f) {
  const TorusGrid& g = f.grid();
  const std::size_t n = g.size();
  std::vector<std::array<double, 3>> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = g.point(i);
  const std::size_t chunk = 64;
  std::vector<double> part((n + chunk - 1) / chunk, 0.0);
  parallel_chunks(n, chunk, [&](std::size_t b, std::size_t e) {
    double m = 0.0;
    for (std::size_t i = b; i < e; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        m = std::max(m, std::fabs(f[i] - f[j]) / periodic_distance(pts[i], pts[j], g.dim()));
    part[b / chunk] = m;
  });
  return *std::max_element(part.begin(), part.end());
}

}  // namespace sqglab
