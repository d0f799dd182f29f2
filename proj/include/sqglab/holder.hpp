#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sqglab/grid.hpp"
#include "sqglab/lipschitz.hpp"
#include "sqglab/littlewood_paley.hpp"
#include "sqglab/spectral.hpp"
#include "sqglab/test_class.hpp"

namespace sqglab {

/// One row of a per-scale table. j = -1 is the low (omega) block.
struct ScaleRow {
  int j = 0;
  double block_sup = 0.0;  // max over the grid (or translate lattice) of |Delta_j g|
  double weighted = 0.0;   // 2^{beta j} block_sup
};

struct LpSeminorm {
  double value = 0.0;
  std::vector<ScaleRow> table;
};

inline void require_holder_exponent(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("Holder exponent beta must lie in (0, 1)");
}

/// sup_j 2^{beta j} ||Delta_j g||_inf over j = 0..j_max, plus the low block
/// Delta_omega (mode 0 removed) with weight 1.
inline LpSeminorm lp_seminorm(const GridField& g, double beta, const LittlewoodPaleyFamily& fam) {
  require_holder_exponent(beta);
  SpectralField G = to_spectral(g);
  G[0] = 0.0;
  LpSeminorm out;
  for (int j = -1; j <= fam.j_max; ++j) {
    SpectralField B = j < 0 ? lp_project_low(G, fam) : lp_project(G, j, fam);
    ScaleRow row;
    row.j = j;
    row.block_sup = to_grid(B).sup_norm();
    row.weighted = std::pow(2.0, beta * std::max(j, 0)) * row.block_sup;
    out.value = std::max(out.value, row.weighted);
    out.table.push_back(row);
  }
  return out;
}

struct DirectSeminorm {
  double value = 0.0;
  std::size_t arg_x = 0;
  Index arg_offset{0, 0, 0};
  double arg_distance = 0.0;
};

/// max over grid points x and dyadic axis/diagonal offsets o (|o| <= pi) of
/// |g(x + o) - g(x)| / |o|^beta.
inline DirectSeminorm direct_seminorm(const GridField& g, double beta, const std::vector<Index>& offsets) {
  require_holder_exponent(beta);
  const TorusGrid& grid = g.grid();
  DirectSeminorm out;
  for (const Index& o : offsets) {
    const double len = grid.spacing() * mode_norm(o);
    const double w = std::pow(len, -beta);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      Index k = grid.unravel(i);
      for (int a = 0; a < grid.dim(); ++a) k[a] += o[a];
      const double v = std::fabs(g[grid.ravel(k)] - g[i]) * w;
      if (v > out.value) {
        out.value = v;
        out.arg_x = i;
        out.arg_offset = o;
        out.arg_distance = len;
      }
    }
  }
  return out;
}

inline DirectSeminorm direct_seminorm(const GridField& g, double beta) {
  return direct_seminorm(g, beta, dyadic_offsets(g.grid()));
}

/// sup over scales r = 2^{-j} of r^{-beta} max_y |pair(g, Phi_j(. - y))| / c,
/// with y on the translate lattice of every `stride`-th grid point per axis.
/// The pairing against all grid translates is one circular correlation of the
/// grid arrays, evaluated by FFT.
inline LpSeminorm pairing_profile(const GridField& g, double beta, const LittlewoodPaleyFamily& fam, int stride = 1) {
  require_holder_exponent(beta);
  if (stride < 1) throw std::invalid_argument("pairing_profile: stride must be >= 1");
  if (!(fam.kernel_scale > 0.0)) throw std::logic_error("pairing_profile: family kernel scale not calibrated");
  const TorusGrid& grid = g.grid();
  require_same_grid(grid, fam.grid, "pairing_profile");
  const double c = fam.kernel_scale;
  SpectralField G = to_spectral(g);
  LpSeminorm out;
  for (int j = -1; j <= fam.j_max; ++j) {
    // corr(y) = h^d sum_x g(x) Phi(x - y); its coefficients are
    // (2 pi)^d G(n) conj(P(n)).
    SpectralField P = to_spectral(make_lp_kernel(fam, j, c));
    SpectralField C(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) C[i] = grid.volume() * G[i] * std::conj(P[i]);
    GridField corr = to_grid(C);
    double best = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      Index k = grid.unravel(i);
      bool on = true;
      for (int a = 0; a < grid.dim(); ++a) on = on && k[a] % stride == 0;
      if (on) best = std::max(best, std::fabs(corr[i]));
    }
    ScaleRow row;
    row.j = j;
    row.block_sup = best / c;
    row.weighted = std::pow(lp_kernel_scale_r(j), -beta) * row.block_sup;
    out.value = std::max(out.value, row.weighted);
    out.table.push_back(row);
  }
  return out;
}

struct HolderReport {
  double beta = 0.0;
  double lp_value = 0.0;
  double direct_value = 0.0;
  double pairing_value = 0.0;
  std::vector<ScaleRow> lp_table, pairing_table;
  DirectSeminorm direct;
};

inline HolderReport holder_report(const GridField& g, double beta, const LittlewoodPaleyFamily& fam, int stride = 1) {
  HolderReport rep;
  rep.beta = beta;
  LpSeminorm lp = lp_seminorm(g, beta, fam);
  rep.lp_value = lp.value;
  rep.lp_table = lp.table;
  rep.direct = direct_seminorm(g, beta);
  rep.direct_value = rep.direct.value;
  if (fam.kernel_scale > 0.0) {
    LpSeminorm pp = pairing_profile(g, beta, fam, stride);
    rep.pairing_value = pp.value;
    rep.pairing_table = pp.table;
  }
  return rep;
}

/// sum_{j=0}^{J} 2^{-beta j} cos(2^j x_1), J = log2(N) - 2 by default.
inline GridField weierstrass_field(const TorusGrid& g, double beta, int J = -1) {
  if (J < 0) {
    J = 0;
    while ((1 << (J + 3)) <= g.n()) ++J;
  }
  return GridField::sample(g, [&](const std::array<double, 3>& x) {
    double s = 0.0;
    for (int j = 0; j <= J; ++j) s += std::pow(2.0, -beta * j) * std::cos(std::ldexp(1.0, j) * x[0]);
    return s;
  });
}

}  // namespace sqglab
