#pragma once

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sqglab/grid.hpp"
#include "sqglab/spectral.hpp"

namespace sqglab {

/// Radial profile: 1 on [0, 1], quintic smoothstep down to 0 on [1, 2].
inline double lp_omega(double s) {
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  const double t = s - 1.0;
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

/// Dyadic Littlewood-Paley family on a grid.
///
/// phi(xi) = omega(xi) - omega(2 xi) and phi_j(xi) = phi(xi / 2^j) for
/// 0 <= j <= j_max = log2(N/2), so omega(xi) + sum_{j=1}^{j_max} phi_j(xi) = 1
/// for |xi| <= N/2.
struct LittlewoodPaleyFamily {
  TorusGrid grid;
  int j_max = 0;
  /// Kernel scale c of the synthesized kernels Phi_j; 0 until calibrated.
  double kernel_scale = 0.0;

  double omega(double s) const { return lp_omega(s); }
  double phi(double s) const { return lp_omega(s) - lp_omega(2.0 * s); }
  double phi_j(int j, double s) const { return phi(std::ldexp(s, -j)); }
  double phi_j(int j, const Index& n) const { return phi_j(j, mode_norm(n)); }
};

inline LittlewoodPaleyFamily lp_profile_family(const TorusGrid& grid) {
  LittlewoodPaleyFamily fam;
  fam.grid = grid;
  fam.j_max = std::countr_zero(static_cast<unsigned>(grid.n() / 2));
  return fam;
}

/// Delta_j: multiply by phi_j(n).
inline SpectralField lp_project(const SpectralField& F, int j, const LittlewoodPaleyFamily& fam) {
  require_same_grid(F.grid(), fam.grid, "lp_project");
  if (j < 0 || j > fam.j_max)
    throw std::out_of_range("lp_project: j = " + std::to_string(j) + " outside [0, " + std::to_string(fam.j_max) + "]");
  return apply_multiplier(F, [&](const Index& n) -> Complex { return fam.phi_j(j, n); });
}

/// Delta_omega: multiply by omega(n) (the low block, includes mode 0).
inline SpectralField lp_project_low(const SpectralField& F, const LittlewoodPaleyFamily& fam) {
  require_same_grid(F.grid(), fam.grid, "lp_project_low");
  return apply_multiplier(F, [&](const Index& n) -> Complex { return fam.omega(mode_norm(n)); });
}

}  // namespace sqglab
