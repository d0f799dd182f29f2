#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "sqglab/grid.hpp"
#include "sqglab/spectral.hpp"

namespace sqglab {

/// Unnormalized bump exp(-1/(1-s^2)) for s < 1, 0 otherwise.
inline double bump_profile(double s) {
  if (s >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

/// d/ds of bump_profile.
inline double bump_profile_slope(double s) {
  if (s >= 1.0) return 0.0;
  const double u = 1.0 - s * s;
  return -2.0 * s / (u * u) * std::exp(-1.0 / u);
}

/// chi_r(x) = r^{-d} chi(x / r), periodized, sampled on the grid and scaled so
/// the grid quadrature of chi_r is exactly 1.
class Mollifier {
 public:
  Mollifier(const TorusGrid& grid, double r) : grid_(grid), r_(r), samples_(grid) {
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("build_mollifier: r must lie in (0, 1]");
    if (r / grid.spacing() < 4.0)
      throw std::invalid_argument("build_mollifier: r = " + std::to_string(r) + " spans fewer than 4 grid cells");
    const std::array<double, 3> origin{0.0, 0.0, 0.0};
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      samples_[i] = bump_profile(periodic_distance(grid.point(i), origin, grid.dim()) / r);
      sum += samples_[i];
    }
    scale_ = 1.0 / (sum * grid.cell_volume());
    samples_ *= scale_;
    multiplier_ = to_spectral(samples_);
    multiplier_ *= grid.volume();

    // sup |grad chi| over the continuum: golden-section search of the radial
    // slope on (0, 1), where it is unimodal.
    double a = 0.0, b = 1.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200; ++it) {
      double c = b - gr * (b - a), d = a + gr * (b - a);
      if (std::fabs(bump_profile_slope(c)) > std::fabs(bump_profile_slope(d)))
        b = d;
      else
        a = c;
    }
    // Samples carry r^{-d} implicitly through the discrete normalization.
    const double unit_scale = scale_ * std::pow(r, grid.dim());
    constant_ = unit_scale * std::fabs(bump_profile_slope(0.5 * (a + b)));
  }

  const TorusGrid& grid() const { return grid_; }
  double r() const { return r_; }
  const GridField& samples() const { return samples_; }
  /// (2 pi)^d times the Fourier coefficients of chi_r: the convolution multiplier.
  const SpectralField& multiplier() const { return multiplier_; }
  /// C with ||grad chi_r||_inf <= C r^{-d-1}.
  double gradient_constant() const { return constant_; }

  /// Grid samples of grad chi_r.
  VectorField gradient_samples() const {
    VectorField g(grid_.dim(), GridField(grid_));
    const std::array<double, 3> origin{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      auto x = grid_.point(i);
      const double dist = periodic_distance(x, origin, grid_.dim());
      if (dist == 0.0 || dist >= r_) continue;
      const double slope = scale_ * bump_profile_slope(dist / r_) / r_;
      for (int a = 0; a < grid_.dim(); ++a) g[a][i] = slope * x[a] / dist;
    }
    return g;
  }

  SpectralField convolve(const SpectralField& F) const {
    require_same_grid(F.grid(), grid_, "Mollifier::convolve");
    SpectralField out(F);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= multiplier_[i];
    return out;
  }
  GridField convolve(const GridField& f) const { return to_grid(convolve(to_spectral(f))); }

 private:
  TorusGrid grid_;
  double r_;
  GridField samples_;
  SpectralField multiplier_;
  double scale_ = 1.0;
  double constant_ = 0.0;
};

inline Mollifier build_mollifier(const TorusGrid& grid, double r) { return Mollifier(grid, r); }

}  // namespace sqglab
