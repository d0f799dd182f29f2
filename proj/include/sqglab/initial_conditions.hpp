#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "sqglab/grid.hpp"
#include "sqglab/spectral.hpp"

namespace sqglab {

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform,
/// unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Standard normal by Box-Muller on uniform01 (portable).
inline double standard_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

/// Band-limited real field with modes 0 < |n| <= band, i.i.d. Gaussian
/// coefficients made Hermitian, mean exactly zero, scaled to sup norm `amplitude`.
inline GridField random_mean_zero(const TorusGrid& g, std::uint64_t seed, double amplitude = 1.0, int band = 8) {
  std::mt19937_64 rng(seed);
  SpectralField F(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Index n = g.mode(i);
    const double r = mode_norm(n);
    if (r == 0.0 || r > band) continue;
    std::size_t j = F.partner(i);
    // Draw once per +-n pair, from the member with the smaller flat index.
    if (j < i) continue;
    const double re = standard_normal(rng), im = standard_normal(rng);
    if (j == i) {
      F[i] = re;
    } else {
      F[i] = Complex(re, im);
      F[j] = Complex(re, -im);
    }
  }
  GridField f = to_grid(F);
  const double s = f.sup_norm();
  if (s > 0.0) f *= amplitude / s;
  return f;
}

/// sin x2 (d >= 2) or sin x1 (d = 1).
inline GridField shear_field(const TorusGrid& g, double amplitude = 1.0) {
  const int axis = g.dim() >= 2 ? 1 : 0;
  return GridField::sample(g, [&](const std::array<double, 3>& x) { return amplitude * std::sin(x[axis]); });
}

/// cos(n . x) for an integer wave vector.
inline GridField cos_mode(const TorusGrid& g, const Index& n, double amplitude = 1.0) {
  return GridField::sample(g, [&](const std::array<double, 3>& x) {
    double ph = 0.0;
    for (int a = 0; a < g.dim(); ++a) ph += n[a] * x[a];
    return amplitude * std::cos(ph);
  });
}

/// Opposite Gaussian bumps at (-pi/2, 0) and (pi/2, 0), width 0.5, periodic
/// distance, projected to mean zero and scaled to sup norm `amplitude`.
inline GridField vortex_pair(const TorusGrid& g, double amplitude = 1.0) {
  if (g.dim() != 2) throw std::invalid_argument("vortex_pair: requires d = 2");
  const double s2 = 2.0 * 0.5 * 0.5;
  GridField f = GridField::sample(g, [&](const std::array<double, 3>& x) {
    const double a = periodic_distance(x, {-0.5 * kPi, 0.0, 0.0}, 2);
    const double b = periodic_distance(x, {0.5 * kPi, 0.0, 0.0}, 2);
    return std::exp(-a * a / s2) - std::exp(-b * b / s2);
  });
  f += -f.mean();
  const double s = f.sup_norm();
  if (s > 0.0) f *= amplitude / s;
  return f;
}

struct InitialCondition {
  std::string kind = "random-mean-zero";
  double amplitude = 1.0;
  Index mode{1, 0, 0};
  int band = 8;
};

inline GridField make_initial_condition(const TorusGrid& g, const InitialCondition& ic, std::uint64_t seed) {
  if (ic.kind == "random-mean-zero") return random_mean_zero(g, seed, ic.amplitude, ic.band);
  if (ic.kind == "shear") return shear_field(g, ic.amplitude);
  if (ic.kind == "vortex-pair") return vortex_pair(g, ic.amplitude);
  if (ic.kind == "cos-mode") return cos_mode(g, ic.mode, ic.amplitude);
  if (ic.kind == "zero") return GridField(g);
  throw std::invalid_argument("unknown initial condition '" + ic.kind + "'");
}

}  // namespace sqglab
