#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sqglab/fft.hpp"
#include "sqglab/grid.hpp"
#include "sqglab/parallel.hpp"
#include "sqglab/spectral.hpp"

namespace sqglab {

/// Quadrature of the periodized singular kernel |w|^{-alpha-d} of the
/// fractional Laplacian, unnormalized:
///
///   (K f)(x) = sum_{w != 0} c(w) h^d |w|^{-alpha-d} (f(x) - f(x+w))
///            + tail * (f(x) - mean f) - 0.5 * near * Laplacian f(x)
///
/// The lattice sum runs over grid offsets w = k h in the box |k_i| <= M with
/// M h = (2L+1) pi (the cells of all periodic images |n|_inf <= L), with
/// trapezoid weights c(w) on the box faces. Offsets w and -w both appear, so
/// the principal value pairing is built in and w = 0 is skipped.
///
/// `tail` is the exact integral of |w|^{-alpha-d} outside the box (the cosine
/// part averages out there). `near` is the defect between the exact integral
/// and the punctured-lattice quadrature of the Gaussian-damped second-order
/// Taylor term, which is what the lattice gets wrong near the singularity.
struct LatticeKernel {
  TorusGrid grid;
  double alpha = 0.0;
  int lattice_radius = 0;
  /// Lattice weights c(w) h^d |w|^{-alpha-d} folded onto the N^d offset classes.
  std::vector<double> periodized;
  double periodized_total = 0.0;
  double tail = 0.0;
  double near = 0.0;

  /// Unnormalized symbol of K at mode n (the multiplier applied to e^{i n.x}).
  double symbol(const Index& n) const {
    const double h = grid.spacing();
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      Index k = grid.mode(i);
      double ph = 0.0;
      for (int a = 0; a < grid.dim(); ++a) ph += static_cast<double>(n[a]) * k[a] * h;
      s += periodized[i] * (1.0 - std::cos(ph));
    }
    double r2 = mode_norm_sq(n);
    if (r2 == 0.0) return 0.0;
    return s + tail + 0.5 * near * r2;
  }
};

namespace detail {

inline double unit_sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Integral of |w|^{-alpha-d} over R^d outside the cube [-R, R]^d: for each
/// of the 2d faces, integrate along rays from the origin.
inline double box_tail_integral(int d, double alpha, double R) {
  if (d == 1) return 2.0 * std::pow(R, -alpha) / alpha;
  const double e = -(alpha + d) / 2.0;
  double face = 0.0;
  using Gauss = boost::math::quadrature::gauss<double, 48>;
  if (d == 2) {
    face = Gauss::integrate([&](double u) { return std::pow(1.0 + u * u, e); }, -1.0, 1.0);
  } else {
    face = Gauss::integrate(
        [&](double u) {
          return Gauss::integrate([&](double v) { return std::pow(1.0 + u * u + v * v, e); }, -1.0, 1.0);
        },
        -1.0, 1.0);
  }
  return (2.0 * d / alpha) * std::pow(R, -alpha) * face;
}

}  // namespace detail

inline LatticeKernel build_lattice_kernel(const TorusGrid& grid, double alpha, int lattice_radius) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("kernel oracle: alpha must lie in (0, 2)");
  if (lattice_radius < 1) throw std::invalid_argument("kernel oracle: lattice_radius must be >= 1");
  const int d = grid.dim();
  const int N = grid.n();
  const double h = grid.spacing();
  const double hd = grid.cell_volume();
  const long M = static_cast<long>(2 * lattice_radius + 1) * N / 2;
  const long side = 2 * M + 1;
  const double ex = -0.5 * (alpha + d);

  LatticeKernel K;
  K.grid = grid;
  K.alpha = alpha;
  K.lattice_radius = lattice_radius;
  K.periodized.assign(grid.size(), 0.0);

  // Rows of the first lattice axis are distributed in fixed chunks; each
  // chunk folds into its own buffer and buffers are combined in chunk order.
  const std::size_t chunk = 64;
  const std::size_t nchunks = (static_cast<std::size_t>(side) + chunk - 1) / chunk;
  std::vector<std::vector<double>> partial(nchunks);
  parallel_chunks(static_cast<std::size_t>(side), chunk, [&](std::size_t begin, std::size_t end) {
    std::vector<double>& acc = partial[begin / chunk];
    acc.assign(grid.size(), 0.0);
    auto face_w = [M](long k) { return (k == M || k == -M) ? 0.5 : 1.0; };
    auto wrap = [N](long k) {
      long m = k % N;
      return static_cast<std::size_t>(m < 0 ? m + N : m);
    };
    for (std::size_t r = begin; r < end; ++r) {
      const long k1 = static_cast<long>(r) - M;
      const double w1 = face_w(k1);
      const double s1 = static_cast<double>(k1) * k1;
      const std::size_t b1 = wrap(k1);
      if (d == 1) {
        if (k1 != 0) acc[b1] += w1 * hd * std::pow(h * h * s1, ex);
        continue;
      }
      for (long k2 = -M; k2 <= M; ++k2) {
        const double w2 = w1 * face_w(k2);
        const double s2 = s1 + static_cast<double>(k2) * k2;
        const std::size_t b2 = b1 + static_cast<std::size_t>(N) * wrap(k2);
        if (d == 2) {
          if (s2 != 0.0) acc[b2] += w2 * hd * std::pow(h * h * s2, ex);
          continue;
        }
        for (long k3 = -M; k3 <= M; ++k3) {
          const double s3 = s2 + static_cast<double>(k3) * k3;
          if (s3 == 0.0) continue;
          acc[b2 + static_cast<std::size_t>(N) * N * wrap(k3)] += w2 * face_w(k3) * hd * std::pow(h * h * s3, ex);
        }
      }
    }
  });
  for (const auto& acc : partial)
    for (std::size_t i = 0; i < acc.size(); ++i) K.periodized[i] += acc[i];
  for (double v : K.periodized) K.periodized_total += v;

  K.tail = detail::box_tail_integral(d, alpha, (2 * lattice_radius + 1) * kPi);

  // Gaussian-damped second moment, exact versus punctured lattice (a = 1; the
  // damping factor is below 1e-62 beyond |w| = 12).
  const double exact = detail::unit_sphere_area(d) / d * std::tgamma(1.0 - 0.5 * alpha) / 2.0;
  const long kr = static_cast<long>(std::ceil(12.0 / h));
  double lattice = 0.0;
  const long lo3 = d >= 3 ? -kr : 0, hi3 = d >= 3 ? kr : 0;
  const long lo2 = d >= 2 ? -kr : 0, hi2 = d >= 2 ? kr : 0;
  for (long a3 = lo3; a3 <= hi3; ++a3)
    for (long a2 = lo2; a2 <= hi2; ++a2)
      for (long a1 = -kr; a1 <= kr; ++a1) {
        const double r2 = h * h * (static_cast<double>(a1) * a1 + static_cast<double>(a2) * a2 + static_cast<double>(a3) * a3);
        if (r2 == 0.0 || r2 >= 144.0) continue;
        lattice += hd * std::exp(-r2) * (h * a1) * (h * a1) * std::pow(r2, ex);
      }
  K.near = exact - lattice;
  return K;
}

/// Unnormalized kernel-sum evaluation of (-Delta)^{alpha/2} f. Output divided
/// by the spectral multiplier |n|^alpha is mode independent (it estimates
/// 1 / C_alpha); the normalization is deliberately not applied.
inline GridField fractional_laplacian_kernel_oracle(const GridField& f, const LatticeKernel& K) {
  const TorusGrid& g = f.grid();
  require_same_grid(g, K.grid, "fractional_laplacian_kernel_oracle");
  // Circular correlation with the folded lattice weights, as a DFT multiplier.
  std::vector<Complex> kin(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) kin[i] = K.periodized[i];
  std::vector<Complex> kd = fft::dft(kin, g, fft::Direction::forward);
  SpectralField F = to_spectral(f);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Index n = g.mode(i);
    const double r2 = mode_norm_sq(n);
    if (r2 == 0.0) {
      F[i] = 0.0;
      continue;
    }
    // kd holds sum_k W(k) e^{-i m.k h}; W is even so this is real.
    const double m = K.periodized_total - kd[i].real() + K.tail + 0.5 * K.near * r2;
    F[i] *= m;
  }
  return to_grid(F);
}

inline GridField fractional_laplacian_kernel_oracle(const GridField& f, double alpha, int lattice_radius) {
  return fractional_laplacian_kernel_oracle(f, build_lattice_kernel(f.grid(), alpha, lattice_radius));
}

}  // namespace sqglab
