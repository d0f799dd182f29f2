#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqglab {

using Complex = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Signed integer multi-index; unused trailing components are zero.
using Index = std::array<int, 3>;

/// Uniform N^d grid on the torus, identified with [-pi, pi)^d.
///
/// Storage order is x1 fastest: flat = k1 + N*k2 + N^2*k3. Grid points are
/// x_k = -pi + k * (2 pi / N) in each coordinate.
class TorusGrid {
 public:
  TorusGrid() = default;
  TorusGrid(int dim, int n) : dim_(dim), n_(n) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("TorusGrid: dimension must be 1, 2 or 3");
    if (n < 8 || (n & (n - 1)) != 0) throw std::invalid_argument("TorusGrid: N must be a power of two >= 8");
    size_ = 1;
    for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n);
    shift_ = std::countr_zero(static_cast<unsigned>(n));
  }

  int dim() const { return dim_; }
  int n() const { return n_; }
  std::size_t size() const { return size_; }
  double spacing() const { return kTwoPi / n_; }
  double cell_volume() const { return std::pow(spacing(), dim_); }
  /// (2 pi)^d.
  double volume() const { return std::pow(kTwoPi, dim_); }
  double coord(int k) const { return -kPi + k * spacing(); }

  Index unravel(std::size_t flat) const {
    Index k{0, 0, 0};
    const std::size_t mask = static_cast<std::size_t>(n_) - 1;
    for (int a = 0; a < dim_; ++a) {
      k[a] = static_cast<int>(flat & mask);
      flat >>= shift_;
    }
    return k;
  }

  /// Flat index of a (possibly negative or out-of-range) periodic grid index.
  std::size_t ravel(const Index& k) const {
    std::size_t flat = 0;
    const unsigned mask = static_cast<unsigned>(n_) - 1;
    for (int a = dim_ - 1; a >= 0; --a)
      flat = (flat << shift_) | (static_cast<unsigned>(k[a]) & mask);
    return flat;
  }

  /// Signed Fourier mode in {-N/2, ..., N/2-1}^d stored at flat index.
  Index mode(std::size_t flat) const {
    Index k = unravel(flat);
    for (int a = 0; a < dim_; ++a)
      if (k[a] >= n_ / 2) k[a] -= n_;
    return k;
  }

  /// Flat index of the mode -n for the mode stored at `flat`.
  std::size_t negated(std::size_t flat) const {
    const std::size_t mask = static_cast<std::size_t>(n_) - 1;
    std::size_t out = 0;
    for (int a = 0; a < dim_; ++a) {
      const std::size_t k = (flat >> (a * shift_)) & mask;
      out |= ((static_cast<std::size_t>(n_) - k) & mask) << (a * shift_);
    }
    return out;
  }

  std::array<double, 3> point(std::size_t flat) const {
    Index k = unravel(flat);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) x[a] = coord(k[a]);
    return x;
  }

  bool operator==(const TorusGrid& o) const { return dim_ == o.dim_ && n_ == o.n_; }

 private:
  int dim_ = 2;
  int n_ = 8;
  std::size_t size_ = 64;
  int shift_ = 3;
};

inline double mode_norm_sq(const Index& n) {
  return static_cast<double>(n[0]) * n[0] + static_cast<double>(n[1]) * n[1] +
         static_cast<double>(n[2]) * n[2];
}
inline double mode_norm(const Index& n) { return std::sqrt(mode_norm_sq(n)); }

/// Periodic (minimal image) Euclidean distance between two points of the torus.
inline double periodic_distance(const std::array<double, 3>& x, const std::array<double, 3>& y, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) {
    double d = std::fabs(x[a] - y[a]);
    d = std::fmod(d, kTwoPi);
    d = std::min(d, kTwoPi - d);
    s += d * d;
  }
  return std::sqrt(s);
}

inline void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

/// Real values on a TorusGrid.
class GridField {
 public:
  GridField() = default;
  explicit GridField(const TorusGrid& grid, double fill = 0.0) : grid_(grid), values_(grid.size(), fill) {}
  GridField(const TorusGrid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw std::invalid_argument("GridField: value count does not match grid");
  }

  template <class Fn>
  static GridField sample(const TorusGrid& grid, Fn&& fn) {
    GridField f(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) f.values_[i] = fn(grid.point(i));
    return f;
  }

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool is_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  /// (2 pi)^{-d} times the rectangle-rule integral.
  double mean() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s / static_cast<double>(values_.size());
  }

  double integral() const { return mean() * grid_.volume(); }

  double max() const {
    double m = -HUGE_VAL;
    for (double v : values_) m = std::max(m, v);
    return m;
  }
  double min() const {
    double m = HUGE_VAL;
    for (double v : values_) m = std::min(m, v);
    return m;
  }
  double sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::fabs(v));
    return m;
  }

  /// (integral |f|^p)^{1/p} by the rectangle rule.
  double lp_norm(double p) const { return std::pow(lp_norm_pow(p), 1.0 / p); }
  /// integral |f|^p by the rectangle rule.
  double lp_norm_pow(double p) const {
    double s = 0.0;
    if (p == 2.0) {
      for (double v : values_) s += v * v;
    } else {
      for (double v : values_) s += std::pow(std::fabs(v), p);
    }
    return s * grid_.cell_volume();
  }

  GridField& operator+=(const GridField& o) {
    require_same_grid(grid_, o.grid_, "GridField +=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  GridField& operator-=(const GridField& o) {
    require_same_grid(grid_, o.grid_, "GridField -=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  GridField& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }
  GridField& operator+=(double s) {
    for (double& v : values_) v += s;
    return *this;
  }

  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(GridField a, double s) { return a *= s; }
  friend GridField operator*(double s, GridField a) { return a *= s; }

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

/// Largest absolute pointwise difference.
inline double max_abs_diff(const GridField& a, const GridField& b) {
  require_same_grid(a.grid(), b.grid(), "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

/// Periodic translate by an integer number of cells: out(x) = f(x - shift*h).
inline GridField translate(const GridField& f, const Index& shift) {
  const TorusGrid& g = f.grid();
  GridField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    Index k = g.unravel(i);
    for (int a = 0; a < g.dim(); ++a) k[a] -= shift[a];
    out[i] = f[g.ravel(k)];
  }
  return out;
}

/// Complex Fourier coefficients indexed by signed mode, same flat layout as the grid.
///
/// coeff(n) approximates (2 pi)^{-d} * integral f(x) e^{-i n.x} dx.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const TorusGrid& grid) : grid_(grid), coeffs_(grid.size(), Complex(0.0, 0.0)) {}
  SpectralField(const TorusGrid& grid, std::vector<Complex> coeffs) : grid_(grid), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != grid_.size()) throw std::invalid_argument("SpectralField: coefficient count mismatch");
  }

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return coeffs_.size(); }
  std::span<Complex> coeffs() { return coeffs_; }
  std::span<const Complex> coeffs() const { return coeffs_; }
  Complex& operator[](std::size_t i) { return coeffs_[i]; }
  const Complex& operator[](std::size_t i) const { return coeffs_[i]; }

  Complex& at(const Index& n) { return coeffs_[grid_.ravel(n)]; }
  const Complex& at(const Index& n) const { return coeffs_[grid_.ravel(n)]; }

  /// Flat index of the mode -n (the Hermitian partner).
  std::size_t partner(std::size_t flat) const { return grid_.negated(flat); }

  /// max |coeff(-n) - conj(coeff(n))| relative to max |coeff|, both measured
  /// componentwise (max of real and imaginary parts).
  double hermitian_defect() const {
    double scale = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      const Complex c = coeffs_[i];
      const Complex m = coeffs_[partner(i)];
      scale = std::max({scale, std::fabs(c.real()), std::fabs(c.imag())});
      worst = std::max({worst, std::fabs(m.real() - c.real()), std::fabs(m.imag() + c.imag())});
    }
    return scale == 0.0 ? 0.0 : worst / scale;
  }

  SpectralField& operator+=(const SpectralField& o) {
    require_same_grid(grid_, o.grid_, "SpectralField +=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_same_grid(grid_, o.grid_, "SpectralField -=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  SpectralField& operator*=(Complex s) {
    for (auto& c : coeffs_) c = Complex(c.real() * s.real() - c.imag() * s.imag(), c.real() * s.imag() + c.imag() * s.real());
    return *this;
  }
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
  friend SpectralField operator*(SpectralField a, Complex s) { return a *= s; }

 private:
  TorusGrid grid_;
  std::vector<Complex> coeffs_;
};

/// d components of a vector field.
using VectorField = std::vector<GridField>;

}  // namespace sqglab
