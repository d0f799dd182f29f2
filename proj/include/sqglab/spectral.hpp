#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sqglab/fft.hpp"
#include "sqglab/grid.hpp"

namespace sqglab {

namespace detail {

/// (-1)^{m1+...+md}: phase of the grid origin at -pi (N even, so parity of
/// the stored index equals parity of the signed mode).
inline double origin_phase(const TorusGrid& g, std::size_t flat) {
  const int shift = std::countr_zero(static_cast<unsigned>(g.n()));
  std::size_t s = 0;
  for (int a = 0; a < g.dim(); ++a) s += flat >> (a * shift);
  return (s & 1) ? -1.0 : 1.0;
}

inline bool has_nyquist(const TorusGrid& g, const Index& n) {
  for (int a = 0; a < g.dim(); ++a)
    if (n[a] == -g.n() / 2) return true;
  return false;
}

}  // namespace detail

inline constexpr double kHermitianTolerance = 1e-10;

/// Discrete Fourier coefficients, coeff(n) = N^{-d} sum_k f(x_k) e^{-i n.x_k}.
inline SpectralField to_spectral(const GridField& f) {
  const TorusGrid& g = f.grid();
  if (!f.is_finite()) throw std::invalid_argument("to_spectral: non-finite grid values");
  std::vector<Complex> in(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) in[i] = Complex(f[i], 0.0);
  std::vector<Complex> out = fft::dft(in, g, fft::Direction::forward);
  const double scale = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] *= scale * detail::origin_phase(g, i);
  // Coefficients of real data are Hermitian; enforce it exactly so that
  // rounding noise in nearly empty bands never reads as asymmetry later.
  SpectralField F(g, std::move(out));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::size_t j = F.partner(i);
    if (j < i) continue;
    const Complex a = 0.5 * (F[i] + std::conj(F[j]));
    F[i] = a;
    F[j] = std::conj(a);
  }
  return F;
}

/// Inverse transform of a Hermitian-symmetric coefficient set.
inline GridField to_grid(const SpectralField& F) {
  const TorusGrid& g = F.grid();
  double defect = F.hermitian_defect();
  if (defect > kHermitianTolerance)
    throw std::domain_error("to_grid: coefficients violate Hermitian symmetry (defect " + std::to_string(defect) + ")");
  std::vector<Complex> in(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) in[i] = F[i] * detail::origin_phase(g, i);
  std::vector<Complex> out = fft::dft(in, g, fft::Direction::backward);
  GridField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = out[i].real();
  return f;
}

/// Modewise multiplication by symbol(n).
template <class Symbol>
SpectralField apply_multiplier(const SpectralField& F, Symbol&& symbol) {
  SpectralField out(F.grid());
  const TorusGrid& g = F.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    // Written out: the library complex product takes a slow NaN-recovery path.
    const Complex a = F[i], b = symbol(g.mode(i));
    out[i] = Complex(a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real());
  }
  return out;
}

/// Riesz transform R_j (1-based component), symbol i n_j / |n|. Mode 0 and
/// modes with n_j = -N/2 (no real partner for an odd symbol) map to 0.
inline SpectralField riesz(const SpectralField& F, int j) {
  const TorusGrid& g = F.grid();
  if (j < 1 || j > g.dim()) throw std::invalid_argument("riesz: component index out of range");
  const int a = j - 1;
  return apply_multiplier(F, [&](const Index& n) -> Complex {
    if (n[a] == -g.n() / 2) return 0.0;
    double r = mode_norm(n);
    if (r == 0.0) return 0.0;
    return Complex(0.0, n[a] / r);
  });
}

/// SQG velocity u = (-R_2 theta, R_1 theta) in spectral form.
inline std::vector<SpectralField> riesz_perp_velocity(const SpectralField& F) {
  if (F.grid().dim() != 2) throw std::invalid_argument("riesz_perp_velocity: requires d = 2");
  SpectralField u1 = riesz(F, 2);
  u1 *= -1.0;
  return {std::move(u1), riesz(F, 1)};
}

/// (-Delta)^{alpha/2}, symbol |n|^alpha, mode 0 -> 0.
inline SpectralField fractional_laplacian(const SpectralField& F, double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("fractional_laplacian: alpha must lie in (0, 2]");
  return apply_multiplier(F, [&](const Index& n) -> Complex {
    double r2 = mode_norm_sq(n);
    return r2 == 0.0 ? 0.0 : std::pow(r2, 0.5 * alpha);
  });
}

/// Spectral partial derivative along axis (0-based); Nyquist along that axis dropped.
inline SpectralField derivative(const SpectralField& F, int axis) {
  const TorusGrid& g = F.grid();
  return apply_multiplier(F, [&](const Index& n) -> Complex {
    if (n[axis] == -g.n() / 2) return 0.0;
    return Complex(0.0, static_cast<double>(n[axis]));
  });
}

inline std::vector<SpectralField> gradient(const SpectralField& F) {
  std::vector<SpectralField> out;
  for (int a = 0; a < F.grid().dim(); ++a) out.push_back(derivative(F, a));
  return out;
}

inline SpectralField laplacian(const SpectralField& F) {
  return apply_multiplier(F, [](const Index& n) -> Complex { return -mode_norm_sq(n); });
}

/// (-Delta)^{-1} on mean-zero fields, mode 0 -> 0.
inline SpectralField inverse_laplacian(const SpectralField& F) {
  return apply_multiplier(F, [](const Index& n) -> Complex {
    double r2 = mode_norm_sq(n);
    return r2 == 0.0 ? 0.0 : 1.0 / r2;
  });
}

/// Symbol of the 2d+1 point negative discrete Laplacian, sum_a (4/h^2) sin^2(n_a h / 2).
inline double discrete_laplacian_symbol(const TorusGrid& g, const Index& n) {
  const double h = g.spacing();
  double s = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    double v = std::sin(0.5 * n[a] * h);
    s += 4.0 * v * v / (h * h);
  }
  return s;
}

/// Inverse of the negative discrete Laplacian on mean-zero fields.
inline SpectralField discrete_inverse_laplacian(const SpectralField& F) {
  const TorusGrid& g = F.grid();
  return apply_multiplier(F, [&](const Index& n) -> Complex {
    double lam = discrete_laplacian_symbol(g, n);
    return lam == 0.0 ? 0.0 : 1.0 / lam;
  });
}

inline int dealias_cutoff(const TorusGrid& g) { return g.n() / 3; }

/// 2/3-rule projection: kills modes with any |n_a| > N/3.
inline SpectralField dealias(const SpectralField& F) {
  const TorusGrid& g = F.grid();
  const int cut = dealias_cutoff(g);
  return apply_multiplier(F, [&](const Index& n) -> Complex {
    for (int a = 0; a < g.dim(); ++a)
      if (std::abs(n[a]) > cut) return 0.0;
    return 1.0;
  });
}

inline void dealias_in_place(SpectralField& F) {
  const TorusGrid& g = F.grid();
  const int cut = dealias_cutoff(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    Index n = g.mode(i);
    for (int a = 0; a < g.dim(); ++a)
      if (std::abs(n[a]) > cut) {
        F[i] = 0.0;
        break;
      }
  }
}

/// Spectral divergence of a vector field, sum_a i n_a u_a(n).
inline SpectralField divergence(const std::vector<SpectralField>& u) {
  if (u.empty()) throw std::invalid_argument("divergence: empty vector field");
  SpectralField out(u[0].grid());
  for (std::size_t a = 0; a < u.size(); ++a) out += derivative(u[a], static_cast<int>(a));
  return out;
}

inline std::vector<SpectralField> to_spectral(const VectorField& u) {
  std::vector<SpectralField> out;
  out.reserve(u.size());
  for (const auto& c : u) out.push_back(to_spectral(c));
  return out;
}

inline VectorField to_grid(const std::vector<SpectralField>& u) {
  VectorField out;
  out.reserve(u.size());
  for (const auto& c : u) out.push_back(to_grid(c));
  return out;
}

/// Largest |div u(n)| over modes, relative to max |n| |u(n)|.
inline double divergence_defect(const VectorField& u) {
  auto uh = to_spectral(u);
  SpectralField div = divergence(uh);
  const TorusGrid& g = div.grid();
  double scale = 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double r = mode_norm(g.mode(i));
    for (const auto& c : uh) scale = std::max(scale, r * std::abs(c[i]));
    worst = std::max(worst, std::abs(div[i]));
  }
  return scale == 0.0 ? 0.0 : worst / scale;
}

/// Dealiased (u.grad) theta for a velocity already on the grid and theta in
/// spectral form; the product is re-projected by the 2/3 rule and mode 0 of
/// the result is exactly 0 (divergence-free transport carries no mean).
inline SpectralField advection_spectral(const VectorField& u, const SpectralField& theta_hat) {
  const TorusGrid& g = theta_hat.grid();
  SpectralField th = dealias(theta_hat);
  GridField prod(g);
  for (int a = 0; a < g.dim(); ++a) {
    GridField da = to_grid(derivative(th, a));
    const GridField& ua = u[a];
    for (std::size_t i = 0; i < g.size(); ++i) prod[i] += ua[i] * da[i];
  }
  SpectralField out = to_spectral(prod);
  dealias_in_place(out);
  out[0] = 0.0;
  return out;
}

/// Pseudo-spectral (u.grad) theta with 2/3-rule dealiasing of inputs and output.
inline GridField advection_term(const VectorField& u, const GridField& theta) {
  const TorusGrid& g = theta.grid();
  if (static_cast<int>(u.size()) != g.dim()) throw std::invalid_argument("advection_term: velocity has wrong arity");
  for (const auto& c : u) require_same_grid(c.grid(), g, "advection_term");
  VectorField ud;
  for (const auto& c : u) ud.push_back(to_grid(dealias(to_spectral(c))));
  return to_grid(advection_spectral(ud, to_spectral(theta)));
}

/// Convolution on the torus, (f * k)(x) = integral f(x - y) k(y) dy, as a multiplier.
inline SpectralField convolve(const SpectralField& F, const SpectralField& K) {
  require_same_grid(F.grid(), K.grid(), "convolve");
  SpectralField out(F.grid());
  const double vol = F.grid().volume();
  for (std::size_t i = 0; i < F.size(); ++i) out[i] = vol * F[i] * K[i];
  return out;
}

/// Trigonometric interpolant of a spectral field, evaluated off-grid.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const SpectralField& F) : F_(F) {}

  struct Jet {
    double value = 0.0;
    std::array<double, 3> grad{0.0, 0.0, 0.0};
    std::array<std::array<double, 3>, 3> hess{};
  };

  /// Value, gradient and Hessian at x; uses Re of the full sum so the Nyquist
  /// coefficient acts as a cosine.
  Jet eval(const std::array<double, 3>& x) const {
    const TorusGrid& g = F_.grid();
    const int d = g.dim();
    const int N = g.n();
    std::vector<std::vector<Complex>> ph(d, std::vector<Complex>(N));
    for (int a = 0; a < d; ++a)
      for (int m = 0; m < N; ++m) {
        int n = m >= N / 2 ? m - N : m;
        ph[a][m] = std::polar(1.0, n * x[a]);
      }
    Jet jet;
    for (std::size_t i = 0; i < g.size(); ++i) {
      Index k = g.unravel(i);
      Complex e = F_[i];
      for (int a = 0; a < d; ++a) e *= ph[a][k[a]];
      Index n = g.mode(i);
      jet.value += e.real();
      for (int a = 0; a < d; ++a) {
        jet.grad[a] += (Complex(0.0, n[a]) * e).real();
        for (int b = 0; b < d; ++b) jet.hess[a][b] += -static_cast<double>(n[a]) * n[b] * e.real();
      }
    }
    return jet;
  }

 private:
  SpectralField F_;
};

namespace detail {

/// Newton ascent of sign*f from x0 on the interpolant; returns the best value of sign*f seen.
inline double refine_extremum(const TrigInterpolant& ip, std::array<double, 3> x, int dim, double h, double sign) {
  TrigInterpolant::Jet jet = ip.eval(x);
  double best = sign * jet.value;
  for (int it = 0; it < 12; ++it) {
    std::array<double, 3> step{0.0, 0.0, 0.0};
    // Solve (sign*H) s = -(sign*g) for d <= 3 by Gaussian elimination; fall
    // back to a gradient step when the Hessian is not negative definite.
    double A[3][4];
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) A[a][b] = sign * jet.hess[a][b];
      A[a][3] = -sign * jet.grad[a];
    }
    bool ok = true;
    for (int c = 0; c < dim && ok; ++c) {
      int piv = c;
      for (int r = c + 1; r < dim; ++r)
        if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
      if (std::fabs(A[piv][c]) < 1e-300) {
        ok = false;
        break;
      }
      for (int k = 0; k < 4; ++k) std::swap(A[c][k], A[piv][k]);
      for (int r = 0; r < dim; ++r) {
        if (r == c) continue;
        double fct = A[r][c] / A[c][c];
        for (int k = c; k < 4; ++k) A[r][k] -= fct * A[c][k];
      }
    }
    double gs = 0.0;
    if (ok) {
      for (int a = 0; a < dim; ++a) {
        step[a] = A[a][3] / A[a][a];
        gs += step[a] * sign * jet.grad[a];
      }
    }
    if (!ok || gs <= 0.0) {
      double gn = 0.0;
      for (int a = 0; a < dim; ++a) gn += jet.grad[a] * jet.grad[a];
      gn = std::sqrt(gn);
      if (gn == 0.0) break;
      for (int a = 0; a < dim; ++a) step[a] = 0.25 * h * sign * jet.grad[a] / gn;
    }
    double sn = 0.0;
    for (int a = 0; a < dim; ++a) sn += step[a] * step[a];
    sn = std::sqrt(sn);
    if (sn > h) {
      for (int a = 0; a < dim; ++a) step[a] *= h / sn;
      sn = h;
    }
    std::array<double, 3> xn = x;
    for (int a = 0; a < dim; ++a) xn[a] += step[a];
    TrigInterpolant::Jet jn = ip.eval(xn);
    if (sign * jn.value < best - 1e-15 * std::max(1.0, std::fabs(best))) break;
    x = xn;
    jet = jn;
    best = std::max(best, sign * jn.value);
    if (sn < 1e-12) break;
  }
  return best;
}

inline double refined_extremum(const GridField& f, double sign, int candidates) {
  const TorusGrid& g = f.grid();
  std::vector<std::size_t> order(g.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(candidates), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) { return sign * f[a] > sign * f[b]; });
  TrigInterpolant ip(to_spectral(f));
  double best = sign * f[order[0]];
  for (std::size_t c = 0; c < k; ++c)
    best = std::max(best, refine_extremum(ip, g.point(order[c]), g.dim(), g.spacing(), sign));
  return sign * best;
}

}  // namespace detail

/// Maximum of the trigonometric interpolant, located by Newton refinement from
/// the largest grid values. Never below the grid maximum.
inline double refined_max(const GridField& f, int candidates = 6) { return detail::refined_extremum(f, 1.0, candidates); }
inline double refined_min(const GridField& f, int candidates = 6) { return detail::refined_extremum(f, -1.0, candidates); }
inline double refined_sup_norm(const GridField& f, int candidates = 6) {
  return std::max(std::fabs(refined_max(f, candidates)), std::fabs(refined_min(f, candidates)));
}

}  // namespace sqglab
