#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "sqglab/grid.hpp"
#include "sqglab/littlewood_paley.hpp"
#include "sqglab/mollifier.hpp"
#include "sqglab/spectral.hpp"
#include "sqglab/transport.hpp"

namespace sqglab {

/// (A, p, q, d) of the class U(r).
struct ClassParams {
  double A = 5.0;
  double p = 32.0 / 31.0;
  double q = 32.0;
  int d = 2;

  ClassParams() = default;
  ClassParams(double A_, double p_, int d_) : A(A_), p(p_), q(p_ / (p_ - 1.0)), d(d_) { validate(); }

  void validate() const {
    if (!(A > 1.0)) throw std::invalid_argument("ClassParams: A must exceed 1");
    if (!(p > 1.0)) throw std::invalid_argument("ClassParams: p must exceed 1");
    if (std::fabs(1.0 / p + 1.0 / q - 1.0) > 1e-14) throw std::invalid_argument("ClassParams: p and q are not conjugate");
  }
};

/// pair(f, g) = integral f g dx by the (periodic) rectangle rule.
inline double pair(const GridField& f, const GridField& g) {
  require_same_grid(f.grid(), g.grid(), "pair");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s * f.grid().cell_volume();
}

struct SizeCheck {
  bool ok = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
};

/// integral |psi|^p <= A r^{-(p-1)d}.
inline SizeCheck check_size(const GridField& psi, double r, const ClassParams& params) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("check_size: r must lie in (0, 1]");
  SizeCheck s;
  s.lhs = psi.lp_norm_pow(params.p);
  s.rhs = params.A * std::pow(r, -(params.p - 1.0) * params.d);
  s.margin = s.rhs - s.lhs;
  s.ok = s.lhs <= s.rhs;
  return s;
}

enum class Verdict { member, nonmember, undecided };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::member:
      return "member";
    case Verdict::nonmember:
      return "nonmember";
    case Verdict::undecided:
      return "undecided";
  }
  return "?";
}

struct MembershipReport {
  double r = 0.0;
  double size_lhs = 0.0;
  double size_rhs = 0.0;
  double lip_upper = 0.0;
  double lip_lower = 0.0;
  Verdict verdict = Verdict::undecided;
  double size_margin = 0.0;  // size_rhs - size_lhs
  double lip_margin = 0.0;   // r - lip_upper
};

struct MembershipOptions {
  /// Exact min-cost flow when |supp psi^+| |supp psi^-| is at most this.
  std::size_t exact_pairs = 65536;
  /// Greedy plan cost when the pair count is at most this.
  std::size_t greedy_pairs = 1'000'000;
  int lower_iterations = 20;
};

/// Size condition and Lipschitz-pairing condition of U(r). The pairing is
/// bracketed: lip_upper = min(flow bound, cost of an explicit transport plan),
/// lip_lower from a feasible Lipschitz function (only computed when needed).
inline MembershipReport check_membership(const GridField& psi, double r, const ClassParams& params,
                                         const MembershipOptions& opt = {}) {
  SizeCheck sz = check_size(psi, r, params);
  MembershipReport rep;
  rep.r = r;
  rep.size_lhs = sz.lhs;
  rep.size_rhs = sz.rhs;
  rep.size_margin = sz.margin;
  const double scale = std::max(1.0, psi.sup_norm());
  if (std::fabs(psi.mean()) > kMeanZeroTolerance * scale) {
    // Constants pair unboundedly with Lipschitz functions f + c.
    rep.lip_upper = rep.lip_lower = std::numeric_limits<double>::infinity();
    rep.lip_margin = -std::numeric_limits<double>::infinity();
    rep.verdict = Verdict::nonmember;
    return rep;
  }
  // Remove the (tolerated) rounding mean before the transport bounds.
  GridField z = psi;
  z += -psi.mean();
  rep.lip_upper = lip_dual_upper(z);
  TransportProblem tp = transport_problem(z);
  if (tp.pairs() <= opt.exact_pairs)
    rep.lip_upper = std::min(rep.lip_upper, min_cost_transport(tp));
  else if (tp.pairs() <= opt.greedy_pairs)
    rep.lip_upper = std::min(rep.lip_upper, greedy_transport(tp));
  rep.lip_lower = 0.0;
  if (sz.ok && rep.lip_upper > r) rep.lip_lower = lip_dual_lower(z, opt.lower_iterations);
  rep.lip_margin = r - rep.lip_upper;
  if (!sz.ok || rep.lip_lower > r)
    rep.verdict = Verdict::nonmember;
  else if (rep.lip_upper <= r)
    rep.verdict = Verdict::member;
  else
    rep.verdict = Verdict::undecided;
  return rep;
}

/// Dipole bump: a positive and a negative copy of exp(-1/(1-s^2)) of radius
/// r/2 centred at center +- (r/2) e_1, so the support lies in B_r(center);
/// scaled to ||phi||_p = 0.9 r^{-d/q}.
inline GridField make_bump(const TorusGrid& g, double r, const ClassParams& params,
                           const std::array<double, 3>& center = {0.0, 0.0, 0.0}) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("make_bump: r must lie in (0, 1]");
  if (r / g.spacing() < 4.0) throw std::invalid_argument("make_bump: r spans fewer than 4 grid cells");
  std::array<double, 3> cp = center, cm = center;
  cp[0] += 0.5 * r;
  cm[0] -= 0.5 * r;
  GridField plus = GridField::sample(
      g, [&](const std::array<double, 3>& x) { return bump_profile(periodic_distance(x, cp, g.dim()) / (0.5 * r)); });
  GridField minus = GridField::sample(
      g, [&](const std::array<double, 3>& x) { return bump_profile(periodic_distance(x, cm, g.dim()) / (0.5 * r)); });
  // Off-grid centres sample the two lobes differently; match their grid mass
  // so the result has mean zero.
  const double mp = plus.mean(), mm = minus.mean();
  if (mp == 0.0 || mm == 0.0) throw std::invalid_argument("make_bump: bump not resolved by the grid");
  GridField f = plus - minus * (mp / mm);
  const double nrm = f.lp_norm(params.p);
  if (nrm == 0.0) throw std::invalid_argument("make_bump: bump not resolved by the grid");
  f *= 0.9 * std::pow(r, -g.dim() / params.q) / nrm;
  return f;
}

/// Phi_j with Fourier coefficients c phi_j(n) (2 pi)^{-d}, so that
/// pair(g, Phi_j(. - y)) = c Delta_j g(y). j = -1 selects the low block
/// (omega, mean removed).
inline GridField make_lp_kernel(const LittlewoodPaleyFamily& fam, int j, double c) {
  if (j < -1 || j > fam.j_max)
    throw std::out_of_range("make_lp_kernel: j = " + std::to_string(j) + " outside [0, " + std::to_string(fam.j_max) + "]");
  const TorusGrid& g = fam.grid;
  SpectralField F(g);
  const double w = c / g.volume();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = mode_norm(g.mode(i));
    if (s == 0.0) continue;
    F[i] = w * (j < 0 ? fam.omega(s) : fam.phi_j(j, s));
  }
  return to_grid(F);
}

inline GridField make_lp_kernel(const LittlewoodPaleyFamily& fam, int j) {
  if (!(fam.kernel_scale > 0.0)) throw std::logic_error("make_lp_kernel: family kernel scale not calibrated");
  return make_lp_kernel(fam, j, fam.kernel_scale);
}

/// Scale 2^{-j} at which Phi_j is tested (the low block uses r = 1).
inline double lp_kernel_scale_r(int j) { return std::ldexp(1.0, -std::max(j, 0)); }

/// Family with the kernel scale c calibrated as the largest 2^{-m} for which
/// every Phi_j (and the low block) is certified a member of U(2^{-j}).
inline LittlewoodPaleyFamily build_lp_family(const TorusGrid& grid, const ClassParams& params = ClassParams{}) {
  LittlewoodPaleyFamily fam = lp_profile_family(grid);
  ClassParams prm = params;
  prm.d = grid.dim();
  // Both conditions are homogeneous in c: size of degree p, pairing of degree 1.
  double cmax = std::numeric_limits<double>::infinity();
  for (int j = -1; j <= fam.j_max; ++j) {
    GridField k1 = make_lp_kernel(fam, j, 1.0);
    const double r = lp_kernel_scale_r(j);
    const SizeCheck sz = check_size(k1, r, prm);
    cmax = std::min(cmax, r / lip_dual_upper(k1));
    cmax = std::min(cmax, std::pow(sz.rhs / sz.lhs, 1.0 / prm.p));
  }
  int m = static_cast<int>(std::ceil(-std::log2(cmax)));
  for (;; ++m) {
    const double c = std::ldexp(1.0, -m);
    bool all = true;
    for (int j = -1; j <= fam.j_max && all; ++j)
      all = check_membership(make_lp_kernel(fam, j, c), lp_kernel_scale_r(j), prm).verdict == Verdict::member;
    if (all) {
      fam.kernel_scale = c;
      return fam;
    }
    if (m > 200) throw std::runtime_error("build_lp_family: kernel scale calibration failed");
  }
}

struct Witness {
  double c = 0.0;
  GridField psi;
  /// ||(theta - c) 1_B||_q.
  double norm_q = 0.0;
  double lambda = 0.0;
  std::size_t ball_cells = 0;
};

/// Mean-zero optimal witness on the ball B_rho(center): c solves
/// integral_B sgn(theta - c)|theta - c|^{q-1} = 0 (bisection, strictly
/// decreasing in c), psi = lambda sgn(theta - c)|theta - c|^{q-1} 1_B with
/// lambda = rho^{-d/q} ||(theta - c) 1_B||_q^{-q/p}.
inline Witness mean_zero_witness(const GridField& theta, double rho, const std::array<double, 3>& center, double q) {
  if (!(q > 1.0)) throw std::invalid_argument("mean_zero_witness: q must exceed 1");
  const TorusGrid& g = theta.grid();
  const double p = q / (q - 1.0);
  std::vector<std::size_t> ball;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (periodic_distance(g.point(i), center, g.dim()) < rho) ball.push_back(i);
  if (ball.size() < 2) throw std::invalid_argument("mean_zero_witness: ball not resolved by the grid");
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (std::size_t i : ball) {
    lo = std::min(lo, theta[i]);
    hi = std::max(hi, theta[i]);
  }
  if (!(hi > lo)) throw std::invalid_argument("mean_zero_witness: theta is constant on the ball");
  auto objective = [&](double c) {
    double s = 0.0;
    for (std::size_t i : ball) {
      const double v = theta[i] - c;
      s += (v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0)) * std::pow(std::fabs(v), q - 1.0);
    }
    return s;
  };
  // Bisect to the resolution of double precision (the tolerance 1e-12 on c is
  // reached long before the loop stops).
  double a = lo, b = hi;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    if (objective(m) > 0.0)
      a = m;
    else
      b = m;
  }
  const double fa = objective(a), fb = objective(b);
  Witness w;
  w.c = (fa == fb) ? 0.5 * (a + b) : (std::fabs(fa) < std::fabs(fb) ? a : b);
  w.ball_cells = ball.size();
  double nq = 0.0;
  for (std::size_t i : ball) nq += std::pow(std::fabs(theta[i] - w.c), q);
  w.norm_q = std::pow(nq * g.cell_volume(), 1.0 / q);
  if (w.norm_q == 0.0) throw std::invalid_argument("mean_zero_witness: degenerate witness");
  w.lambda = std::pow(rho, -g.dim() / q) * std::pow(w.norm_q, -q / p);
  w.psi = GridField(g);
  for (std::size_t i : ball) {
    const double v = theta[i] - w.c;
    w.psi[i] = w.lambda * (v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0)) * std::pow(std::fabs(v), q - 1.0);
  }
  return w;
}

}  // namespace sqglab
