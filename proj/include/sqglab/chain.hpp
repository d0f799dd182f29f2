#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqglab {

/// Free constants of the estimate chain (symbolic in the analysis; default 1).
struct KernelConstants {
  double C = 1.0;        // estimator constant in 1 - 2 C A^{-1/p} > 1/2
  double C_q = 1.0;      // rough-part constant in the r0 constraint
  double c = 1.0;        // L^p decay rate constant
  double c_prime = 1.0;  // kernel domination constant
  double C_alpha = 1.0;  // fractional Laplacian normalization

  void validate() const {
    if (!(C > 0 && C_q > 0 && c > 0 && c_prime > 0 && C_alpha > 0))
      throw std::invalid_argument("KernelConstants: all constants must be positive");
  }
  /// L^inf -> L^q embedding constant on the torus, (2 pi)^{d/q}.
  static double embedding(int d, double q) { return std::pow(2.0 * std::numbers::pi, d / q); }
};

struct Exponents {
  double beta = 0.0;
  double p = 0.0;
  double q = 0.0;
};

/// beta on the 0.05 lattice with beta >= max(0.5, 1 - alpha + 0.05), then the
/// smallest q = 2^n with d/q <= (beta + alpha - 1)/4, requiring both margins
/// beta - (1 - alpha) and beta + alpha - d/q - 1 to be >= 0.05; beta is raised
/// along the lattice (up to 0.95) until that is possible.
inline Exponents select_exponents(double alpha, int d) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("select_exponents: alpha must lie in (0, 1)");
  if (d < 1) throw std::invalid_argument("select_exponents: d must be >= 1");
  const double floor_beta = std::max(0.5, 1.0 - alpha + 0.05);
  int b = static_cast<int>(std::ceil(floor_beta / 0.05 - 1e-9));
  for (; b <= 19; ++b) {
    const double beta = 0.05 * b;
    const double gap = beta + alpha - 1.0;
    if (beta - (1.0 - alpha) < 0.05 - 1e-12 || gap <= 0.0) continue;
    double q = 2.0;
    while (d / q > gap / 4.0) q *= 2.0;
    if (gap - d / q >= 0.05 - 1e-12) return {beta, q / (q - 1.0), q};
  }
  throw std::domain_error("select_exponents: no beta < 1 on the 0.05 lattice satisfies the margins at alpha = " +
                          std::to_string(alpha));
}

/// A = ceil(1.05 (4C)^p), so 1 - 2 C A^{-1/p} > 1/2.
inline double solve_A(const KernelConstants& k, double p) {
  if (!(k.C > 0.0)) throw std::invalid_argument("solve_A: C must be positive");
  const double A = std::ceil(std::pow(4.0 * k.C, p) * 1.05);
  if (!(1.0 - 2.0 * k.C * std::pow(A, -1.0 / p) > 0.5)) throw std::logic_error("solve_A: constraint not met");
  return A;
}

inline double delta_bound(double beta, double q, int d, const KernelConstants& k) {
  const double f = 1.0 / (1.0 + d / (beta * q));
  return std::min({beta * std::numbers::ln2, f * std::numbers::ln2, f * k.c});
}

/// 0.99 times the largest admissible delta.
inline double solve_delta(double beta, double q, int d, const KernelConstants& k) { return 0.99 * delta_bound(beta, q, d, k); }

inline double r0_exponent(double alpha, double beta, double q, int d) { return beta - d / q - 1.0 + alpha; }

/// Root of C_q A^{1/p} r^{beta - d/q - 1 + alpha} = delta (1/beta - 1), capped at 1.
inline double solve_r0(double alpha, double beta, double p, double q, int d, double A, double delta,
                       const KernelConstants& k) {
  const double e = r0_exponent(alpha, beta, q, d);
  if (!(e > 0.0)) throw std::domain_error("solve_r0: nonpositive exponent beta - d/q - 1 + alpha");
  const double rhs = delta * (1.0 / beta - 1.0);
  if (!(rhs > 0.0)) return 0.0;
  const double r = std::pow(rhs / (k.C_q * std::pow(A, 1.0 / p)), 1.0 / e);
  return std::min(r, 1.0);
}

/// T0 = max(0, q ln(C_emb ||theta0||_inf A^{1/p} r0^{-(beta + d/q)})): the time
/// after which the L^q decay makes |<theta, psi>| <= r^beta for psi in U(r), r >= r0.
inline double compute_T0(double theta_sup, double beta, double p, double q, int d, double A, double r0) {
  if (theta_sup <= 0.0) return 0.0;
  const double arg = KernelConstants::embedding(d, q) * theta_sup * std::pow(A, 1.0 / p) * std::pow(r0, -(beta + d / q));
  return std::max(0.0, q * std::log(arg));
}

struct EventualTime {
  double T = 0.0;
  std::vector<double> T_k;  // T_0, T_1, ..., T_19
};

/// T = T0 + beta r0^alpha / (1 - e^{-delta alpha}); T_k its partial sums.
inline EventualTime eventual_time(double T0, double beta, double r0, double alpha, double delta, int terms = 20) {
  EventualTime et;
  const double s = beta * std::pow(r0, alpha);
  et.T = T0 + s / (1.0 - std::exp(-delta * alpha));
  double acc = T0;
  for (int k = 0; k < terms; ++k) {
    et.T_k.push_back(acc);
    acc += s * std::exp(-delta * alpha * k);
  }
  return et;
}

struct ParameterChain {
  double alpha = 0.0;
  int d = 2;
  double beta = 0.0, p = 0.0, q = 0.0;
  double A = 0.0;
  double delta = 0.0;
  double r0 = 0.0;
  double theta_sup = 1.0;
  double T0 = 0.0;
  double T = 0.0;
  std::vector<double> T_k;
};

struct ChainResiduals {
  double beta_gap = 0.0;      // beta - (1 - alpha)
  double exponent_gap = 0.0;  // beta + alpha - d/q - 1
  double A = 0.0;             // 1 - 2 C A^{-1/p} - 1/2
  double delta = 0.0;         // delta bound - delta
  double r0 = 0.0;            // delta (1/beta - 1) - C_q A^{1/p} r0^{e}
  bool T_finite = false;

  bool all_positive() const { return beta_gap > 0 && exponent_gap > 0 && A > 0 && delta > 0 && r0 > 0 && T_finite; }
};

inline ChainResiduals verify_chain(const ParameterChain& ch, const KernelConstants& k) {
  ChainResiduals res;
  res.beta_gap = ch.beta - (1.0 - ch.alpha);
  res.exponent_gap = ch.beta + ch.alpha - ch.d / ch.q - 1.0;
  res.A = 1.0 - 2.0 * k.C * std::pow(ch.A, -1.0 / ch.p) - 0.5;
  res.delta = delta_bound(ch.beta, ch.q, ch.d, k) - ch.delta;
  res.r0 = ch.delta * (1.0 / ch.beta - 1.0) -
           k.C_q * std::pow(ch.A, 1.0 / ch.p) * std::pow(ch.r0, r0_exponent(ch.alpha, ch.beta, ch.q, ch.d));
  res.T_finite = std::isfinite(ch.T) && std::isfinite(ch.T0);
  return res;
}

/// Full pipeline. r0 is taken at 0.99 of the root so the (r0) residual is
/// strictly positive rather than zero up to rounding.
inline ParameterChain build_chain(double alpha, int d, double theta_sup, const KernelConstants& k) {
  k.validate();
  ParameterChain ch;
  ch.alpha = alpha;
  ch.d = d;
  ch.theta_sup = theta_sup;
  Exponents e = select_exponents(alpha, d);
  ch.beta = e.beta;
  ch.p = e.p;
  ch.q = e.q;
  ch.A = solve_A(k, ch.p);
  ch.delta = solve_delta(ch.beta, ch.q, d, k);
  ch.r0 = 0.99 * solve_r0(alpha, ch.beta, ch.p, ch.q, d, ch.A, ch.delta, k);
  ch.T0 = compute_T0(theta_sup, ch.beta, ch.p, ch.q, d, ch.A, ch.r0);
  EventualTime et = eventual_time(ch.T0, ch.beta, ch.r0, alpha, ch.delta);
  ch.T = et.T;
  ch.T_k = et.T_k;
  return ch;
}

struct Sensitivity {
  std::string name;
  double dlogT_dlogx = 0.0;  // relative sensitivity of T
};

/// Central finite-difference elasticities of T with respect to each free
/// constant and ||theta0||_inf (1% relative perturbation).
inline std::vector<Sensitivity> chain_sensitivities(double alpha, int d, double theta_sup, const KernelConstants& k) {
  std::vector<Sensitivity> out;
  const double h = 0.01;
  auto T_of = [&](KernelConstants kk, double sup) { return build_chain(alpha, d, sup, kk).T; };
  auto add = [&](const std::string& name, auto&& mutate) {
    KernelConstants up = k, dn = k;
    double su = theta_sup, sd = theta_sup;
    mutate(up, su, 1.0 + h);
    mutate(dn, sd, 1.0 - h);
    const double Tu = T_of(up, su), Td = T_of(dn, sd);
    out.push_back({name, (std::log(Tu) - std::log(Td)) / (std::log1p(h) - std::log1p(-h))});
  };
  add("C", [](KernelConstants& kk, double&, double f) { kk.C *= f; });
  add("C_q", [](KernelConstants& kk, double&, double f) { kk.C_q *= f; });
  add("c", [](KernelConstants& kk, double&, double f) { kk.c *= f; });
  add("theta_sup", [](KernelConstants&, double& s, double f) { s *= f; });
  return out;
}

}  // namespace sqglab
