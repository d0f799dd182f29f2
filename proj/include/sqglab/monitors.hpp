#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqglab/grid.hpp"
#include "sqglab/holder.hpp"
#include "sqglab/kernel_oracle.hpp"
#include "sqglab/littlewood_paley.hpp"
#include "sqglab/mollifier.hpp"
#include "sqglab/parallel.hpp"
#include "sqglab/solver.hpp"
#include "sqglab/spectral.hpp"
#include "sqglab/test_class.hpp"

namespace sqglab {

/// Psi = |psi|^{p-2} psi pointwise.
inline GridField signed_power(const GridField& psi, double p) {
  GridField out(psi.grid());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double v = psi[i];
    out[i] = v == 0.0 ? 0.0 : std::copysign(std::pow(std::fabs(v), p - 1.0), v);
  }
  return out;
}

struct CheckResult {
  std::string name;
  bool passed = true;
  double worst = 0.0;      // largest observed violation measure
  double tolerance = 0.0;  // allowed value of `worst`
};

struct ForwardSample {
  double t = 0.0;
  double sup = 0.0;       // refined sup norm
  double lq_pow = 0.0;    // integral |theta|^q
  double envelope = 0.0;  // ||theta_0||_q^q e^{-t}
  double holder_lp = 0.0;
};

struct MonitorReport {
  std::vector<ForwardSample> samples;
  CheckResult max_principle{"max-principle"};
  CheckResult lq_decay{"lq-decay"};
};

/// Sup-norm monotonicity (allowing `sup_rate` ||theta_0||_inf per unit time)
/// and the L^q envelope ||theta||_q^q <= ||theta_0||_q^q e^{-t} (ratio <= 1 + envelope_slack).
inline MonitorReport monitor_forward(const Trajectory& traj, double q, double beta, const LittlewoodPaleyFamily& fam,
                                     double sup_rate = 1e-4, double envelope_slack = 0.01, bool with_holder = true) {
  MonitorReport rep;
  const auto& snaps = traj.snapshots();
  const double t0 = snaps.front().t;
  const double lq0 = snaps.front().theta.lp_norm_pow(q);
  const double sup0 = refined_sup_norm(snaps.front().theta);
  rep.max_principle.tolerance = sup_rate;
  rep.lq_decay.tolerance = envelope_slack;
  for (const auto& s : snaps) {
    ForwardSample fs;
    fs.t = s.t;
    fs.sup = refined_sup_norm(s.theta);
    fs.lq_pow = s.theta.lp_norm_pow(q);
    fs.envelope = lq0 * std::exp(-(s.t - t0));
    if (with_holder) fs.holder_lp = lp_seminorm(s.theta, beta, fam).value;
    rep.samples.push_back(fs);
  }
  for (std::size_t k = 1; k < rep.samples.size(); ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      const double dt = rep.samples[k].t - rep.samples[j].t;
      if (dt <= 0.0 || sup0 == 0.0) continue;
      // Growth rate relative to ||theta_0||_inf per unit time.
      const double rate = (rep.samples[k].sup - rep.samples[j].sup) / (sup0 * std::max(dt, 1.0));
      rep.max_principle.worst = std::max(rep.max_principle.worst, rate);
    }
    if (rep.samples[k].envelope > 0.0)
      rep.lq_decay.worst = std::max(rep.lq_decay.worst, rep.samples[k].lq_pow / rep.samples[k].envelope - 1.0);
    else if (rep.samples[k].lq_pow > 0.0)
      rep.lq_decay.worst = std::numeric_limits<double>::infinity();
  }
  rep.max_principle.passed = rep.max_principle.worst <= rep.max_principle.tolerance;
  rep.lq_decay.passed = rep.lq_decay.worst <= rep.lq_decay.tolerance;
  return rep;
}

struct PairingDrift {
  double P_t = 0.0;
  double P_ts = 0.0;
  double drift = 0.0;
};

/// |P(t) - P(t-s)| / max(|P(t)|, floor), P(tau) = pair(theta(tau), psi(tau)),
/// floor = 1e-12 ||theta(t)||_2 ||psi_t||_2.
inline PairingDrift pairing_conservation(const Trajectory& traj, const GridField& psi_t, double t, double s) {
  HistoryCursor cursor(traj);
  GridField psi_ts = detail::dual_solve(cursor, traj.config(), psi_t, t, s, false).psi.back();
  GridField th_t = to_grid(cursor.state_at(t));
  GridField th_ts = to_grid(cursor.state_at(t - s));
  PairingDrift d;
  d.P_t = pair(th_t, psi_t);
  d.P_ts = pair(th_ts, psi_ts);
  const double floor = 1e-12 * th_t.lp_norm(2.0) * psi_t.lp_norm(2.0);
  const double den = std::max(std::fabs(d.P_t), floor);
  d.drift = den > 0.0 ? std::fabs(d.P_t - d.P_ts) / den : 0.0;
  return d;
}

/// ||psi(tau)||_p along a backward path must not grow as tau decreases:
/// worst relative growth per unit time (at least one time unit of slack window).
inline CheckResult dual_lp_monotonicity(const DualPath& path, double p, double rate = 1e-4) {
  CheckResult c{"dual-lp-monotone", true, 0.0, rate};
  std::vector<double> norms;
  for (const auto& f : path.psi) norms.push_back(f.lp_norm(p));
  for (std::size_t k = 1; k < norms.size(); ++k)
    for (std::size_t j = 0; j < k; ++j) {
      if (norms[j] == 0.0) continue;
      const double dt = std::fabs(path.tau[j] - path.tau[k]);
      c.worst = std::max(c.worst, (norms[k] - norms[j]) / (norms[j] * std::max(dt, 1.0)));
    }
  c.passed = c.worst <= rate;
  return c;
}

struct DualLpDerivative {
  double value_spectral = 0.0;
  double value_symmetrized = 0.0;
  double calibration = 0.0;  // single-mode symbol K of the kernel sum
  double min_term = 0.0;     // smallest summand of the double sum
};

/// d/dtau integral |psi|^p two ways: p pair(Psi, (-Delta)^{alpha/2} psi), and
/// the symmetrized double sum (p/2) K^{-1} h^{2d} sum_x sum_k W(k) (Psi(x) -
/// Psi(x-kh)) (psi(x) - psi(x-kh)) with every kernel weight W >= 0 (lattice
/// sum, far-field tail as a constant weight, near-field defect as a
/// nearest-neighbour stencil), calibrated by its symbol K at mode e_1.
inline DualLpDerivative dual_lp_derivative(const GridField& psi, double p, double alpha, int lattice_radius = 20) {
  if (!(p >= 2.0)) throw std::invalid_argument("dual_lp_derivative: requires p >= 2");
  const TorusGrid& g = psi.grid();
  GridField Psi = signed_power(psi, p);
  DualLpDerivative out;
  out.value_spectral = p * pair(Psi, to_grid(fractional_laplacian(to_spectral(psi), alpha)));

  LatticeKernel K = build_lattice_kernel(g, alpha, lattice_radius);
  const double h = g.spacing();
  const std::size_t n = g.size();
  std::vector<double> W(n);
  for (std::size_t k = 0; k < n; ++k) W[k] = K.periodized[k] + K.tail / static_cast<double>(n);
  W[0] = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    Index e{0, 0, 0};
    e[a] = 1;
    W[g.ravel(e)] += 0.5 * K.near / (h * h);
    e[a] = -1;
    W[g.ravel(e)] += 0.5 * K.near / (h * h);
  }
  for (double w : W)
    if (w < 0.0) throw std::logic_error("dual_lp_derivative: negative kernel weight");
  double cal = 0.0;
  for (std::size_t k = 0; k < n; ++k) cal += W[k] * (1.0 - std::cos(g.mode(k)[0] * h));
  out.calibration = cal;

  const std::size_t chunk = 16;
  const std::size_t nch = (n + chunk - 1) / chunk;
  std::vector<double> part(nch, 0.0), mins(nch, HUGE_VAL);
  parallel_chunks(n, chunk, [&](std::size_t b, std::size_t e) {
    double s = 0.0, mn = HUGE_VAL;
    for (std::size_t x = b; x < e; ++x) {
      const Index kx = g.unravel(x);
      for (std::size_t k = 1; k < n; ++k) {
        const Index kk = g.unravel(k);
        Index ky = kx;
        for (int a = 0; a < g.dim(); ++a) ky[a] -= kk[a];
        const std::size_t y = g.ravel(ky);
        const double term = W[k] * (Psi[x] - Psi[y]) * (psi[x] - psi[y]);
        s += term;
        mn = std::min(mn, term);
      }
    }
    part[b / chunk] = s;
    mins[b / chunk] = mn;
  });
  double total = 0.0;
  for (double v : part) total += v;
  out.min_term = *std::min_element(mins.begin(), mins.end());
  out.value_symmetrized = 0.5 * p / cal * g.cell_volume() * total;
  return out;
}

struct MollifiedPairingBound {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
  /// C in 2 r ||grad chi_r||_p <= C r^{-d/q}, measured.
  double C = 0.0;
  /// Pairing against Lip(1) below 2r and ||psi||_p >= A^{1/p} r^{-d/q} / 2.
  bool hypothesis_met = false;
  double lip_upper = 0.0;
};

/// lhs = integral integral psi(x) Psi(y) chi_r(x - y), rhs = 2 C A^{-1/p} ||psi||_p^p.
inline MollifiedPairingBound mollified_pairing_bound(const GridField& psi, double p, double r, double A) {
  const TorusGrid& g = psi.grid();
  const double q = p / (p - 1.0);
  const int d = g.dim();
  Mollifier chi(g, r);
  GridField eta = chi.convolve(signed_power(psi, p));
  MollifiedPairingBound out;
  out.lhs = pair(psi, eta);
  VectorField grad = chi.gradient_samples();
  GridField gmag(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = 0.0;
    for (const auto& c : grad) s += c[i] * c[i];
    gmag[i] = std::sqrt(s);
  }
  out.C = 2.0 * r * gmag.lp_norm(p) * std::pow(r, d / q);
  const double np = psi.lp_norm(p);
  out.rhs = 2.0 * out.C * std::pow(A, -1.0 / p) * std::pow(np, p);
  out.ok = std::fabs(out.lhs) <= out.rhs;
  const double scale = std::max(1.0, psi.sup_norm());
  if (std::fabs(psi.mean()) <= kMeanZeroTolerance * scale && np > 0.0) {
    GridField z = psi;
    z += -psi.mean();
    TransportProblem tp = transport_problem(z);
    out.lip_upper = lip_dual_upper(z);
    if (tp.pairs() <= 65536) out.lip_upper = std::min(out.lip_upper, min_cost_transport(tp));
    out.hypothesis_met = out.lip_upper < 2.0 * r && np >= 0.5 * std::pow(A, 1.0 / p) * std::pow(r, -d / q);
  }
  return out;
}

struct SmoothRoughSplit {
  double I = 0.0;          // |pair(psi(t), f(t))|
  double II = 0.0;         // |int int (u - u_r).grad f psi|
  double lhs = 0.0;        // pair(psi(t - s), f0)
  double identity_residual = 0.0;  // |lhs - (signed I + signed II)|
  double f_lip_t = 0.0;    // sampled Lipschitz constant of f(t)
};

/// Smooth/rough split of pair(psi(t-s), f0): f solves the passive equation
/// with mollified velocity u_r = R_perp(theta * chi_r) from t - s to t, psi
/// the backward dual from t. The rough part is integrated by the trapezoid
/// rule over the forward step times inside [t - s, t].
inline SmoothRoughSplit smooth_rough_split(const Trajectory& traj, const GridField& psi_t, double t, double s, double r,
                                           const GridField& f0) {
  if (!(s > 0.0)) throw std::invalid_argument("smooth_rough_split: s must be positive");
  const TorusGrid& g = traj.grid();
  auto cursor = std::make_shared<HistoryCursor>(traj);
  if (t > cursor->t_final() + 1e-12 || t - s < cursor->t_start() - 1e-12)
    throw std::out_of_range("smooth_rough_split: [t - s, t] is not covered by the velocity history");
  auto chi = std::make_shared<Mollifier>(g, r);
  // theta interpolated linearly between stored steps (as the dual velocity is).
  auto theta_at = [cursor](double tau) {
    const auto& ts = cursor->step_times();
    if (ts.size() == 1) return cursor->state(0);
    const std::size_t k = cursor->interval(tau);
    const double w = std::clamp((tau - ts[k]) / (ts[k + 1] - ts[k]), 0.0, 1.0);
    SpectralField a = cursor->state(k);
    a *= 1.0 - w;
    SpectralField b = cursor->state(k + 1);
    b *= w;
    a += b;
    return a;
  };
  VelocitySupplier ur = [theta_at, chi](double tau) {
    return to_grid(riesz_perp_velocity(chi->convolve(dealias(theta_at(tau)))));
  };
  SolverConfig pcfg = traj.config();
  pcfg.velocity_mode = VelocityMode::prescribed;
  pcfg.snapshot_stride = 1;
  Trajectory ftraj = simulate_passive(ur, f0, t - s, t, pcfg);
  DualPath dual = dual_backward_path(traj, psi_t, t, s);

  SmoothRoughSplit out;
  const GridField& ft = ftraj.final_state();
  const double I_signed = pair(psi_t, ft);
  out.I = std::fabs(I_signed);
  out.lhs = pair(dual.psi.back(), f0);
  out.f_lip_t = sampled_lipschitz(ft);

  // Rough-part integrand at the dual path times; f via the passive history.
  HistoryCursor fcur(ftraj);
  auto integrand = [&](double tau, const GridField& psi) {
    VectorField u = cursor->velocity(tau);
    VectorField uf = ur(tau);
    VectorField diff;
    for (int a = 0; a < g.dim(); ++a) diff.push_back(u[a] - uf[a]);
    GridField adv = to_grid(advection_spectral(diff, fcur.state_at(tau)));
    return pair(adv, psi);
  };
  double II_signed = 0.0;
  double prev_val = integrand(dual.tau[0], dual.psi[0]);
  for (std::size_t k = 1; k < dual.tau.size(); ++k) {
    const double val = integrand(dual.tau[k], dual.psi[k]);
    II_signed += 0.5 * (prev_val + val) * (dual.tau[k - 1] - dual.tau[k]);
    prev_val = val;
  }
  // d/dtau pair(f, psi) = pair((u_r - u).grad f, psi), so
  // pair(psi(t - s), f0) = pair(psi(t), f(t)) + integral pair((u - u_r).grad f, psi).
  out.II = std::fabs(II_signed);
  out.identity_residual = std::fabs(out.lhs - (I_signed + II_signed));
  return out;
}

struct SplitSample {
  double s = 0.0;
  double r = 0.0;
  double I = 0.0;
};

/// Least-squares C in ln(I / r) = C s r^{beta - 1 - d/q} (through the origin).
inline double fit_smooth_growth(const std::vector<SplitSample>& samples, double beta, double d_over_q) {
  double sxx = 0.0, sxy = 0.0;
  for (const auto& sm : samples) {
    if (!(sm.I > 0.0)) continue;
    const double x = sm.s * std::pow(sm.r, beta - 1.0 - d_over_q);
    const double y = std::log(sm.I / sm.r);
    sxx += x * x;
    sxy += x * y;
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace sqglab
