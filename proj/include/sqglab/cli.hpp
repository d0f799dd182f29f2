#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "sqglab/chain.hpp"
#include "sqglab/holder.hpp"
#include "sqglab/initial_conditions.hpp"
#include "sqglab/io/config.hpp"
#include "sqglab/io/files.hpp"
#include "sqglab/kernel_oracle.hpp"
#include "sqglab/monitors.hpp"
#include "sqglab/solver.hpp"
#include "sqglab/test_class.hpp"

namespace sqglab::cli {

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"simulate", "dual-pair", "holder-scan", "chain", "verify-kernel"};
  return s;
}

namespace detail {

inline std::string num(double v) { return io::csv_number(v); }

/// Config header lines shared by every text artifact.
inline std::vector<std::string> header(const std::string& sub, const io::RunConfig& rc) {
  std::vector<std::string> h{"subcommand=" + sub};
  for (const auto& l : io::config_lines(rc)) h.push_back(l);
  return h;
}

inline std::string commented(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += "# " + l + "\n";
  return s;
}

inline SolverConfig solver_config(const io::RunConfig& rc) {
  SolverConfig sc;
  sc.alpha = rc.alpha;
  sc.epsilon = rc.epsilon;
  sc.dim = rc.d;
  sc.n = rc.N;
  sc.dt = rc.dt;
  sc.t_end = rc.t_end;
  sc.mollifier_r = rc.mollifier_r;
  sc.snapshot_stride = rc.snapshot_stride;
  sc.seed = rc.seed;
  sc.init = InitialCondition{rc.init, rc.init_amplitude, Index{rc.init_k1, rc.init_k2, rc.init_k3}, rc.init_band};
  sc.dissipation = rc.dissipation;
  sc.cfl = rc.cfl;
  sc.series_q = rc.q;
  if (rc.velocity == "riesz-perp") {
    sc.velocity_mode = VelocityMode::riesz_perp;
  } else if (rc.velocity == "mollified") {
    sc.velocity_mode = VelocityMode::mollified;
  } else {
    const TorusGrid g = sc.grid();
    sc.velocity_mode = VelocityMode::prescribed;
    sc.prescribed = [g](double) { return VectorField(static_cast<std::size_t>(g.dim()), GridField(g)); };
  }
  return sc;
}

inline GridField initial_field(const SolverConfig& sc) { return make_initial_condition(sc.grid(), sc.init, sc.seed); }

inline void write_text(const std::filesystem::path& p, const std::string& s) { io::atomic_write(p, s); }

inline int simulate(const io::RunConfig& rc, const std::filesystem::path& out) {
  const SolverConfig sc = solver_config(rc);
  const GridField theta0 = initial_field(sc);
  const Trajectory traj = simulate_forward(sc, theta0);
  const LittlewoodPaleyFamily fam = lp_profile_family(traj.grid());
  const MonitorReport mon = monitor_forward(traj, rc.q, rc.beta, fam);
  std::vector<double> holder;
  for (const auto& s : mon.samples) holder.push_back(s.holder_lp);

  const auto hdr = header("simulate", rc);
  io::atomic_write(out / "timeseries.csv", io::encode_timeseries(hdr, traj.series(), holder));
  io::write_snapshot(out / "snapshot_initial.sqg", theta0, {rc.alpha, traj.t_start()});
  io::write_snapshot(out / "snapshot_final.sqg", traj.final_state(), {rc.alpha, traj.t_final()});
  write_text(out / "config.txt", io::config_text(rc));

  std::string rep = commented(hdr);
  rep += "steps=" + std::to_string(traj.steps()) + "\n";
  rep += "snapshots=" + std::to_string(traj.snapshots().size()) + "\n";
  for (const CheckResult* c : {&mon.max_principle, &mon.lq_decay})
    rep += c->name + "=" + (c->passed ? "pass" : "fail") + " worst=" + num(c->worst) + " tolerance=" + num(c->tolerance) + "\n";
  write_text(out / "report.txt", rep);
  std::cout << rep;
  return 0;
}

inline int dual_pair(const io::RunConfig& rc, const std::filesystem::path& out) {
  const SolverConfig sc = solver_config(rc);
  if (rc.dual_s > rc.t_end) throw std::invalid_argument("dual-pair: dual_s must not exceed t_end");
  const Trajectory traj = simulate_forward(sc, initial_field(sc));
  const InitialCondition pic{rc.psi_init, 1.0, Index{rc.psi_k1, rc.psi_k2, rc.psi_k3}, rc.init_band};
  const GridField psi_t = make_initial_condition(traj.grid(), pic, rc.psi_seed);
  const double t = traj.t_final();

  const DualPath path = dual_backward_path(traj, psi_t, t, rc.dual_s);
  HistoryCursor cursor(traj);
  const auto hdr = header("dual-pair", rc);
  std::string csv = commented(hdr) + "tau,pairing,psi_lp\n";
  for (std::size_t i = 0; i < path.tau.size(); ++i) {
    const GridField th = to_grid(cursor.state_at(path.tau[i]));
    csv += num(path.tau[i]) + "," + num(pair(th, path.psi[i])) + "," + num(path.psi[i].lp_norm(rc.dual_p)) + "\n";
  }
  io::atomic_write(out / "dual_pair.csv", csv);
  write_text(out / "config.txt", io::config_text(rc));

  const PairingDrift drift = pairing_conservation(traj, psi_t, t, rc.dual_s);
  const CheckResult mono = dual_lp_monotonicity(path, rc.dual_p);
  std::string rep = commented(hdr);
  rep += "P_t=" + num(drift.P_t) + "\nP_t_minus_s=" + num(drift.P_ts) + "\ndrift=" + num(drift.drift) + "\n";
  rep += mono.name + "=" + (mono.passed ? "pass" : "fail") + " worst=" + num(mono.worst) + "\n";
  write_text(out / "report.txt", rep);
  std::cout << rep;
  return 0;
}

inline int holder_scan(const io::RunConfig& rc, const std::filesystem::path& out) {
  GridField g;
  std::string source;
  if (!rc.snapshot.empty()) {
    g = io::read_snapshot(rc.snapshot).field;
    source = rc.snapshot;
  } else {
    const SolverConfig sc = solver_config(rc);
    g = initial_field(sc);
    source = "init:" + rc.init;
  }
  const ClassParams params(rc.class_A, rc.class_p, g.grid().dim());
  const LittlewoodPaleyFamily fam = build_lp_family(g.grid(), params);
  const HolderReport rep = holder_report(g, rc.beta, fam, rc.translate_stride);

  const auto hdr = header("holder-scan", rc);
  std::string csv = commented(hdr) + "j,lp_block_sup,lp_weighted,pairing_block_sup,pairing_weighted\n";
  for (std::size_t i = 0; i < rep.lp_table.size(); ++i) {
    const auto& a = rep.lp_table[i];
    const auto& b = rep.pairing_table[i];
    csv += std::to_string(a.j) + "," + num(a.block_sup) + "," + num(a.weighted) + "," + num(b.block_sup) + "," +
           num(b.weighted) + "\n";
  }
  io::atomic_write(out / "holder_scan.csv", csv);
  write_text(out / "config.txt", io::config_text(rc));

  std::string txt = commented(hdr);
  txt += "source=" + source + "\nkernel_scale=" + num(fam.kernel_scale) + "\n";
  txt += "lp_value=" + num(rep.lp_value) + "\ndirect_value=" + num(rep.direct_value) +
         "\npairing_value=" + num(rep.pairing_value) + "\n";
  txt += "direct_arg_distance=" + num(rep.direct.arg_distance) + "\n";
  write_text(out / "report.txt", txt);
  std::cout << txt;
  return 0;
}

inline int chain(const io::RunConfig& rc, const std::filesystem::path& out) {
  const KernelConstants k{rc.C, rc.C_q, rc.c, rc.c_prime, rc.C_alpha};
  const ParameterChain ch = build_chain(rc.alpha, rc.d, rc.theta_sup, k);
  const ChainResiduals res = verify_chain(ch, k);
  std::string txt = commented(header("chain", rc));
  txt += "beta=" + num(ch.beta) + "\np=" + num(ch.p) + "\nq=" + num(ch.q) + "\nA=" + num(ch.A) +
         "\ndelta=" + num(ch.delta) + "\nr0=" + num(ch.r0) + "\nT0=" + num(ch.T0) + "\nT=" + num(ch.T) + "\n";
  for (std::size_t i = 0; i < ch.T_k.size(); ++i) txt += "T_" + std::to_string(i) + "=" + num(ch.T_k[i]) + "\n";
  txt += "residual_beta=" + num(res.beta_gap) + "\nresidual_exponent=" + num(res.exponent_gap) +
         "\nresidual_A=" + num(res.A) + "\nresidual_delta=" + num(res.delta) + "\nresidual_r0=" + num(res.r0) +
         "\nT_finite=" + (res.T_finite ? "true" : "false") + "\nall_positive=" + (res.all_positive() ? "true" : "false") +
         "\n";
  for (const auto& s : chain_sensitivities(rc.alpha, rc.d, rc.theta_sup, k))
    txt += "sensitivity_" + s.name + "=" + num(s.dlogT_dlogx) + "\n";
  write_text(out / "chain.txt", txt);
  write_text(out / "config.txt", io::config_text(rc));
  std::cout << txt;
  return res.all_positive() ? 0 : 1;
}

struct KernelRatio {
  Index n{0, 0, 0};
  double norm = 0.0;
  double ratio = 0.0;
};

/// Lattice-sum symbol over |n|^alpha at every mode with 1 <= |n| <= max_mode
/// (n_1 >= 0), and the relative spread (max - min) / mean of the ratios.
inline std::vector<KernelRatio> kernel_ratios(const LatticeKernel& K, int max_mode, double& spread) {
  std::vector<KernelRatio> rows;
  const int d = K.grid.dim();
  const int m = max_mode;
  for (int a = 0; a <= m; ++a)
    for (int b = (d > 1 ? -m : 0); b <= (d > 1 ? m : 0); ++b)
      for (int c = (d > 2 ? -m : 0); c <= (d > 2 ? m : 0); ++c) {
        const Index n{a, b, c};
        const double r = mode_norm(n);
        if (r < 1.0 || r > m) continue;
        if (a == 0 && (b < 0 || (b == 0 && c < 0))) continue;
        rows.push_back({n, r, K.symbol(n) / std::pow(r, K.alpha)});
      }
  double lo = 1e300, hi = -1e300, mean = 0.0;
  for (const auto& r : rows) {
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
    mean += r.ratio;
  }
  mean /= static_cast<double>(rows.size());
  spread = (hi - lo) / mean;
  return rows;
}

inline constexpr double kKernelSpreadTolerance = 1e-3;

inline int verify_kernel(const io::RunConfig& rc, const std::filesystem::path& out) {
  if (!(rc.alpha > 0.0 && rc.alpha < 2.0)) throw std::invalid_argument("verify-kernel: alpha must lie in (0, 2)");
  if (2 * rc.max_mode >= rc.N) throw std::invalid_argument("verify-kernel: max_mode must be below N/2");
  const LatticeKernel K = build_lattice_kernel(TorusGrid(rc.d, rc.N), rc.alpha, rc.lattice_radius);
  double spread = 0.0;
  const auto rows = kernel_ratios(K, rc.max_mode, spread);
  const auto hdr = header("verify-kernel", rc);
  std::string csv = commented(hdr) + "n1,n2,n3,norm,ratio\n";
  for (const auto& r : rows)
    csv += std::to_string(r.n[0]) + "," + std::to_string(r.n[1]) + "," + std::to_string(r.n[2]) + "," + num(r.norm) +
           "," + num(r.ratio) + "\n";
  io::atomic_write(out / "verify_kernel.csv", csv);
  write_text(out / "config.txt", io::config_text(rc));
  const bool ok = spread < kKernelSpreadTolerance;
  std::string txt = commented(hdr);
  txt += "modes=" + std::to_string(rows.size()) + "\nspread=" + num(spread) + "\ntolerance=" + num(kKernelSpreadTolerance) +
         "\nresult=" + (ok ? "pass" : "fail") + "\n";
  write_text(out / "report.txt", txt);
  std::cout << txt;
  return ok ? 0 : 1;
}

}  // namespace detail

/// Runs one subcommand, writing its artifacts into `out` (created if needed).
/// Module errors propagate as exceptions; the caller maps them to an exit code.
inline int run_subcommand(const std::string& sub, const io::RunConfig& rc, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  if (sub == "simulate") return detail::simulate(rc, out);
  if (sub == "dual-pair") return detail::dual_pair(rc, out);
  if (sub == "holder-scan") return detail::holder_scan(rc, out);
  if (sub == "chain") return detail::chain(rc, out);
  if (sub == "verify-kernel") return detail::verify_kernel(rc, out);
  throw std::invalid_argument("unknown subcommand '" + sub + "'");
}

}  // namespace sqglab::cli
