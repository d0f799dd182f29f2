#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqglab/grid.hpp"
#include "sqglab/initial_conditions.hpp"
#include "sqglab/mollifier.hpp"
#include "sqglab/spectral.hpp"

namespace sqglab {

enum class VelocityMode { riesz_perp, prescribed, mollified };

/// Velocity as a function of time, for prescribed transport.
using VelocitySupplier = std::function<VectorField(double)>;

struct SolverConfig {
  double alpha = 0.9;
  double epsilon = 0.0;
  int dim = 2;
  int n = 128;
  /// Upper bound on the step; 0 selects the automatic (CFL and dt_max) step.
  double dt = 0.0;
  double t_end = 1.0;
  VelocityMode velocity_mode = VelocityMode::riesz_perp;
  double mollifier_r = 0.25;
  VelocitySupplier prescribed;
  /// Steps between stored snapshots and between history checkpoints.
  int snapshot_stride = 1;
  std::uint64_t seed = 0;
  InitialCondition init;
  /// Test switch: drop the (-Delta)^{alpha/2} term (the eps term stays).
  bool dissipation = true;
  double cfl = 0.5;
  double dt_max = 0.5;
  double dt_floor = 1e-9;
  /// Exponent of the L^q column of the time series.
  double series_q = 2.0;

  TorusGrid grid() const { return TorusGrid(dim, n); }

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("SolverConfig: alpha must lie in (0, 2]");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("SolverConfig: epsilon must be >= 0");
    if (!(dt >= 0.0)) throw std::invalid_argument("SolverConfig: dt must be >= 0");
    if (!(t_end >= 0.0)) throw std::invalid_argument("SolverConfig: t_end must be >= 0");
    if (snapshot_stride < 1) throw std::invalid_argument("SolverConfig: snapshot_stride must be >= 1");
    if (!(cfl > 0.0) || !(dt_max > 0.0)) throw std::invalid_argument("SolverConfig: cfl and dt_max must be positive");
    if (velocity_mode == VelocityMode::riesz_perp && dim != 2)
      throw std::invalid_argument("SolverConfig: riesz_perp velocity requires d = 2");
    if (velocity_mode == VelocityMode::mollified && dim != 2)
      throw std::invalid_argument("SolverConfig: mollified velocity requires d = 2");
    if (velocity_mode == VelocityMode::prescribed && !prescribed)
      throw std::invalid_argument("SolverConfig: prescribed velocity mode without a supplier");
    (void)grid();
  }
};

/// u_r = R_perp(theta * chi_r).
inline VectorField mollified_velocity(const GridField& theta, const Mollifier& chi) {
  return to_grid(riesz_perp_velocity(chi.convolve(to_spectral(theta))));
}

inline VectorField mollified_velocity(const GridField& theta, double r) {
  return mollified_velocity(theta, build_mollifier(theta.grid(), r));
}

inline double max_speed(const VectorField& u) {
  if (u.empty()) return 0.0;
  double m = 0.0;
  for (std::size_t i = 0; i < u[0].size(); ++i) {
    double s = 0.0;
    for (const auto& c : u) s += c[i] * c[i];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

namespace detail {

/// Integrating-factor RK4 for v' = L v + N(v, t) with diagonal L.
class IfRk4 {
 public:
  IfRk4(const TorusGrid& g, std::vector<double> symbol) : grid_(g), symbol_(std::move(symbol)) {}

  template <class Nonlinear>
  SpectralField step(const SpectralField& v, double t, double dt, Nonlinear&& nl,
                     const SpectralField* k1_given = nullptr) const {
    const std::size_t n = grid_.size();
    std::vector<double> half(n), full(n);
    for (std::size_t i = 0; i < n; ++i) {
      half[i] = std::exp(0.5 * dt * symbol_[i]);
      full[i] = half[i] * half[i];
    }
    SpectralField k1 = k1_given ? *k1_given : nl(v, t);
    SpectralField a(grid_), b(grid_), c(grid_);
    for (std::size_t i = 0; i < n; ++i) a[i] = half[i] * (v[i] + 0.5 * dt * k1[i]);
    SpectralField k2 = nl(a, t + 0.5 * dt);
    for (std::size_t i = 0; i < n; ++i) b[i] = half[i] * v[i] + 0.5 * dt * k2[i];
    SpectralField k3 = nl(b, t + 0.5 * dt);
    for (std::size_t i = 0; i < n; ++i) c[i] = full[i] * v[i] + dt * half[i] * k3[i];
    SpectralField k4 = nl(c, t + dt);
    SpectralField out(grid_);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = full[i] * v[i] + dt / 6.0 * (full[i] * k1[i] + 2.0 * half[i] * (k2[i] + k3[i]) + k4[i]);
    return out;
  }

  const std::vector<double>& symbol() const { return symbol_; }

 private:
  TorusGrid grid_;
  std::vector<double> symbol_;
};

inline std::vector<double> linear_symbol(const TorusGrid& g, double alpha, double epsilon, bool dissipation) {
  std::vector<double> s(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r2 = mode_norm_sq(g.mode(i));
    s[i] = -epsilon * r2 - (dissipation && r2 > 0.0 ? std::pow(r2, 0.5 * alpha) : 0.0);
  }
  return s;
}

inline void require_finite(const SpectralField& F, double t) {
  for (std::size_t i = 0; i < F.size(); ++i)
    if (!std::isfinite(F[i].real()) || !std::isfinite(F[i].imag()))
      throw std::runtime_error("solver: non-finite state at t = " + std::to_string(t));
}

/// Velocity law and stepping for one configuration; shared by the forward run
/// and by deterministic history replay.
class ForwardStepper {
 public:
  explicit ForwardStepper(const SolverConfig& cfg)
      : cfg_(cfg),
        grid_(cfg.grid()),
        rk_(grid_, linear_symbol(grid_, cfg.alpha, cfg.epsilon, cfg.dissipation)) {
    if (cfg.velocity_mode == VelocityMode::mollified) chi_ = std::make_shared<Mollifier>(grid_, cfg.mollifier_r);
  }

  const TorusGrid& grid() const { return grid_; }
  const SolverConfig& config() const { return cfg_; }

  /// Velocity carried by state theta_hat at time t (dealiased state for the
  /// active laws, so advection products are exactly skew on the grid).
  VectorField velocity(const SpectralField& theta_hat, double t) const {
    switch (cfg_.velocity_mode) {
      case VelocityMode::riesz_perp:
        return to_grid(riesz_perp_velocity(dealias(theta_hat)));
      case VelocityMode::mollified:
        return to_grid(riesz_perp_velocity(chi_->convolve(dealias(theta_hat))));
      case VelocityMode::prescribed: {
        VectorField u = cfg_.prescribed(t);
        if (static_cast<int>(u.size()) != grid_.dim())
          throw std::invalid_argument("prescribed velocity has wrong number of components");
        for (const auto& c : u) require_same_grid(c.grid(), grid_, "prescribed velocity");
        return to_grid(dealias_vector(to_spectral(u)));
      }
    }
    throw std::logic_error("unreachable velocity mode");
  }

  SpectralField nonlinear(const VectorField& u, const SpectralField& v) const { return advection_spectral(u, v); }

  /// One step from (v, t) of length dt; u0 is the velocity at (v, t).
  SpectralField step(const SpectralField& v, double t, double dt, const VectorField& u0) const {
    auto nl = [&](const SpectralField& w, double s) { return nonlinear(velocity(w, s), w); };
    SpectralField k1 = nonlinear(u0, v);
    return rk_.step(v, t, dt, nl, &k1);
  }

  static std::vector<SpectralField> dealias_vector(std::vector<SpectralField> u) {
    for (auto& c : u) dealias_in_place(c);
    return u;
  }

 private:
  SolverConfig cfg_;
  TorusGrid grid_;
  IfRk4 rk_;
  std::shared_ptr<Mollifier> chi_;
};

}  // namespace detail

class Trajectory;
inline Trajectory simulate_forward(const SolverConfig& cfg, const GridField& theta0, double t_start = 0.0);

/// Accepted step times, step lengths and state checkpoints of a forward run.
struct VelocityHistory {
  std::vector<double> step_times;  // t_0 < t_1 < ... < t_K
  std::vector<double> step_dt;     // t_{k+1} - t_k as actually integrated
  int stride = 1;
  std::map<std::size_t, SpectralField> checkpoints;  // step index -> state
};

struct Snapshot {
  double t = 0.0;
  GridField theta;
};

struct SeriesRow {
  double t = 0.0;
  double linf = 0.0;
  double l2 = 0.0;
  double lq = 0.0;
  double mean = 0.0;
  double dt_used = 0.0;
};

/// Immutable record of a forward (or passive) run.
class Trajectory {
 public:
  const SolverConfig& config() const { return stepper_->config(); }
  const TorusGrid& grid() const { return stepper_->grid(); }
  const std::vector<Snapshot>& snapshots() const { return snapshots_; }
  const std::vector<SeriesRow>& series() const { return series_; }
  const VelocityHistory& history() const { return *history_; }
  double t_start() const { return history_->step_times.front(); }
  double t_final() const { return history_->step_times.back(); }
  std::size_t steps() const { return history_->step_dt.size(); }
  const GridField& final_state() const { return snapshots_.back().theta; }

 private:
  friend Trajectory simulate_forward(const SolverConfig&, const GridField&, double);
  friend class HistoryCursor;
  std::shared_ptr<const detail::ForwardStepper> stepper_;
  std::shared_ptr<const VelocityHistory> history_;
  std::vector<Snapshot> snapshots_;
  std::vector<SeriesRow> series_;
};

inline SeriesRow series_row(const GridField& f, double t, double dt_used, double q) {
  return SeriesRow{t, f.sup_norm(), f.lp_norm(2.0), f.lp_norm(q), f.mean(), dt_used};
}

/// Forward integration of
///   theta_t = (u.grad) theta - (-Delta)^{alpha/2} theta + eps Delta theta
/// by integrating-factor RK4 (linear part exact, advection explicit and
/// dealiased). The step is min(dt, dt_max, cfl h / max|u|, remaining time).
inline Trajectory simulate_forward(const SolverConfig& cfg, const GridField& theta0, double t_start) {
  cfg.validate();
  require_same_grid(theta0.grid(), cfg.grid(), "simulate_forward");
  if (!theta0.is_finite()) throw std::invalid_argument("simulate_forward: initial field is not finite");
  if (cfg.velocity_mode == VelocityMode::prescribed) {
    for (double ts : {t_start, t_start + cfg.t_end}) {
      double defect = divergence_defect(cfg.prescribed(ts));
      if (defect > 1e-8)
        throw std::invalid_argument("simulate_forward: prescribed velocity is not divergence free (defect " +
                                    std::to_string(defect) + ")");
    }
  }

  Trajectory traj;
  auto stepper_ptr = std::make_shared<const detail::ForwardStepper>(cfg);
  traj.stepper_ = stepper_ptr;
  const auto& stepper = *stepper_ptr;
  auto history = std::make_shared<VelocityHistory>();
  history->stride = cfg.snapshot_stride;

  const TorusGrid& g = stepper.grid();
  const double h = g.spacing();
  const double t_stop = t_start + cfg.t_end;
  SpectralField v = to_spectral(theta0);
  double t = t_start;
  history->step_times.push_back(t);
  history->checkpoints.emplace(0, v);
  traj.snapshots_.push_back({t, theta0});
  traj.series_.push_back(series_row(theta0, t, 0.0, cfg.series_q));

  const double cap = cfg.dt > 0.0 ? std::min(cfg.dt, cfg.dt_max) : cfg.dt_max;
  std::size_t k = 0;
  // A step that lands within `tol` of the end is the last one, so rounding in
  // the accumulated time never leaves a sliver step or skips the final sample.
  const double tol = 1e-13 * std::max(1.0, std::fabs(t_stop));
  while (t_stop - t > tol) {
    VectorField u = stepper.velocity(v, t);
    const double speed = max_speed(u);
    double dt = cap;
    if (speed > 0.0) dt = std::min(dt, cfg.cfl * h / speed);
    const double remaining = t_stop - t;
    const bool last = dt >= remaining - tol;
    if (last) dt = remaining;
    if (!last && dt < cfg.dt_floor)
      throw std::runtime_error("simulate_forward: CFL step " + std::to_string(dt) + " below the adaptation floor at t = " +
                               std::to_string(t));
    v = stepper.step(v, t, dt, u);
    detail::require_finite(v, t + dt);
    ++k;
    t = last ? t_stop : t + dt;
    history->step_times.push_back(t);
    history->step_dt.push_back(dt);
    if (k % static_cast<std::size_t>(cfg.snapshot_stride) == 0 || cfg.snapshot_stride == 1)
      history->checkpoints.emplace(k, v);
    if (k % static_cast<std::size_t>(cfg.snapshot_stride) == 0 || last) {
      GridField f = to_grid(v);
      traj.snapshots_.push_back({t, f});
      traj.series_.push_back(series_row(f, t, dt, cfg.series_q));
    }
  }
  // The final state is always a checkpoint so replay never runs past the end.
  if (!history->checkpoints.count(k)) history->checkpoints.emplace(k, v);
  traj.history_ = history;
  return traj;
}

/// Read access to the full state history of a trajectory. Steps between
/// checkpoints are recomputed by deterministic replay (same states, same step
/// lengths, same code path) and cached one checkpoint segment at a time.
class HistoryCursor {
 public:
  explicit HistoryCursor(const Trajectory& traj) : stepper_(traj.stepper_), history_(traj.history_) {}

  const TorusGrid& grid() const { return stepper_->grid(); }
  double t_start() const { return history_->step_times.front(); }
  double t_final() const { return history_->step_times.back(); }

  /// State after step k.
  const SpectralField& state(std::size_t k) {
    auto it = history_->checkpoints.find(k);
    if (it != history_->checkpoints.end()) return it->second;
    if (!segment_.count(k)) replay_segment(k);
    return segment_.at(k);
  }

  /// Index of the step interval [t_k, t_{k+1}] containing tau.
  std::size_t interval(double tau) const {
    const auto& ts = history_->step_times;
    const double tol = 1e-12 * std::max(1.0, std::fabs(ts.back()));
    if (tau < ts.front() - tol || tau > ts.back() + tol)
      throw std::out_of_range("velocity history does not cover t = " + std::to_string(tau));
    auto it = std::upper_bound(ts.begin(), ts.end(), tau);
    std::size_t k = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
    return std::min(k, ts.size() - 2);
  }

  const std::vector<double>& step_times() const { return history_->step_times; }

  /// Velocity at step k.
  const VectorField& velocity_at_step(std::size_t k) {
    auto it = vel_cache_.find(k);
    if (it != vel_cache_.end()) return it->second;
    if (vel_cache_.size() > 8) vel_cache_.clear();
    return vel_cache_.emplace(k, stepper_->velocity(state(k), history_->step_times[k])).first->second;
  }

  /// Velocity at an arbitrary time: exact at step times, linear in between.
  VectorField velocity(double tau) {
    if (stepper_->config().velocity_mode == VelocityMode::prescribed)
      return stepper_->velocity(SpectralField(grid()), tau);
    const auto& ts = history_->step_times;
    if (ts.size() == 1) return velocity_at_step(0);
    const std::size_t k = interval(tau);
    const double w = std::clamp((tau - ts[k]) / (ts[k + 1] - ts[k]), 0.0, 1.0);
    if (w == 0.0) return velocity_at_step(k);
    VectorField a = velocity_at_step(k);
    if (w == 1.0) return velocity_at_step(k + 1);
    const VectorField& b = velocity_at_step(k + 1);
    for (std::size_t c = 0; c < a.size(); ++c) {
      a[c] *= 1.0 - w;
      GridField bc = b[c];
      bc *= w;
      a[c] += bc;
    }
    return a;
  }

  /// State at an arbitrary time: a partial step from the enclosing step start.
  SpectralField state_at(double tau) {
    const auto& ts = history_->step_times;
    if (ts.size() == 1) return state(0);
    const std::size_t k = interval(tau);
    const double ds = tau - ts[k];
    if (ds <= 0.0) return state(k);
    if (tau >= ts[k + 1]) return state(k + 1);
    const SpectralField& v = state(k);
    return stepper_->step(v, ts[k], ds, stepper_->velocity(v, ts[k]));
  }

 private:
  void replay_segment(std::size_t k) {
    auto it = history_->checkpoints.upper_bound(k);
    --it;
    segment_.clear();
    std::size_t j = it->first;
    SpectralField v = it->second;
    while (j < k) {
      const double t = history_->step_times[j];
      const double dt = history_->step_dt[j];
      v = stepper_->step(v, t, dt, stepper_->velocity(v, t));
      ++j;
      if (history_->checkpoints.count(j)) break;
      segment_.emplace(j, v);
    }
    // Complete the segment up to the next checkpoint so backward sweeps replay once.
    auto next = history_->checkpoints.upper_bound(k);
    while (next != history_->checkpoints.end() && j + 1 < next->first) {
      const double t = history_->step_times[j];
      const double dt = history_->step_dt[j];
      v = stepper_->step(v, t, dt, stepper_->velocity(v, t));
      ++j;
      segment_.emplace(j, v);
    }
  }

  std::shared_ptr<const detail::ForwardStepper> stepper_;
  std::shared_ptr<const VelocityHistory> history_;
  std::map<std::size_t, SpectralField> segment_;
  std::map<std::size_t, VectorField> vel_cache_;
};

/// Dual state along a backward solve, ordered by decreasing tau.
struct DualPath {
  std::vector<double> tau;
  std::vector<GridField> psi;
};

namespace detail {

/// Backward dual solve psi_s = (u.grad) psi + (-Delta)^{alpha/2} psi - eps Delta psi
/// from terminal data at t to t - s. In sigma = t - tau it is the forward
/// problem d_sigma psi = -(u(t - sigma).grad) psi - (-Delta)^{alpha/2} psi + eps Delta psi,
/// integrated with the forward scheme on the forward step grid inside [t-s, t].
inline DualPath dual_solve(HistoryCursor& cursor, const SolverConfig& cfg, const GridField& psi_t, double t, double s,
                           bool keep_path) {
  if (!(s >= 0.0)) throw std::invalid_argument("simulate_dual_backward: s must be >= 0");
  const TorusGrid& g = cursor.grid();
  require_same_grid(psi_t.grid(), g, "simulate_dual_backward");
  const double tol = 1e-12 * std::max(1.0, std::fabs(t));
  if (t > cursor.t_final() + tol || t - s < cursor.t_start() - tol)
    throw std::out_of_range("simulate_dual_backward: [t - s, t] is not covered by the velocity history");
  DualPath path;
  path.tau.push_back(t);
  path.psi.push_back(psi_t);
  if (s == 0.0) return path;

  // Interior forward step times become dual step boundaries (descending).
  std::vector<double> marks{t};
  const auto& ts = cursor.step_times();
  for (auto it = ts.rbegin(); it != ts.rend(); ++it)
    if (*it < t - tol && *it > t - s + tol) marks.push_back(*it);
  marks.push_back(t - s);
  // Long forward steps (dt_max) are split to respect the dual step cap.
  std::vector<double> taus{marks.front()};
  const double cap = cfg.dt > 0.0 ? std::min(cfg.dt, cfg.dt_max) : cfg.dt_max;
  for (std::size_t i = 1; i < marks.size(); ++i) {
    const double len = marks[i - 1] - marks[i];
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / cap - 1e-12)));
    for (int p = 1; p < pieces; ++p) taus.push_back(marks[i - 1] - len * p / pieces);
    taus.push_back(marks[i]);
  }

  IfRk4 rk(g, linear_symbol(g, cfg.alpha, cfg.epsilon, cfg.dissipation));
  auto nl = [&](const SpectralField& w, double sigma) {
    SpectralField a = advection_spectral(cursor.velocity(t - sigma), w);
    a *= -1.0;
    return a;
  };
  SpectralField v = to_spectral(psi_t);
  for (std::size_t i = 1; i < taus.size(); ++i) {
    const double sigma0 = t - taus[i - 1];
    const double dt = taus[i - 1] - taus[i];
    v = rk.step(v, sigma0, dt, nl);
    require_finite(v, taus[i]);
    if (keep_path || i + 1 == taus.size()) {
      path.tau.push_back(taus[i]);
      path.psi.push_back(to_grid(v));
    }
  }
  return path;
}

}  // namespace detail

/// psi(., t - s) from terminal data psi_t at time t (see detail::dual_solve).
inline GridField simulate_dual_backward(const Trajectory& traj, const GridField& psi_t, double t, double s) {
  HistoryCursor cursor(traj);
  return detail::dual_solve(cursor, traj.config(), psi_t, t, s, false).psi.back();
}

/// Full backward path, ordered from tau = t down to tau = t - s.
inline DualPath dual_backward_path(const Trajectory& traj, const GridField& psi_t, double t, double s) {
  HistoryCursor cursor(traj);
  return detail::dual_solve(cursor, traj.config(), psi_t, t, s, true);
}

/// Passive scalar f_tau = (v.grad) f - (-Delta)^{alpha/2} f on [t0, t1] with a
/// prescribed, divergence-free velocity; same scheme as simulate_forward.
inline Trajectory simulate_passive(const VelocitySupplier& v, const GridField& f0, double t0, double t1,
                                   SolverConfig cfg) {
  cfg.velocity_mode = VelocityMode::prescribed;
  cfg.prescribed = v;
  cfg.dim = f0.grid().dim();
  cfg.n = f0.grid().n();
  cfg.t_end = t1 - t0;
  return simulate_forward(cfg, f0, t0);
}

}  // namespace sqglab
