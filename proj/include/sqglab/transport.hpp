#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqglab/grid.hpp"
#include "sqglab/lipschitz.hpp"
#include "sqglab/spectral.hpp"

namespace sqglab {

inline constexpr double kMeanZeroTolerance = 1e-10;

inline void require_mean_zero(const GridField& psi, const char* what) {
  const double scale = std::max(1.0, psi.sup_norm());
  if (std::fabs(psi.mean()) > kMeanZeroTolerance * scale)
    throw std::domain_error(std::string(what) + ": field must have mean zero (mean " + std::to_string(psi.mean()) + ")");
}

/// Positive and negative point masses h^d psi(x) of a grid field.
struct TransportProblem {
  std::vector<std::array<double, 3>> source_points, sink_points;
  std::vector<double> supply, demand;
  int dim = 2;

  std::size_t pairs() const { return supply.size() * demand.size(); }
  double cost(std::size_t i, std::size_t j) const { return periodic_distance(source_points[i], sink_points[j], dim); }
};

inline TransportProblem transport_problem(const GridField& psi) {
  const TorusGrid& g = psi.grid();
  TransportProblem tp;
  tp.dim = g.dim();
  const double hd = g.cell_volume();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (psi[i] > 0.0) {
      tp.source_points.push_back(g.point(i));
      tp.supply.push_back(hd * psi[i]);
    } else if (psi[i] < 0.0) {
      tp.sink_points.push_back(g.point(i));
      tp.demand.push_back(-hd * psi[i]);
    }
  }
  return tp;
}

/// Optimal transport cost between the supply and demand measures (balanced up
/// to rounding), by successive shortest paths on the bipartite plan graph with
/// Dijkstra on reduced costs. Dense O(V^2) per augmentation.
inline double min_cost_transport(const TransportProblem& tp) {
  const std::size_t np = tp.supply.size(), nq = tp.demand.size();
  if (np == 0 || nq == 0) return 0.0;
  const std::size_t V = np + nq;
  std::vector<double> D(np * nq);
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < nq; ++j) D[i * nq + j] = tp.cost(i, j);
  std::vector<double> flow(np * nq, 0.0);
  std::vector<double> supply = tp.supply, demand = tp.demand;
  const double total = std::min(std::accumulate(supply.begin(), supply.end(), 0.0),
                                std::accumulate(demand.begin(), demand.end(), 0.0));
  const double eps = 1e-14 * total;
  std::vector<double> pot(V, 0.0), dist(V);
  std::vector<std::ptrdiff_t> prev(V);
  std::vector<char> done(V);
  const double inf = std::numeric_limits<double>::infinity();
  double shipped = 0.0;
  for (std::size_t iter = 0; shipped < total - eps; ++iter) {
    if (iter > 8 * V * V + 64) throw std::runtime_error("min_cost_transport: no convergence");
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(prev.begin(), prev.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < np; ++i)
      if (supply[i] > eps) dist[i] = 0.0;
    std::ptrdiff_t target = -1;
    for (;;) {
      std::ptrdiff_t u = -1;
      for (std::size_t a = 0; a < V; ++a)
        if (!done[a] && dist[a] < inf && (u < 0 || dist[a] < dist[u])) u = static_cast<std::ptrdiff_t>(a);
      if (u < 0) break;
      done[u] = 1;
      const std::size_t uu = static_cast<std::size_t>(u);
      if (uu >= np && demand[uu - np] > eps) {
        target = u;
        break;
      }
      if (uu < np) {
        for (std::size_t j = 0; j < nq; ++j) {
          const std::size_t b = np + j;
          if (done[b]) continue;
          const double rc = std::max(0.0, D[uu * nq + j] + pot[uu] - pot[b]);
          if (dist[uu] + rc < dist[b]) {
            dist[b] = dist[uu] + rc;
            prev[b] = u;
          }
        }
      } else {
        const std::size_t j = uu - np;
        for (std::size_t i = 0; i < np; ++i) {
          if (done[i] || flow[i * nq + j] <= eps) continue;
          const double rc = std::max(0.0, -D[i * nq + j] + pot[uu] - pot[i]);
          if (dist[uu] + rc < dist[i]) {
            dist[i] = dist[uu] + rc;
            prev[i] = u;
          }
        }
      }
    }
    if (target < 0) break;
    const double dt = dist[target];
    for (std::size_t a = 0; a < V; ++a) pot[a] += std::min(dist[a], dt);
    // Bottleneck along the path.
    double amount = demand[static_cast<std::size_t>(target) - np];
    std::ptrdiff_t a = target;
    while (prev[a] >= 0) {
      const std::ptrdiff_t b = prev[a];
      if (static_cast<std::size_t>(b) >= np) amount = std::min(amount, flow[static_cast<std::size_t>(a) * nq + (b - np)]);
      a = b;
    }
    const std::size_t src = static_cast<std::size_t>(a);
    amount = std::min(amount, supply[src]);
    a = target;
    while (prev[a] >= 0) {
      const std::ptrdiff_t b = prev[a];
      if (static_cast<std::size_t>(b) < np)
        flow[static_cast<std::size_t>(b) * nq + (a - np)] += amount;
      else
        flow[static_cast<std::size_t>(a) * nq + (b - np)] -= amount;
      a = b;
    }
    supply[src] -= amount;
    demand[static_cast<std::size_t>(target) - np] -= amount;
    shipped += amount;
  }
  double cost = 0.0;
  for (std::size_t k = 0; k < flow.size(); ++k)
    if (flow[k] > 0.0) cost += flow[k] * D[k];
  return cost;
}

/// Cost of the greedy plan that ships along pairs in order of increasing
/// distance; a feasible plan, hence an upper bound on the optimum.
inline double greedy_transport(const TransportProblem& tp) {
  const std::size_t np = tp.supply.size(), nq = tp.demand.size();
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(np * nq);
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < nq; ++j) order.emplace_back(tp.cost(i, j), i * nq + j);
  std::sort(order.begin(), order.end());
  std::vector<double> supply = tp.supply, demand = tp.demand;
  double cost = 0.0;
  for (const auto& [c, k] : order) {
    const std::size_t i = k / nq, j = k % nq;
    const double m = std::min(supply[i], demand[j]);
    if (m <= 0.0) continue;
    supply[i] -= m;
    demand[j] -= m;
    cost += m * c;
  }
  // Rounding leftovers are shipped at the largest possible distance.
  const double left = std::max(std::accumulate(supply.begin(), supply.end(), 0.0),
                               std::accumulate(demand.begin(), demand.end(), 0.0));
  return cost + left * kPi * std::sqrt(static_cast<double>(tp.dim));
}

inline constexpr std::size_t kExactTransportCells = 256;

/// sup{ pair(f, psi) : f grid-Lip(1) }, which by Kantorovich-Rubinstein
/// duality is the optimal transport cost between psi^+ and psi^- with periodic
/// Euclidean ground distance. Exact (min-cost flow) on grids of <= 256 cells.
inline double lip_dual_exact_small(const GridField& psi) {
  if (psi.grid().size() > kExactTransportCells)
    throw std::invalid_argument("lip_dual_exact_small: grid has more than 256 cells");
  require_mean_zero(psi, "lip_dual_exact_small");
  return min_cost_transport(transport_problem(psi));
}

/// Upper bound via a feasible flow: V = D^+ phi with (-Delta_h) phi = psi
/// (discrete Laplacian symbol), so the backward divergence of V is psi and the
/// edge cost sum |V| h dominates the transport cost.
inline double lip_dual_upper(const GridField& psi) {
  require_mean_zero(psi, "lip_dual_upper");
  const TorusGrid& g = psi.grid();
  GridField phi = to_grid(discrete_inverse_laplacian(to_spectral(psi)));
  const double h = g.spacing();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Index k = g.unravel(i);
    for (int a = 0; a < g.dim(); ++a) {
      Index kn = k;
      kn[a] += 1;
      s += std::fabs(phi[g.ravel(kn)] - phi[i]) / h;
    }
  }
  return s * g.cell_volume();
}

/// Lower bound by exhibiting a grid-Lip(1) function f and returning pair(f, psi).
///
/// Start: the discrete potential of psi scaled to Lipschitz constant 1 (all
/// pairs on grids up to 128^2 cells, else the bound sum |n| |phi_hat(n)|).
/// Then `iterations` sweeps of coordinate ascent on grids up to 4096 cells:
/// f(x) moves to the largest (psi > 0) or smallest (psi < 0) value allowed by
/// the Lipschitz constraints against every other point, which keeps f feasible
/// and never decreases the pairing.
inline double lip_dual_lower(const GridField& psi, int iterations = 50) {
  require_mean_zero(psi, "lip_dual_lower");
  const TorusGrid& g = psi.grid();
  const std::size_t n = g.size();
  SpectralField phat = discrete_inverse_laplacian(to_spectral(psi));
  GridField f = to_grid(phat);
  double lip = 0.0;
  if (n <= 128 * 128) {
    lip = all_pairs_lipschitz(f);
  } else {
    for (std::size_t i = 0; i < n; ++i) lip += mode_norm(g.mode(i)) * std::abs(phat[i]);
  }
  if (lip == 0.0) return 0.0;
  f *= 1.0 / lip;
  if (n <= 4096 && iterations > 0) {
    std::vector<std::array<double, 3>> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = g.point(i);
    std::vector<double> D(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) D[i * n + j] = periodic_distance(pts[i], pts[j], g.dim());
    for (int it = 0; it < iterations; ++it) {
      bool moved = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (psi[i] == 0.0) continue;
        double v;
        if (psi[i] > 0.0) {
          v = std::numeric_limits<double>::infinity();
          for (std::size_t j = 0; j < n; ++j)
            if (j != i) v = std::min(v, f[j] + D[i * n + j]);
        } else {
          v = -std::numeric_limits<double>::infinity();
          for (std::size_t j = 0; j < n; ++j)
            if (j != i) v = std::max(v, f[j] - D[i * n + j]);
        }
        if (v != f[i]) moved = true;
        f[i] = v;
      }
      if (!moved) break;
    }
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += f[i] * psi[i];
  return s * g.cell_volume();
}

}  // namespace sqglab
