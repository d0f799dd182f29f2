#pragma once

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "sqglab/grid.hpp"

namespace sqglab::fft {

enum class Direction { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

namespace detail {

/// FFTW plans are created under a lock and reused with the new-array execute
/// interface, which is thread safe. FFTW_UNALIGNED lets any std::vector buffer
/// be passed to a cached plan.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(const TorusGrid& grid, Direction dir) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(grid.dim(), grid.n(), static_cast<int>(dir));
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<Complex> in(grid.size()), out(grid.size());
    int dims[3] = {grid.n(), grid.n(), grid.n()};
    fftw_plan plan = fftw_plan_dft(grid.dim(), dims, reinterpret_cast<fftw_complex*>(in.data()),
                                   reinterpret_cast<fftw_complex*>(out.data()), static_cast<int>(dir),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("fftw_plan_dft failed");
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalized DFT over the grid layout: out[m] = sum_k in[k] e^{-+2 pi i m.k / N}.
inline void dft(std::span<const Complex> in, std::span<Complex> out, const TorusGrid& grid, Direction dir) {
  if (in.size() != grid.size() || out.size() != grid.size()) throw std::invalid_argument("dft: buffer size mismatch");
  fftw_plan plan = detail::PlanCache::instance().get(grid, dir);
  // FFTW does not modify the input of an out-of-place complex DFT.
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

inline std::vector<Complex> dft(std::span<const Complex> in, const TorusGrid& grid, Direction dir) {
  std::vector<Complex> out(grid.size());
  dft(in, out, grid, dir);
  return out;
}

}  // namespace sqglab::fft
