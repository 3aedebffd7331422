#pragma once

#include <atomic>
#include <cstdint>

namespace sbd {

enum class ExecPolicy {
  Parallel,       ///< fully collapsed index spaces, atomic accumulation
  Deterministic,  ///< row-owned traversal in a fixed order; bitwise reproducible
};

struct ExecConfig {
  ExecPolicy policy = ExecPolicy::Parallel;
  int threads = 1;
};

/// Runs body(i) for i in [0, n) on `threads` workers, static partition.
template <typename Body>
void parallel_for(std::int64_t n, int threads, Body&& body) {
  if (threads <= 1 || n < 2) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

/// y += v free of lost updates under concurrent callers.
inline void atomic_add(double& y, double v) noexcept {
  std::atomic_ref<double>(y).fetch_add(v, std::memory_order_relaxed);
}

}  // namespace sbd
