#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace honem::parallel {

// Process-wide worker cap, set once by the CLI --threads flag.
// 0 means "use available parallelism".
inline std::atomic<unsigned>& max_threads() {
  static std::atomic<unsigned> v{0};
  return v;
}

inline unsigned effective_threads(std::size_t work_items) {
  unsigned cap = max_threads().load(std::memory_order_relaxed);
  if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(
      std::min<std::size_t>(cap, std::max<std::size_t>(1, work_items)));
}

// Run fn(begin, end) over disjoint chunks of [0, n). Workers write to
// disjoint slots only, so results do not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  if (n == 0) return;
  unsigned workers = effective_threads(n);
  if (workers <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace honem::parallel
