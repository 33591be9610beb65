#ifndef FF_PARALLEL_HPP
#define FF_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "ff/chart.hpp"

namespace ff {

/// Worker count: FF_THREADS if set (>= 1), else the hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("FF_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) split into contiguous blocks. Each index is
/// visited by exactly one worker, so writes to disjoint slots need no
/// synchronisation and results do not depend on the worker count.
template <typename Fn>
void parallel_for(Index n, Fn&& fn, Index min_block = 256) {
  const Index workers = std::min<Index>(worker_count(), (n + min_block - 1) / min_block);
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const Index chunk = (n + workers - 1) / workers;
  for (Index w = 0; w < workers; ++w) {
    const Index lo = w * chunk, hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      try {
        for (Index i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ff

#endif  // FF_PARALLEL_HPP
