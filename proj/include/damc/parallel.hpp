#ifndef DAMC_PARALLEL_HPP
#define DAMC_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace damc {

// Static-chunked parallel loop. Each index must write only to its own
// slots; callers that need aggregates reduce per-index results serially
// afterwards, so output does not depend on the worker count.
inline void parallel_for(int n, const std::function<void(int)>& fn, int n_workers = 0) {
  if (n <= 0) return;
  if (n_workers <= 0)
    n_workers = static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::max(1, std::min(n_workers, n));
  if (n_workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  const int chunk = (n + n_workers - 1) / n_workers;
  for (int w = 0; w < n_workers; ++w) {
    const int lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace damc

#endif
