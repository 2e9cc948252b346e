#ifndef SFVM_PARALLEL_HPP_
#define SFVM_PARALLEL_HPP_

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sfvm {

/// Thread count: explicit value if positive, else SPACETIME_FVM_THREADS, else 1.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SPACETIME_FVM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

/// Calls body(i) for i in [0, n) split into contiguous chunks, one per
/// thread. Each index is written by exactly one thread, so results do not
/// depend on the thread count. The first exception is rethrown.
template <class Body>
void parallel_for(int n, int threads, Body&& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
      const int lo = static_cast<int>(static_cast<long long>(n) * w / threads);
      const int hi = static_cast<int>(static_cast<long long>(n) * (w + 1) / threads);
      pool.emplace_back([&, lo, hi] {
        try {
          for (int i = lo; i < hi; ++i) body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace sfvm

#endif  // SFVM_PARALLEL_HPP_
