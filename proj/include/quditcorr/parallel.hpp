#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace quditcorr {

/// Number of workers to use when the caller asks for `requested` (0 = all cores).
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads.
///
/// Tasks write their results into caller-owned slots indexed by i, so the
/// output does not depend on scheduling. When `cancel` becomes true no new
/// task starts; returns a flag per task telling whether it ran. The first
/// exception thrown by a task is rethrown after all workers join.
template <class F>
std::vector<char> parallel_for(std::size_t n, int workers, F&& fn, const std::atomic<bool>* cancel = nullptr) {
  std::vector<char> done(n, 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      if (cancel != nullptr && cancel->load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
        done[i] = 1;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  const int count = std::min<int>(resolve_workers(workers), static_cast<int>(std::max<std::size_t>(n, 1)));
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return done;
}

}  // namespace quditcorr
