#pragma once

// Deterministic parallel map over cell indices. Cells write into
// preallocated slots; an atomic cursor hands out indices, so scheduling
// never affects results, only timing.

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace jrm {

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

template <class F>
void parallel_for(std::size_t n, int workers, F&& body) {
  workers = resolve_workers(workers);
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  auto run = [&] {
    while (true) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= n || failed.load(std::memory_order_relaxed)) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int nthreads = workers < static_cast<int>(n) ? workers : static_cast<int>(n);
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace jrm
