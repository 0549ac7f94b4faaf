#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spex {

// Number of worker threads used by parallel loops. 1 means run inline.
inline std::size_t& worker_count() {
  static std::size_t n = 1;
  return n;
}

// Runs body(i) for i in [0, n). Work is split into contiguous chunks; every
// index writes its own output slot, so results do not depend on the number
// of workers. The first exception thrown by any chunk is rethrown.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, std::size_t workers = worker_count()) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Pairwise (tree) sum in a fixed order.
inline double ordered_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return ordered_sum(v, lo, mid) + ordered_sum(v, mid, hi);
}

inline double ordered_sum(const std::vector<double>& v) { return ordered_sum(v, 0, v.size()); }

}  // namespace spex
