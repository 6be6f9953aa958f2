// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bdbbm {

/// Runs f(r) for r in [0, n) on up to `threads` workers; results are indexed by r,
/// so the output does not depend on scheduling. The first exception is rethrown.
template <class F>
auto parallel_replicas(std::size_t n, unsigned threads, F&& f) {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out(n);
  if (threads <= 1 || n <= 1) {
    for (std::size_t r = 0; r < n; ++r) out[r] = f(r);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= n) return;
      try {
        out[r] = f(r);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!err) err = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned t = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return out;
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace bdbbm
