#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace scarscope {

// --threads flag wins, then SCARSCOPE_THREADS, then hardware concurrency.
inline int default_thread_count() {
  if (const char* env = std::getenv("SCARSCOPE_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, n). Work items must not share mutable state;
// results are expected to be written by index, so assembly order is
// deterministic regardless of scheduling.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  int nt = std::min<std::size_t>(threads, n);
  pool.reserve(nt);
  for (int k = 0; k < nt; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace scarscope
