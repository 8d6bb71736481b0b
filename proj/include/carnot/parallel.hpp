#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace carnot {

// Splits [0, n) into a fixed number of chunks and runs them on however many
// threads are available. Chunk boundaries do not depend on the thread count,
// so per-chunk results can be combined in index order for deterministic
// reductions.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t n_chunks, Fn&& fn) {
  if (n == 0) return;
  if (n_chunks > n) n_chunks = n;
  const std::size_t per = (n + n_chunks - 1) / n_chunks;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (hw == 1 || n_chunks == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      const std::size_t lo = c * per;
      if (lo >= n) break;
      fn(c, lo, std::min(n, lo + per));
    }
    return;
  }
  std::atomic<std::size_t> counter{0};
  std::vector<std::thread> pool;
  pool.reserve(hw);
  for (unsigned t = 0; t < hw; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t c = counter.fetch_add(1);
        if (c >= n_chunks) return;
        const std::size_t lo = c * per;
        if (lo >= n) return;
        fn(c, lo, std::min(n, lo + per));
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace carnot
