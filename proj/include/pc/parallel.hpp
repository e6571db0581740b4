#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace pc {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(chunkIndex, begin, end) over fixed-size index chunks of [0, n).
/// Chunk boundaries depend only on (n, chunkSize), never on the thread count,
/// so reductions that combine per-chunk results in chunk order are
/// reproducible for any number of threads.
inline void parallel_chunks(std::size_t n, std::size_t chunkSize, int threads,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (chunkSize == 0) chunkSize = 1;
  const std::size_t chunkCount = (n + chunkSize - 1) / chunkSize;
  const int workerCount = std::min<std::size_t>(resolve_threads(threads), chunkCount);

  if (workerCount <= 1) {
    for (std::size_t c = 0; c < chunkCount; ++c) {
      const std::size_t begin = c * chunkSize;
      fn(c, begin, std::min(begin + chunkSize, n));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunkCount) return;
      const std::size_t begin = c * chunkSize;
      fn(c, begin, std::min(begin + chunkSize, n));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workerCount);
  for (int t = 0; t < workerCount; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

/// Convenience wrapper for element-wise parallel work with disjoint outputs.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& fn) {
  parallel_chunks(n, 64, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace pc
