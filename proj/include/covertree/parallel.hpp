#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace covertree {

inline int worker_count() {
  if (const char* env = std::getenv("COVERTREE_WORKERS")) {
    int w = std::atoi(env);
    if (w >= 1) return w;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(lo, hi) over [0, n) split into fixed-size blocks. Block boundaries
// depend only on block_size, so results are identical for any worker count;
// workers pull whole blocks from a shared counter.
inline void parallel_blocks(int n, int block_size,
                            const std::function<void(int, int)>& fn,
                            int workers = 0) {
  if (n <= 0) return;
  if (workers <= 0) workers = worker_count();
  const int nblocks = (n + block_size - 1) / block_size;
  if (workers == 1 || nblocks == 1) {
    for (int b = 0; b < nblocks; ++b)
      fn(b * block_size, std::min(n, (b + 1) * block_size));
    return;
  }
  std::atomic<int> next{0};
  auto run = [&] {
    for (;;) {
      int b = next.fetch_add(1);
      if (b >= nblocks) return;
      fn(b * block_size, std::min(n, (b + 1) * block_size));
    }
  };
  std::vector<std::thread> pool;
  int nthreads = std::min(workers, nblocks);
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
}

}  // namespace covertree
