#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace mlhy {

// Runs fn(chunk_index, begin, end) over [0, total) split into fixed-size
// chunks. Chunk boundaries depend only on `total` and `chunk_size`, so
// per-chunk results can be merged in chunk order to give answers that do not
// depend on the worker count.
inline void parallel_chunks(long total, long chunk_size, int workers,
                            const std::function<void(long, long, long)>& fn) {
  const long num_chunks = (total + chunk_size - 1) / chunk_size;
  if (workers <= 1 || num_chunks <= 1) {
    for (long c = 0; c < num_chunks; ++c)
      fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
    return;
  }
  std::atomic<long> next{0};
  auto work = [&] {
    for (;;) {
      const long c = next.fetch_add(1);
      if (c >= num_chunks) return;
      fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = std::min<long>(workers, num_chunks);
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
}

}  // namespace mlhy
