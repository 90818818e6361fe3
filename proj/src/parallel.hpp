#ifndef GHLAB_PARALLEL_HPP
#define GHLAB_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace ghlab {

/// Worker count: GHLAB_THREADS overrides hardware concurrency. Read per call
/// so tests can toggle the env var between runs.
inline unsigned worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("GHLAB_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) hw = static_cast<unsigned>(v);
  }
  return hw;
}

/// Runs fn(chunk_index, begin, end) over [0, n) split into fixed chunks.
/// Chunking depends only on n, never on the worker count, so per-chunk
/// results can be folded in chunk order for scheduling-independent output.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t chunk, Fn&& fn) {
  if (n == 0) return;
  if (chunk == 0) chunk = 1;
  std::size_t nchunks = (n + chunk - 1) / chunk;
  unsigned workers = worker_count();
  if (workers <= 1 || nchunks <= 1) {
    for (std::size_t c = 0; c < nchunks; ++c)
      fn(c, c * chunk, std::min(n, (c + 1) * chunk));
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<std::size_t> next{0};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t c = next.fetch_add(1);
        if (c >= nchunks) return;
        fn(c, c * chunk, std::min(n, (c + 1) * chunk));
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace ghlab

#endif
