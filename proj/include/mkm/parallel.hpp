#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mkm {

// Worker count: hardware concurrency capped by MKM_THREADS when set.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MKM_THREADS")) {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

// Static block partition; each index is written by exactly one worker, so
// results do not depend on the thread count.
template <class F>
void parallel_for(std::size_t n, F&& body, std::size_t min_chunk = 64) {
  unsigned workers = worker_count();
  std::size_t blocks = std::min<std::size_t>(workers, (n + min_chunk - 1) / min_chunk);
  if (blocks <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t lo = n * b / blocks, hi = n * (b + 1) / blocks;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mkm
