#ifndef LIBLAB_PARALLEL_HPP
#define LIBLAB_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace liblab {

/// Hardware concurrency, capped by the LIBLAB_THREADS environment variable.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LIBLAB_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
    }
  }
  return n;
}

/// Calls body(lo, hi) on contiguous chunks of [begin, end) from up to
/// `workers` threads. The first exception thrown by any chunk is rethrown.
template <typename Body>
void parallel_chunks(long begin, long end, Body&& body, unsigned workers = worker_count()) {
  const long count = end - begin;
  if (count <= 0) return;
  const long chunks = std::min<long>(workers, count);
  if (chunks <= 1) {
    body(begin, end);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  pool.reserve(chunks);
  for (long c = 0; c < chunks; ++c) {
    const long lo = begin + count * c / chunks;
    const long hi = begin + count * (c + 1) / chunks;
    pool.emplace_back([&, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace liblab

#endif  // LIBLAB_PARALLEL_HPP
