#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

// Reproducibility helpers.  Every numerical reduction in the toolkit goes
// through the fixed-shape pairwise sum below, and every random draw comes
// from a counter-based hash, so results are bit-identical across runs and
// across thread counts.  Threads only ever split index ranges whose partial
// results are combined in a fixed order (or through an order-insensitive
// argmax comparator), never through racing accumulators.

namespace holderlab {

// SplitMix64 finalizer.  Used as a stateless counter-based generator:
// hashing (seed, counter) yields the same stream no matter how work is
// scheduled.
inline std::uint64_t hash_mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4568bull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t counter) {
  return hash_mix(seed ^ hash_mix(counter));
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t a,
                                  std::uint64_t b) {
  return hash_mix(hash_combine(seed, a) ^ hash_mix(b + 0x9e3779b97f4a7c15ull));
}

// Uniform double in [0, 1) from 53 high bits.
inline double hash_to_unit(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Pairwise (cascade) summation over values(i) for i in [begin, end).  The
// reduction tree depends only on the index range, so the result is a pure
// function of the addends.  Error grows like O(log n) rather than O(n).
template <class F>
double pairwise_sum(std::size_t begin, std::size_t end, F&& values) {
  const std::size_t n = end - begin;
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = values(begin);
    for (std::size_t i = begin + 1; i < end; ++i) s += values(i);
    return s;
  }
  const std::size_t mid = begin + n / 2;
  return pairwise_sum(begin, mid, values) + pairwise_sum(mid, end, values);
}

template <class F>
double pairwise_sum(std::size_t n, F&& values) {
  return pairwise_sum(std::size_t{0}, n, std::forward<F>(values));
}

// Effective worker count: the HOLDERLAB_THREADS environment variable caps
// (or raises, up to hardware) the default of std::thread::hardware_concurrency.
inline unsigned thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("HOLDERLAB_THREADS")) {
    char* tail = nullptr;
    long v = std::strtol(env, &tail, 10);
    if (tail != env && v >= 1 && v <= 1024) return static_cast<unsigned>(v);
  }
  return hw;
}

// Runs body(chunk_begin, chunk_end) over [0, n) split into contiguous chunks.
// Chunk boundaries depend only on n and chunk_size, never on the number of
// workers, so any per-chunk results a caller collects are indexed the same
// way regardless of parallelism.  body must only touch disjoint state per
// chunk (e.g. write chunk-indexed slots).
template <class Body>
void parallel_chunks(std::size_t n, std::size_t chunk_size, Body&& body) {
  if (n == 0) return;
  const std::size_t chunks = (n + chunk_size - 1) / chunk_size;
  unsigned workers = std::min<std::size_t>(thread_count(), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c)
      body(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers)
        body(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
    });
  }
  for (auto& t : pool) t.join();
}

inline constexpr std::size_t kDefaultChunk = 1 << 16;

// Like parallel_chunks, but the body may throw.  Exceptions are captured per
// chunk and the one from the lowest-numbered chunk is rethrown after all
// workers join, so the reported error does not depend on thread scheduling.
template <class Body>
void parallel_chunks_capture(std::size_t n, std::size_t chunk_size,
                             Body&& body) {
  if (n == 0) return;
  const std::size_t chunks = (n + chunk_size - 1) / chunk_size;
  std::vector<std::exception_ptr> errors(chunks);
  parallel_chunks(n, chunk_size, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    try {
      body(c, lo, hi);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace holderlab
