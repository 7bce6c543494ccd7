#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace twograph {

namespace detail {
inline std::atomic<int>& worker_limit() {
  static std::atomic<int> limit{0};
  return limit;
}
}  // namespace detail

/// Caps the number of worker threads; 0 means all available cores.
inline void set_worker_count(int workers) { detail::worker_limit() = std::max(0, workers); }

inline int worker_count() {
  const int lim = detail::worker_limit();
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return lim > 0 ? std::min(lim, hw) : hw;
}

/// Deterministic map-reduce over [0, n). The range is cut into a fixed number
/// of chunks independent of the worker count and partial results are combined
/// in chunk order, so results are bit-identical for any thread count.
template <class T, class ChunkFn, class Combine>
T parallel_reduce(std::size_t n, T init, ChunkFn chunk_fn, Combine combine) {
  constexpr std::size_t kChunks = 64;
  if (n == 0) return init;
  const std::size_t chunks = std::min(kChunks, n);
  std::vector<T> partial(chunks, init);
  auto run = [&](std::size_t c) {
    const std::size_t lo = n * c / chunks;
    const std::size_t hi = n * (c + 1) / chunks;
    partial[c] = chunk_fn(lo, hi);
  };
  const int workers = std::min<int>(worker_count(), static_cast<int>(chunks));
  if (workers <= 1 || n < 4096) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        try {
          for (std::size_t c = next++; c < chunks; c = next++) run(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next = chunks;
        }
      });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  T acc = init;
  for (auto& p : partial) acc = combine(acc, p);
  return acc;
}

inline double max_combine(double a, double b) { return std::max(a, b); }

template <class Fn>
double parallel_sum(std::size_t n, Fn term) {
  return parallel_reduce(
      n, 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        return s;
      },
      [](double a, double b) { return a + b; });
}

template <class Fn>
void parallel_for(std::size_t n, Fn body) {
  parallel_reduce(
      n, 0,
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) body(i);
        return 0;
      },
      [](int, int) { return 0; });
}

}  // namespace twograph
