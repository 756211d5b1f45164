// Deterministic chunked Monte Carlo driver.  Trials are split into fixed-size
// chunks whose boundaries do not depend on the worker count, each chunk fills
// its own accumulator, and the chunk accumulators are merged in index order.
// The reduction is therefore bit-identical for any number of threads.

#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cascade {

inline constexpr std::uint64_t k_default_chunk = 256;

// requested = 0 resolves CASCADE_LAB_THREADS, then hardware concurrency
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CASCADE_LAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Body: void(std::uint64_t begin, std::uint64_t end, Acc&).
// Acc needs a merge(const Acc&) member; `init` seeds every chunk accumulator.
template <class Acc, class Body>
Acc parallel_reduce(std::uint64_t total, std::uint64_t chunk, int threads,
                    const Acc& init, Body&& body) {
  Acc result = init;
  if (total == 0) return result;
  if (chunk == 0) chunk = 1;
  const std::uint64_t nchunks = (total + chunk - 1) / chunk;
  const int workers =
      static_cast<int>(std::min<std::uint64_t>(nchunks, resolve_threads(threads)));

  std::vector<Acc> slots(nchunks, init);
  if (workers <= 1) {
    for (std::uint64_t c = 0; c < nchunks; ++c)
      body(c * chunk, std::min(total, (c + 1) * chunk), slots[c]);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex err_mu;
    std::exception_ptr err;
    auto work = [&] {
      for (;;) {
        const std::uint64_t c = next.fetch_add(1, std::memory_order_relaxed);
        if (c >= nchunks || stop.load(std::memory_order_relaxed)) return;
        try {
          body(c * chunk, std::min(total, (c + 1) * chunk), slots[c]);
        } catch (...) {
          stop.store(true, std::memory_order_relaxed);
          const std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    // the first failure wins; surviving partial chunks are discarded
    if (err) std::rethrow_exception(err);
  }
  for (const Acc& s : slots) result.merge(s);
  return result;
}

}  // namespace cascade
