#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "ctmix/random.hpp"

namespace ctmix {

// Runs fn(replicate_index, stream) for i in [0, n); replicate i always uses
// RandomStream(base_seed, stream_offset + i) and writes to slot i, so the
// result vector is identical for every thread count. Reductions over it in
// index order are bit-stable.
template <class Fn>
std::vector<double> run_replicates(std::uint64_t n, std::uint64_t base_seed,
                                   std::uint64_t stream_offset, unsigned threads, Fn&& fn) {
  std::vector<double> values(n);
  if (threads <= 1 || n < 256) {
    for (std::uint64_t i = 0; i < n; ++i) {
      RandomStream rng(base_seed, stream_offset + i);
      values[i] = fn(i, rng);
    }
    return values;
  }
  constexpr std::uint64_t kChunk = 256;
  std::atomic<std::uint64_t> next_chunk{0};
  const std::uint64_t n_chunks = (n + kChunk - 1) / kChunk;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t c = next_chunk.fetch_add(1);
      if (c >= n_chunks) return;
      const std::uint64_t lo = c * kChunk;
      const std::uint64_t hi = std::min(n, lo + kChunk);
      for (std::uint64_t i = lo; i < hi; ++i) {
        RandomStream rng(base_seed, stream_offset + i);
        values[i] = fn(i, rng);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return values;
}

}  // namespace ctmix
