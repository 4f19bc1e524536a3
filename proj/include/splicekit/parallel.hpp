#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace splicekit {

// Global worker-thread cap used by frame-parallel loops. 1 = serial.
void set_max_threads(int n);
int max_threads();

// Partitions [0, n) into fixed-size chunks and runs body(chunk_index, begin,
// end) for each, possibly on worker threads. Chunk boundaries depend only on
// n, so per-chunk partial results merged in chunk order give bit-identical
// totals for any thread count.
void for_each_chunk(std::size_t n, std::size_t chunk_size,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline constexpr std::size_t kDefaultChunk = 4096;

// Chunked map-reduce: partials are built per chunk and merged left-to-right.
// Partial must be default-constructible.
template <typename Partial, typename Fill, typename Merge>
Partial chunked_reduce(std::size_t n, Fill fill, Merge merge,
                       std::size_t chunk_size = kDefaultChunk) {
  const std::size_t chunks = n == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
  std::vector<Partial> partials(chunks);
  for_each_chunk(n, chunk_size, [&](std::size_t c, std::size_t b, std::size_t e) {
    fill(partials[c], b, e);
  });
  Partial total{};
  for (auto& p : partials) merge(total, p);
  return total;
}

}  // namespace splicekit
