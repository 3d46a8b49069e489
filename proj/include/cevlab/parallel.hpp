#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cevlab/rng.hpp"

namespace cevlab {

enum class Exec { Serial, Parallel };

/// Worker count to use; requested <= 0 means "all available".
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline std::size_t chunk_count(std::size_t n) { return (n + kChunkSize - 1) / kChunkSize; }

/// Runs body(chunk, begin, end) for every chunk of [0, n).
///
/// The serial path is the reference implementation; the parallel path must produce the
/// same output because each chunk owns its output range and its own random stream.
/// The first exception thrown by any chunk is rethrown on the calling thread.
template <class Body>
void for_each_chunk(std::size_t n, Exec exec, int workers, Body&& body) {
  const auto chunks = static_cast<std::int64_t>(chunk_count(n));
  auto range = [n](std::int64_t c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kChunkSize;
    const std::size_t end = begin + kChunkSize < n ? begin + kChunkSize : n;
    return std::pair{begin, end};
  };

  if (exec == Exec::Serial) {
    for (std::int64_t c = 0; c < chunks; ++c) {
      const auto [begin, end] = range(c);
      body(static_cast<std::uint64_t>(c), begin, end);
    }
    return;
  }

  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chunks));
  [[maybe_unused]] const int threads = resolve_workers(workers);
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::int64_t c = 0; c < chunks; ++c) {
    try {
      const auto [begin, end] = range(c);
      body(static_cast<std::uint64_t>(c), begin, end);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Fills n values by calling draw(stream) once per slot, chunk by chunk.
template <class T, class Draw>
std::vector<T> generate(std::size_t n, std::uint64_t seed, Exec exec, int workers, Draw&& draw) {
  std::vector<T> out(n);
  for_each_chunk(n, exec, workers, [&](std::uint64_t chunk, std::size_t begin, std::size_t end) {
    Stream stream(seed, chunk);
    for (std::size_t i = begin; i < end; ++i) out[i] = draw(stream);
  });
  return out;
}

}  // namespace cevlab
