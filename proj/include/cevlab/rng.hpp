#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace cevlab {

/// Draws per chunk. Every sampler splits its n draws into chunks of this size and seeds
/// chunk c independently, so results do not depend on how chunks map onto threads.
inline constexpr std::size_t kChunkSize = std::size_t{1} << 15;

/// Random stream for one chunk of one run.
///
/// Splitting rule: chunk c of a run with master seed s uses a 64-bit Mersenne twister
/// seeded from std::seed_seq{lo32(s), hi32(s), lo32(c), hi32(c)}, i.e. the chunk index
/// is appended to the seed words. std::seed_seq and std::mt19937_64 are fully specified
/// by the standard, and the variate transforms below are written out by hand, so the
/// streams are identical across standard library implementations.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t bits() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double exponential() { return -std::log(uniform()); }

  /// Standard Pareto(1): P[R > r] = 1/r for r >= 1.
  double pareto() { return 1.0 / uniform(); }

  bool coin() { return (engine_() >> 63) != 0; }

  /// Standard normal by Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derives an independent master seed for a sub-experiment (threshold cell, replicate, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace cevlab
