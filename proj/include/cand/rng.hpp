#pragma once

#include <cstdint>
#include <vector>

namespace cand {

/// Deterministic 64-bit PRNG (splitmix64). Output sequence is fixed by the
/// seed alone, independent of platform or standard library, so model
/// training, traffic synthesis, and their tests stay reproducible everywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n); n must be far below 2^64 (modulo bias).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  /// Derive an independent child seed from this stream plus a salt.
  std::uint64_t fork(std::uint64_t salt) {
    SplitMix64 m(state_ ^ (salt * 0x9E3779B97F4A7C15ULL));
    return m.next_u64();
  }

 private:
  std::uint64_t state_;
};

/// Draw k distinct values from [0, n) by partial Fisher-Yates, in the order
/// they were selected.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                           std::size_t k,
                                                           SplitMix64& rng) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  if (k > n) k = n;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace cand
