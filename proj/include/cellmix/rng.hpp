#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace cellmix {

/// Deterministic PRNG with a portable, pinned output stream.
///
/// Seed expansion: four successive splitmix64 outputs initialize the
/// xoshiro256** state. Bounded draws use Lemire's multiply-shift
/// reduction (no rejection), permutations use Fisher-Yates from the top
/// index down, and doubles take the high 53 bits of one output. Two
/// implementations that follow these rules produce byte-identical
/// streams for the same seed.
class Rng {
public:
  /// Decorrelated sub-stream seed: one splitmix64 mix of
  /// seed + (stream + 1) * golden gamma.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto &word : state_) {
      x += 0x9E3779B97F4A7C15ull;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
      word = z ^ (z >> 31);
    }
  }

  /// Next raw 64-bit word (xoshiro256**).
  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform draw in [0, bound) via Lemire reduction; one word consumed.
  std::uint64_t bounded(std::uint64_t bound) {
    if (bound == 0) {
      throw std::invalid_argument("Rng::bounded: bound must be positive");
    }
    const auto wide = static_cast<__uint128_t>(next_u64()) * bound;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  /// Uniform double in [0, 1); one word consumed.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// In-place uniform permutation (Fisher-Yates, descending index).
  /// Consumes size-1 words; empty and single-element spans consume none.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(bounded(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  /// Uniform sample of `count` distinct values from {0..population-1},
  /// returned sorted ascending. Partial Fisher-Yates selection pass;
  /// consumes exactly `count` words.
  std::vector<std::uint32_t> sample_without_replacement(std::uint32_t population,
                                                        std::uint32_t count);

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

inline std::vector<std::uint32_t> Rng::sample_without_replacement(std::uint32_t population,
                                                                  std::uint32_t count) {
  if (count > population) {
    throw std::invalid_argument("Rng::sample_without_replacement: count exceeds population");
  }
  std::vector<std::uint32_t> ids(population);
  for (std::uint32_t i = 0; i < population; ++i) {
    ids[i] = i;
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::uint32_t>(bounded(population - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace cellmix
