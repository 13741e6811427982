#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace treerules {

/// All randomness in the library flows through this generator: a 64-bit
/// Mersenne Twister (std::mt19937_64, whose output sequence is fixed by the
/// C++ standard) plus an explicitly defined bounded draw, so results do not
/// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound) by rejection sampling on the raw 64-bit
  /// output: draws r until r < bound * floor(2^64 / bound), returns r % bound.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// In-place Fisher-Yates shuffle, walking i from size-1 down to 1 and
  /// swapping i with uniform_index(i + 1).
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  /// `count` distinct values from [0, population), in draw order (partial
  /// Fisher-Yates from the front of the identity permutation).
  std::vector<int> sample_without_replacement(int population, int count);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of tree `index` in an ensemble: master + index * 0x9E3779B97F4A7C15
/// (mod 2^64). Tree 0 uses the master seed unchanged.
std::uint64_t tree_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace treerules
