#include "treerules/random.hpp"

#include <limits>
#include <numeric>

namespace treerules {

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  // 2^64 mod bound; draws in the top `excess` values are rejected.
  const std::uint64_t excess = (max % bound + 1) % bound;
  std::uint64_t r = engine_();
  if (excess != 0) {
    const std::uint64_t limit = max - excess + 1;
    while (r >= limit) r = engine_();
  }
  return r % bound;
}

std::vector<int> Rng::sample_without_replacement(int population, int count) {
  std::vector<int> pool(static_cast<std::size_t>(population));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < count; ++i) {
    const auto remaining = static_cast<std::uint64_t>(population - i);
    const auto j = i + static_cast<int>(uniform_index(remaining));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t tree_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return master + index * 0x9E3779B97F4A7C15ULL;
}

}  // namespace treerules
