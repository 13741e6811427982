#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treerules/cart.hpp"
#include "treerules/data.hpp"
#include "treerules/random.hpp"

namespace treerules::testing {

/// Uniform double in [0, 1) from the top 53 bits.
double unit(Rng& rng);

/// Random binary tree over `n_features` features with depth <= max_depth.
/// Thresholds are drawn from the half-integer lattice {-0.5, 0, 0.5, ...,
/// levels - 1} so that integer grid points land exactly on thresholds.
TreeModel random_tree(Rng& rng, int n_features, int max_depth, int levels);

/// Root-to-leaf walk over the raw node arena, independent of TreeModel::apply.
NodeId traverse(const TreeModel& tree, std::span<const double> sample);

/// Random binary classification data with values drawn from a small integer
/// set (to force ties) or from a continuous range.
Dataset random_dataset(Rng& rng, std::size_t n_samples, std::size_t n_features);

}  // namespace treerules::testing
