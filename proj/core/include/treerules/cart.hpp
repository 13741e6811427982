#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "treerules/data.hpp"

namespace treerules {

using NodeId = std::int32_t;
using ClassCounts = std::array<std::uint64_t, 2>;
using Probabilities = std::array<double, 2>;

inline constexpr NodeId kNoChild = -1;
/// Feature index and threshold stored on leaves (the flattened-array
/// convention shared with common toolkits).
inline constexpr std::int32_t kLeafFeature = -2;
inline constexpr double kLeafThreshold = -2.0;

enum class NodeKind : std::uint8_t { kInternal, kLeaf };

struct TreeNode {
  NodeKind kind = NodeKind::kLeaf;
  std::int32_t feature = kLeafFeature;
  double threshold = kLeafThreshold;
  NodeId left = kNoChild;
  NodeId right = kNoChild;
  /// Training-sample class histogram of the node (kept on every node).
  ClassCounts class_counts{};
  /// class_counts / sum(class_counts).
  Probabilities probabilities{};
  double impurity = 0.0;
  std::uint64_t n_node_samples = 0;

  bool is_leaf() const noexcept { return kind == NodeKind::kLeaf; }
  bool operator==(const TreeNode&) const = default;
};

struct TreeParams {
  std::optional<int> max_depth;
  std::optional<int> max_features;
  std::optional<int> max_leaf_nodes;
  int min_samples_split = 2;
  std::uint64_t seed = 0;

  /// Throws ConfigError when a bound is below its minimum.
  void validate() const;
  bool operator==(const TreeParams&) const = default;
};

/// Binary classification tree stored as a node arena rooted at node 0.
/// Left branch iff value <= threshold.
class TreeModel {
 public:
  TreeModel() = default;

  /// Validates the arena (rooted binary tree, in-range features, finite
  /// thresholds, non-empty leaves), recomputes node probabilities from the
  /// class counts and derives the feature importances. Throws
  /// ValidationError on any violation.
  TreeModel(std::vector<TreeNode> nodes, std::size_t n_features, TreeParams params = {});

  std::span<const TreeNode> nodes() const noexcept { return nodes_; }
  const TreeNode& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  static constexpr NodeId root() noexcept { return 0; }
  std::size_t n_features() const noexcept { return n_features_; }
  const TreeParams& params() const noexcept { return params_; }
  std::span<const double> feature_importances() const noexcept { return importances_; }

  std::size_t n_leaves() const noexcept;
  /// Length of the longest root-to-leaf path (0 for a single leaf).
  int depth() const noexcept;

  /// Leaf reached by `sample`. Throws DataError on a wrong length or a
  /// non-finite value.
  NodeId apply(std::span<const double> sample) const;

  bool operator==(const TreeModel&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
  TreeParams params_;
  std::vector<double> importances_;
};

/// Gini impurity 1 - sum_k p_k^2. Throws DataError when both counts are zero.
double gini(const ClassCounts& counts);

struct Split {
  int feature = 0;
  double threshold = 0.0;
  /// gini(parent) - nL/n * gini(left) - nR/n * gini(right).
  double impurity_decrease = 0.0;

  bool operator==(const Split&) const = default;
};

/// Best Gini split of the samples `rows` (indices into `data`, repeats
/// allowed) over `candidate_features`. Thresholds are midpoints between
/// consecutive distinct values. Splits are ranked with exact rational
/// arithmetic; ties go to the lowest feature index, then the lowest
/// threshold. Returns nullopt when no split has a strictly positive decrease.
std::optional<Split> best_split(std::span<const std::uint32_t> rows, const Dataset& data,
                                std::span<const int> candidate_features);

/// Grows a tree on every row of `data`.
TreeModel fit_tree(const Dataset& data, const TreeParams& params);

/// Grows a tree on the given sample multiset (e.g. a bootstrap draw).
TreeModel fit_tree(const Dataset& data, std::span<const std::uint32_t> rows, const TreeParams& params);

Probabilities predict_proba_tree(const TreeModel& model, std::span<const double> sample);

/// Mean-decrease-impurity importances: for each feature, the sum over its
/// splits of (n_node / n_root) * impurity decrease, normalized to sum 1.
/// All zeros for a single-leaf tree.
std::vector<double> feature_importances(const TreeModel& model);

/// Throws DataError unless `sample` has `n_features` finite values.
void check_sample(std::span<const double> sample, std::size_t n_features);

}  // namespace treerules
