#include "treerules/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "treerules/error.hpp"
#include "treerules/random.hpp"

namespace treerules {
namespace {

__extension__ using u128 = unsigned __int128;

std::uint64_t sum_of_squares(const ClassCounts& c) { return c[0] * c[0] + c[1] * c[1]; }

// Rational (num / den) proportional to the weighted child purity
// sum_sq(L)/nL + sum_sq(R)/nR; larger means a larger impurity decrease.
struct Score {
  u128 num = 0;
  u128 den = 1;

  bool greater_than(const Score& other) const { return num * other.den > other.num * den; }
};

Score child_score(const ClassCounts& left, const ClassCounts& right) {
  const std::uint64_t n_left = left[0] + left[1];
  const std::uint64_t n_right = right[0] + right[1];
  return {u128(sum_of_squares(left)) * n_right + u128(sum_of_squares(right)) * n_left,
          u128(n_left) * n_right};
}

double weighted_decrease(const ClassCounts& parent, const ClassCounts& left, const ClassCounts& right) {
  const auto n = static_cast<double>(parent[0] + parent[1]);
  const auto n_left = static_cast<double>(left[0] + left[1]);
  const auto n_right = static_cast<double>(right[0] + right[1]);
  return gini(parent) - n_left / n * gini(left) - n_right / n * gini(right);
}

Probabilities probabilities_of(const ClassCounts& counts) {
  const auto total = static_cast<double>(counts[0] + counts[1]);
  return {static_cast<double>(counts[0]) / total, static_cast<double>(counts[1]) / total};
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeParams& params)
      : data_(data), params_(params), rng_(params.seed) {}

  TreeModel build(std::vector<std::uint32_t> rows) {
    if (params_.max_leaf_nodes) {
      grow_best_first(std::move(rows));
    } else {
      grow_depth_first(std::move(rows));
    }
    return TreeModel(std::move(nodes_), data_.n_features(), params_);
  }

 private:
  struct Pending {
    std::vector<std::uint32_t> rows;
    int depth = 0;
    NodeId parent = kNoChild;
    bool is_left = false;
  };

  struct Frontier {
    double priority = 0.0;
    NodeId id = 0;
    int depth = 0;
    Split split;
    std::vector<std::uint32_t> rows;
  };

  struct FrontierOrder {
    bool operator()(const Frontier& a, const Frontier& b) const {
      if (a.priority != b.priority) return a.priority < b.priority;
      return a.id > b.id;
    }
  };

  NodeId make_leaf(const std::vector<std::uint32_t>& rows) {
    TreeNode node;
    for (auto r : rows) ++node.class_counts[static_cast<std::size_t>(data_.target(r))];
    node.n_node_samples = rows.size();
    node.impurity = gini(node.class_counts);
    node.probabilities = probabilities_of(node.class_counts);
    nodes_.push_back(node);
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  std::optional<Split> find_split(NodeId id, const std::vector<std::uint32_t>& rows, int depth) {
    const TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    if (params_.max_depth && depth >= *params_.max_depth) return std::nullopt;
    if (rows.size() < static_cast<std::size_t>(params_.min_samples_split)) return std::nullopt;
    if (node.class_counts[0] == 0 || node.class_counts[1] == 0) return std::nullopt;

    const int n_features = static_cast<int>(data_.n_features());
    std::vector<int> candidates;
    if (params_.max_features && *params_.max_features < n_features) {
      candidates = rng_.sample_without_replacement(n_features, *params_.max_features);
      std::sort(candidates.begin(), candidates.end());
    } else {
      candidates.resize(static_cast<std::size_t>(n_features));
      std::iota(candidates.begin(), candidates.end(), 0);
    }
    return best_split(rows, data_, candidates);
  }

  std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> partition(
      const std::vector<std::uint32_t>& rows, const Split& split) const {
    std::vector<std::uint32_t> left;
    std::vector<std::uint32_t> right;
    for (auto r : rows) {
      (data_.value(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right)
          .push_back(r);
    }
    return {std::move(left), std::move(right)};
  }

  void make_internal(NodeId id, const Split& split) {
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.kind = NodeKind::kInternal;
    node.feature = split.feature;
    node.threshold = split.threshold;
  }

  void link(NodeId parent, bool is_left, NodeId child) {
    if (parent == kNoChild) return;
    auto& node = nodes_[static_cast<std::size_t>(parent)];
    (is_left ? node.left : node.right) = child;
  }

  // Preorder ids: a node's left subtree is numbered before its right subtree.
  void grow_depth_first(std::vector<std::uint32_t> rows) {
    std::vector<Pending> stack;
    stack.push_back({std::move(rows), 0, kNoChild, false});
    while (!stack.empty()) {
      Pending item = std::move(stack.back());
      stack.pop_back();
      const NodeId id = make_leaf(item.rows);
      link(item.parent, item.is_left, id);
      const auto split = find_split(id, item.rows, item.depth);
      if (!split) continue;
      make_internal(id, *split);
      auto [left, right] = partition(item.rows, *split);
      stack.push_back({std::move(right), item.depth + 1, id, false});
      stack.push_back({std::move(left), item.depth + 1, id, true});
    }
  }

  // Expands the frontier node with the largest n_node * impurity decrease
  // (proportional to its weighted decrease) until max_leaf_nodes is reached.
  void grow_best_first(std::vector<std::uint32_t> rows) {
    std::priority_queue<Frontier, std::vector<Frontier>, FrontierOrder> frontier;
    auto enqueue = [&](NodeId id, std::vector<std::uint32_t> node_rows, int depth) {
      if (auto split = find_split(id, node_rows, depth)) {
        const double priority = static_cast<double>(node_rows.size()) * split->impurity_decrease;
        frontier.push({priority, id, depth, *split, std::move(node_rows)});
      }
    };

    const NodeId root = make_leaf(rows);
    enqueue(root, std::move(rows), 0);
    int leaves = 1;
    const int max_leaves = *params_.max_leaf_nodes;
    while (!frontier.empty() && leaves < max_leaves) {
      Frontier best = frontier.top();
      frontier.pop();
      make_internal(best.id, best.split);
      auto [left, right] = partition(best.rows, best.split);
      const NodeId left_id = make_leaf(left);
      link(best.id, true, left_id);
      enqueue(left_id, std::move(left), best.depth + 1);
      const NodeId right_id = make_leaf(right);
      link(best.id, false, right_id);
      enqueue(right_id, std::move(right), best.depth + 1);
      ++leaves;
    }
  }

  const Dataset& data_;
  const TreeParams& params_;
  Rng rng_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

void TreeParams::validate() const {
  if (max_depth && *max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (max_features && *max_features < 1) throw ConfigError("max_features must be >= 1");
  if (max_leaf_nodes && *max_leaf_nodes < 1) throw ConfigError("max_leaf_nodes must be >= 1");
  if (min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
}

double gini(const ClassCounts& counts) {
  const std::uint64_t total = counts[0] + counts[1];
  if (total == 0) throw DataError("gini impurity of an empty node");
  const double p0 = static_cast<double>(counts[0]) / static_cast<double>(total);
  const double p1 = static_cast<double>(counts[1]) / static_cast<double>(total);
  return 1.0 - (p0 * p0 + p1 * p1);
}

void check_sample(std::span<const double> sample, std::size_t n_features) {
  if (sample.size() != n_features) {
    throw DataError("sample has " + std::to_string(sample.size()) + " features, model expects " +
                    std::to_string(n_features));
  }
  for (double v : sample) {
    if (!std::isfinite(v)) throw DataError("sample contains a non-finite value");
  }
}

TreeModel::TreeModel(std::vector<TreeNode> nodes, std::size_t n_features, TreeParams params)
    : nodes_(std::move(nodes)), n_features_(n_features), params_(params) {
  if (nodes_.empty()) throw ValidationError("tree has no nodes");
  const auto n = static_cast<NodeId>(nodes_.size());
  std::vector<int> parents(nodes_.size(), 0);

  for (NodeId id = 0; id < n; ++id) {
    auto& node = nodes_[static_cast<std::size_t>(id)];
    const std::string where = "node " + std::to_string(id);
    if (node.is_leaf()) {
      if (node.left != kNoChild || node.right != kNoChild) {
        throw ValidationError(where + ": leaf has children");
      }
      if (node.class_counts[0] + node.class_counts[1] == 0) {
        throw ValidationError(where + ": leaf has no samples");
      }
      node.feature = kLeafFeature;
      node.threshold = kLeafThreshold;
    } else {
      if (node.left < 0 || node.left >= n || node.right < 0 || node.right >= n) {
        throw ValidationError(where + ": child index out of range");
      }
      if (node.left == node.right) throw ValidationError(where + ": children are not distinct");
      if (node.left == id || node.right == id) throw ValidationError(where + ": node is its own child");
      if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= n_features_) {
        throw ValidationError(where + ": feature index out of range");
      }
      if (!std::isfinite(node.threshold)) throw ValidationError(where + ": threshold is not finite");
      ++parents[static_cast<std::size_t>(node.left)];
      ++parents[static_cast<std::size_t>(node.right)];
    }
    if (node.class_counts[0] + node.class_counts[1] > 0) {
      node.probabilities = probabilities_of(node.class_counts);
      node.impurity = gini(node.class_counts);
    }
  }

  if (parents[0] != 0) throw ValidationError("node 0: root has a parent");
  for (NodeId id = 1; id < n; ++id) {
    if (parents[static_cast<std::size_t>(id)] != 1) {
      throw ValidationError("node " + std::to_string(id) + ": expected exactly one parent, found " +
                            std::to_string(parents[static_cast<std::size_t>(id)]));
    }
  }
  // With one parent per non-root node, the graph is a tree iff every node is
  // reachable from the root.
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<NodeId> stack{0};
  std::size_t reached = 0;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(id)]) throw ValidationError("tree contains a cycle");
    seen[static_cast<std::size_t>(id)] = true;
    ++reached;
    const auto& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.is_leaf()) {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  if (reached != nodes_.size()) throw ValidationError("tree has nodes unreachable from the root");

  importances_ = treerules::feature_importances(*this);
}

std::size_t TreeModel::n_leaves() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int TreeModel::depth() const noexcept {
  int deepest = 0;
  std::vector<std::pair<NodeId, int>> stack{{root(), 0}};
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const auto& node = this->node(id);
    if (!node.is_leaf()) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return deepest;
}

NodeId TreeModel::apply(std::span<const double> sample) const {
  check_sample(sample, n_features_);
  NodeId id = root();
  while (!node(id).is_leaf()) {
    const auto& n = node(id);
    id = sample[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return id;
}

std::optional<Split> best_split(std::span<const std::uint32_t> rows, const Dataset& data,
                                std::span<const int> candidate_features) {
  if (rows.size() < 2) return std::nullopt;
  // Keeps every Score product below 2^128.
  if (rows.size() > (std::size_t{1} << 25)) {
    throw DataError("node has more than 2^25 samples; split scoring would overflow");
  }

  ClassCounts parent{};
  for (auto r : rows) ++parent[static_cast<std::size_t>(data.target(r))];
  const std::uint64_t n = rows.size();
  // Children must beat sum_sq(parent) / n for the decrease to be positive.
  const Score baseline{u128(sum_of_squares(parent)), u128(n)};

  std::vector<int> features(candidate_features.begin(), candidate_features.end());
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());

  std::optional<Split> best;
  Score best_score = baseline;
  ClassCounts best_left{};

  std::vector<std::pair<double, std::uint8_t>> column(rows.size());
  for (int feature : features) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      column[i] = {data.value(rows[i], static_cast<std::size_t>(feature)),
                   static_cast<std::uint8_t>(data.target(rows[i]))};
    }
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    ClassCounts left{};
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      ++left[column[i].second];
      const double lo = column[i].first;
      const double hi = column[i + 1].first;
      if (!(lo < hi)) continue;
      const ClassCounts right{parent[0] - left[0], parent[1] - left[1]};
      const Score score = child_score(left, right);
      if (!score.greater_than(best_score)) continue;

      double threshold = std::midpoint(lo, hi);
      // Adjacent doubles can round the midpoint up to `hi`, which would send
      // `hi` left as well.
      if (!(threshold < hi)) threshold = lo;
      best_score = score;
      best_left = left;
      best = Split{feature, threshold, 0.0};
    }
  }

  if (best) {
    const ClassCounts right{parent[0] - best_left[0], parent[1] - best_left[1]};
    best->impurity_decrease = weighted_decrease(parent, best_left, right);
  }
  return best;
}

TreeModel fit_tree(const Dataset& data, std::span<const std::uint32_t> rows, const TreeParams& params) {
  params.validate();
  if (rows.empty()) throw DataError("empty dataset");
  TreeBuilder builder(data, params);
  return builder.build(std::vector<std::uint32_t>(rows.begin(), rows.end()));
}

TreeModel fit_tree(const Dataset& data, const TreeParams& params) {
  if (data.empty()) throw DataError("empty dataset");
  std::vector<std::uint32_t> rows(data.n_samples());
  std::iota(rows.begin(), rows.end(), 0U);
  return fit_tree(data, rows, params);
}

Probabilities predict_proba_tree(const TreeModel& model, std::span<const double> sample) {
  return model.node(model.apply(sample)).probabilities;
}

std::vector<double> feature_importances(const TreeModel& model) {
  std::vector<double> importances(model.n_features(), 0.0);
  const auto& nodes = model.nodes();
  if (nodes.empty()) return importances;
  const auto total = static_cast<double>(nodes[0].n_node_samples);
  if (total <= 0.0) return importances;

  for (const auto& node : nodes) {
    if (node.is_leaf()) continue;
    const auto& left = model.node(node.left);
    const auto& right = model.node(node.right);
    const auto n = static_cast<double>(node.n_node_samples);
    if (n <= 0.0) continue;
    const double decrease = node.impurity -
                            static_cast<double>(left.n_node_samples) / n * left.impurity -
                            static_cast<double>(right.n_node_samples) / n * right.impurity;
    importances[static_cast<std::size_t>(node.feature)] += n / total * std::max(decrease, 0.0);
  }
  const double sum = std::accumulate(importances.begin(), importances.end(), 0.0);
  if (sum > 0.0) {
    for (double& v : importances) v /= sum;
  }
  return importances;
}

}  // namespace treerules
