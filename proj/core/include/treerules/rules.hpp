#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treerules/cart.hpp"
#include "treerules/model.hpp"

namespace treerules {

enum class CompareOp : std::uint8_t { kLessEqual, kGreater };

/// "le" / "gt" in files, "<=" / ">" in rendered text.
std::string_view file_token(CompareOp op) noexcept;
std::string_view symbol(CompareOp op) noexcept;

struct Predicate {
  int feature = 0;
  std::string feature_name;
  CompareOp op = CompareOp::kLessEqual;
  double threshold = 0.0;

  bool holds(double value) const noexcept {
    return op == CompareOp::kLessEqual ? value <= threshold : value > threshold;
  }
  bool operator==(const Predicate&) const = default;
};

/// One root-to-leaf path: the conjunction of its predicates in root-to-leaf
/// order, and the leaf's class probabilities.
struct Rule {
  int tree_id = 0;
  NodeId leaf_id = 0;
  std::vector<Predicate> predicates;
  Probabilities leaf_probabilities{};
  std::uint64_t n_leaf_samples = 0;

  bool matches(std::span<const double> sample) const noexcept;
  bool operator==(const Rule&) const = default;
};

/// Rules of every tree of a model, grouped by ascending tree_id. Summing the
/// firing rule of each tree and dividing by `normalization` reproduces the
/// model's prediction.
struct RuleSet {
  std::vector<Rule> rules;
  int n_trees = 0;
  int n_features = 0;
  std::vector<std::string> feature_names;
  ModelKind model_kind = ModelKind::kTree;
  int normalization = 1;

  /// Throws ValidationError on out-of-range ids, ungrouped tree ids, a tree
  /// without rules, or non-finite thresholds and probabilities.
  void validate() const;

  /// Rules of tree `tree_id`.
  std::span<const Rule> tree_rules(int tree_id) const;

  bool operator==(const RuleSet&) const = default;
};

/// Default feature names f0, f1, ... used when a model carries none.
std::vector<std::string> default_feature_names(std::size_t n_features);

/// One rule per leaf, in depth-first left-then-right order. A left edge
/// contributes `<=`, a right edge `>`, each with the stored threshold.
std::vector<Rule> build_rules(const TreeModel& tree, int tree_id,
                              std::span<const std::string> feature_names = {});

/// build_rules over every estimator in index order; normalization is the
/// number of estimators (1 for a single tree).
RuleSet model_2rules(const Model& model, std::span<const std::string> feature_names = {});

/// Rule file, one header plus one row per rule:
///
///   # treerules rule set
///   # format_version=1
///   # model_kind=forest
///   # n_trees=5
///   # normalization=5
///   # n_features=3
///   # feature_names=loan_amnt,int_rate,recoveries
///   tree_id,leaf_id,n_leaf_samples,predicates,p0,p1
///   0,3,812,0|le|2.5;2|gt|0.005,0.25,0.75
///
/// Numbers are written as shortest round-trip decimals.
std::string rules_to_csv(const RuleSet& rules);
void emit_csv(const RuleSet& rules, const std::filesystem::path& path);

/// Inverse of rules_to_csv. Throws ParseError with the offending line number.
RuleSet parse_rules_csv(std::string_view text);
RuleSet load_rules_csv(const std::filesystem::path& path);

/// Nested if/else rendering per tree:
///
///   if int_rate <= 12.5:
///       return [0.9, 0.1]
///   else:
///       return [0.4, 0.6]
///
/// Forests prefix each tree with a "# estimator <t>" line.
std::string emit_text(const RuleSet& rules);

/// A tree rebuilt from the predicate paths of one tree's rules.
struct RuleTreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Index into RuleSet::rules for leaves, -1 for splits.
  int rule = -1;

  bool is_leaf() const noexcept { return rule >= 0; }
};

/// Rebuilds the decision tree of `tree_id` from its rules. Throws
/// ConsistencyError when the paths disagree on a split, a path ends inside
/// another, or a split lacks a branch (the rules would not tile the space).
std::vector<RuleTreeNode> rebuild_tree(const RuleSet& rules, int tree_id);

}  // namespace treerules
