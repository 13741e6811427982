#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treerules/cart.hpp"

namespace treerules {

struct ForestParams {
  int n_estimators = 5;
  /// Shared by every tree; its seed field is replaced by the per-tree seed.
  TreeParams tree_params;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  /// Worker threads used by fit_forest; results do not depend on it.
  int n_threads = 1;

  void validate() const;
  bool operator==(const ForestParams& other) const {
    return n_estimators == other.n_estimators && tree_params == other.tree_params &&
           bootstrap == other.bootstrap && seed == other.seed;
  }
};

/// Bagged ensemble; its prediction is the mean of the trees' leaf probabilities.
class ForestModel {
 public:
  ForestModel() = default;
  /// Throws ValidationError if `trees` is empty or the trees disagree on n_features.
  ForestModel(std::vector<TreeModel> trees, ForestParams params);

  std::span<const TreeModel> trees() const noexcept { return trees_; }
  const TreeModel& tree(std::size_t t) const { return trees_[t]; }
  std::size_t n_estimators() const noexcept { return trees_.size(); }
  std::size_t n_features() const noexcept { return trees_.empty() ? 0 : trees_.front().n_features(); }
  const ForestParams& params() const noexcept { return params_; }

  bool operator==(const ForestModel&) const = default;

 private:
  std::vector<TreeModel> trees_;
  ForestParams params_;
};

/// Tree t is grown with seed tree_seed(params.seed, t). With bootstrap, it
/// trains on n draws with replacement taken from a generator seeded with
/// splitmix64(tree seed); otherwise on every row. Trees are independent, so
/// training them on several threads yields the same forest.
ForestModel fit_forest(const Dataset& data, const ForestParams& params);

/// Bootstrap sample of tree `t`, as used by fit_forest.
std::vector<std::uint32_t> bootstrap_rows(std::size_t n_samples, std::uint64_t tree_seed);

/// (1/m) * sum over trees in index order of the tree probabilities.
Probabilities predict_proba_forest(const ForestModel& model, std::span<const double> sample);

/// Mean of the per-tree importances, renormalized to sum 1.
std::vector<double> forest_feature_importances(const ForestModel& model);

}  // namespace treerules
