#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treerules/data.hpp"
#include "treerules/model.hpp"
#include "treerules/rules.hpp"
#include "treerules/stats.hpp"

namespace treerules {

/// Prediction from the rule set alone. For each tree in ascending id order,
/// exactly one rule must fire; its probabilities are accumulated and the sum
/// divided by the normalization. The summation order matches
/// predict_proba_forest, so the result is bitwise equal to the source model's.
/// Throws ConsistencyError when zero or several rules of a tree fire.
Probabilities rule_predict(const RuleSet& rules, std::span<const double> sample);

/// Class-1 probability of every row of `data`, in row order.
std::vector<double> rule_predict_batch(const RuleSet& rules, const Dataset& data);

/// Rule set compiled back into per-tree decision trees, so a prediction
/// walks one path per tree instead of testing every rule. Agrees bitwise
/// with rule_predict.
class CompiledRules {
 public:
  /// Throws ConsistencyError if the rules of some tree do not tile the space.
  explicit CompiledRules(RuleSet rules);

  Probabilities predict(std::span<const double> sample) const;
  const RuleSet& rules() const noexcept { return rules_; }

 private:
  RuleSet rules_;
  std::vector<std::vector<RuleTreeNode>> trees_;
};

struct SampleComparison {
  std::size_t sample_index = 0;
  double rule_probability = 0.0;
  double model_probability = 0.0;
  double abs_difference = 0.0;
};

/// Per-sample class-1 probabilities from the rules and from the model, and
/// their summary statistics. Differences are exact; no tolerance is applied.
struct EquivalenceReport {
  std::vector<SampleComparison> per_sample;
  Describe rule_stats;
  Describe model_stats;
  double max_abs_difference = 0.0;

  bool exact() const noexcept { return max_abs_difference == 0.0; }
};

/// Throws DataError on an empty dataset or a feature-count mismatch between
/// the model, the rules and the data.
EquivalenceReport verify_equivalence(const Model& model, const RuleSet& rules, const Dataset& data);

/// Per-sample rows, then a '#'-prefixed footer with Mean, Stand. Dev.,
/// Minimum, 25%/50%/75% Quantile and Maximum for rules and model.
std::string report_to_csv(const EquivalenceReport& report);

struct RocCurve {
  /// (false positive rate, true positive rate), from (0, 0) to (1, 1), one
  /// point per distinct score.
  std::vector<std::pair<double, double>> points;
  double auc = 0.0;
};

/// Threshold-sweep ROC with tied scores grouped; AUC by the trapezoidal rule.
/// Throws DataError unless both classes are present.
RocCurve roc_auc(std::span<const double> scores, std::span<const std::uint8_t> targets);

std::string roc_to_csv(const RocCurve& curve);

}  // namespace treerules
