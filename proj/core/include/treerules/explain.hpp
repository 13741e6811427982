#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treerules/model.hpp"
#include "treerules/rules.hpp"

namespace treerules {

/// A satisfied split predicate, as shown to a reader of the explanation.
struct Decision {
  int rank = 0;
  std::string feature_name;
  std::string description;
  int feature_index = 0;
  /// Absent in group paths, where members hold different values.
  std::optional<double> client_value;
  CompareOp op = CompareOp::kLessEqual;
  double threshold = 0.0;
  int estimator_id = 0;
  int depth = 0;
};

enum class PathKind { kSingleClient, kGroup };

struct DecisionPath {
  std::string sample_ref;
  PathKind kind = PathKind::kSingleClient;
  /// Ordered by descending feature importance; ties keep (estimator, depth) order.
  std::vector<Decision> decisions;
};

/// feature name -> business description.
using FeatureDictionary = std::map<std::string, std::string, std::less<>>;

/// Two-column CSV with header `feature_name,description`.
FeatureDictionary parse_feature_dictionary(std::string_view text);
FeatureDictionary load_feature_dictionary(const std::filesystem::path& path);

/// Decision path of one client: the firing rule's predicates of every
/// estimator, instantiated with the client's values, with exact
/// (feature, op, threshold) repeats across estimators dropped (first kept),
/// ordered by the model's feature importance and numbered from 1.
DecisionPath display_rule_per_estimator(const Model& model, const RuleSet& rules,
                                        std::span<const double> sample,
                                        const FeatureDictionary& dictionary = {},
                                        std::string sample_ref = {});

/// Decisions shared by every member: the intersection of the members'
/// deduplicated (feature, op, threshold) sets, ordered like a single path.
/// Throws DataError for an empty group.
DecisionPath group_path(const Model& model, const RuleSet& rules,
                        std::span<const std::span<const double>> samples,
                        const FeatureDictionary& dictionary = {}, std::string group_ref = {});

/// `decision k: <description> (=<value>) <op> <threshold>` lines, or a
/// "no decisions" notice for an empty path.
std::string render_text(const DecisionPath& path);
std::string render_json(const DecisionPath& path);

}  // namespace treerules
