#include "treerules/explain.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "treerules/csv.hpp"
#include "treerules/error.hpp"
#include "treerules/file_io.hpp"
#include "treerules/number_format.hpp"

namespace treerules {
namespace {

using Key = std::tuple<int, CompareOp, double>;

Key key_of(const Decision& d) { return {d.feature_index, d.op, d.threshold}; }

const Rule& firing_rule(const RuleSet& rules, int tree_id, std::span<const double> sample) {
  const Rule* fired = nullptr;
  for (const auto& rule : rules.tree_rules(tree_id)) {
    if (!rule.matches(sample)) continue;
    if (fired) throw ConsistencyError("tree " + std::to_string(tree_id) + ": several rules fire");
    fired = &rule;
  }
  if (!fired) throw ConsistencyError("tree " + std::to_string(tree_id) + ": no rule fires");
  return *fired;
}

std::vector<Decision> collect(const RuleSet& rules, std::span<const double> sample,
                              const FeatureDictionary& dictionary) {
  std::vector<Decision> decisions;
  std::set<Key> seen;
  for (int t = 0; t < rules.n_trees; ++t) {
    const auto& rule = firing_rule(rules, t, sample);
    for (std::size_t depth = 0; depth < rule.predicates.size(); ++depth) {
      const auto& p = rule.predicates[depth];
      Decision d;
      d.feature_index = p.feature;
      d.feature_name = rules.feature_names[static_cast<std::size_t>(p.feature)];
      const auto entry = dictionary.find(d.feature_name);
      d.description = entry == dictionary.end() ? d.feature_name : entry->second;
      d.client_value = sample[static_cast<std::size_t>(p.feature)];
      d.op = p.op;
      d.threshold = p.threshold;
      d.estimator_id = t;
      d.depth = static_cast<int>(depth);
      if (seen.insert(key_of(d)).second) decisions.push_back(std::move(d));
    }
  }
  return decisions;
}

void order_and_number(std::vector<Decision>& decisions, std::span<const double> importances) {
  std::stable_sort(decisions.begin(), decisions.end(), [&](const Decision& a, const Decision& b) {
    return importances[static_cast<std::size_t>(a.feature_index)] >
           importances[static_cast<std::size_t>(b.feature_index)];
  });
  for (std::size_t k = 0; k < decisions.size(); ++k) decisions[k].rank = static_cast<int>(k) + 1;
}

void check_inputs(const Model& model, const RuleSet& rules, std::span<const double> sample) {
  const std::size_t d = n_features(model);
  if (static_cast<std::size_t>(rules.n_features) != d) {
    throw DataError("rules have " + std::to_string(rules.n_features) + " features, model has " +
                    std::to_string(d));
  }
  check_sample(sample, d);
}

}  // namespace

FeatureDictionary parse_feature_dictionary(std::string_view text) {
  std::istringstream in{std::string(text)};
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header || header->size() != 2 || (*header)[0] != "feature_name" || (*header)[1] != "description") {
    throw ParseError("feature dictionary must start with 'feature_name,description'", 1);
  }
  FeatureDictionary dictionary;
  while (auto record = reader.next()) {
    if (record->size() == 1 && (*record)[0].empty()) continue;
    if (record->size() != 2) throw ParseError("expected 2 fields", reader.line());
    dictionary[(*record)[0]] = (*record)[1];
  }
  return dictionary;
}

FeatureDictionary load_feature_dictionary(const std::filesystem::path& path) {
  return parse_feature_dictionary(read_file(path));
}

DecisionPath display_rule_per_estimator(const Model& model, const RuleSet& rules,
                                        std::span<const double> sample,
                                        const FeatureDictionary& dictionary, std::string sample_ref) {
  check_inputs(model, rules, sample);
  DecisionPath path;
  path.sample_ref = std::move(sample_ref);
  path.kind = PathKind::kSingleClient;
  path.decisions = collect(rules, sample, dictionary);
  order_and_number(path.decisions, feature_importances(model));
  return path;
}

DecisionPath group_path(const Model& model, const RuleSet& rules,
                        std::span<const std::span<const double>> samples,
                        const FeatureDictionary& dictionary, std::string group_ref) {
  if (samples.empty()) throw DataError("empty group");
  for (const auto& s : samples) check_inputs(model, rules, s);

  auto common = collect(rules, samples[0], dictionary);
  for (std::size_t i = 1; i < samples.size() && !common.empty(); ++i) {
    std::set<Key> member;
    for (const auto& d : collect(rules, samples[i], dictionary)) member.insert(key_of(d));
    std::erase_if(common, [&](const Decision& d) { return !member.contains(key_of(d)); });
  }
  for (auto& d : common) d.client_value.reset();

  DecisionPath path;
  path.sample_ref = std::move(group_ref);
  path.kind = PathKind::kGroup;
  path.decisions = std::move(common);
  order_and_number(path.decisions, feature_importances(model));
  return path;
}

std::string render_text(const DecisionPath& path) {
  if (path.decisions.empty()) {
    return "no decisions: the prediction does not depend on any split\n";
  }
  std::string out;
  for (const auto& d : path.decisions) {
    out += "decision " + std::to_string(d.rank) + ": " + d.description;
    if (d.client_value) out += " (=" + format_display(*d.client_value) + ")";
    out += " " + std::string(symbol(d.op)) + " " + format_display(d.threshold) + "\n";
  }
  return out;
}

std::string render_json(const DecisionPath& path) {
  nlohmann::ordered_json doc;
  doc["sample"] = path.sample_ref;
  doc["kind"] = path.kind == PathKind::kSingleClient ? "single-client" : "group";
  auto decisions = nlohmann::ordered_json::array();
  for (const auto& d : path.decisions) {
    nlohmann::ordered_json item;
    item["rank"] = d.rank;
    item["feature"] = d.feature_name;
    item["feature_index"] = d.feature_index;
    item["description"] = d.description;
    if (d.client_value) {
      item["client_value"] = *d.client_value;
    } else {
      item["client_value"] = nullptr;
    }
    item["op"] = std::string(symbol(d.op));
    item["threshold"] = d.threshold;
    item["estimator"] = d.estimator_id;
    item["depth"] = d.depth;
    decisions.push_back(std::move(item));
  }
  doc["decisions"] = std::move(decisions);
  return doc.dump(2) + "\n";
}

}  // namespace treerules
