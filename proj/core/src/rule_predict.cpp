#include "treerules/rule_predict.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "treerules/error.hpp"
#include "treerules/number_format.hpp"

namespace treerules {
namespace {

void check_features(const RuleSet& rules, std::span<const double> sample) {
  check_sample(sample, static_cast<std::size_t>(rules.n_features));
}

}  // namespace

Probabilities rule_predict(const RuleSet& rules, std::span<const double> sample) {
  check_features(rules, sample);
  Probabilities sum{0.0, 0.0};
  for (int t = 0; t < rules.n_trees; ++t) {
    const Rule* fired = nullptr;
    for (const auto& rule : rules.tree_rules(t)) {
      if (!rule.matches(sample)) continue;
      if (fired) {
        throw ConsistencyError("tree " + std::to_string(t) + ": leaves " +
                               std::to_string(fired->leaf_id) + " and " +
                               std::to_string(rule.leaf_id) + " both fire");
      }
      fired = &rule;
    }
    if (!fired) throw ConsistencyError("tree " + std::to_string(t) + ": no rule fires");
    sum[0] += fired->leaf_probabilities[0];
    sum[1] += fired->leaf_probabilities[1];
  }
  const auto m = static_cast<double>(rules.normalization);
  return {sum[0] / m, sum[1] / m};
}

std::vector<double> rule_predict_batch(const RuleSet& rules, const Dataset& data) {
  if (!data.empty() && data.n_features() != static_cast<std::size_t>(rules.n_features)) {
    throw DataError("dataset has " + std::to_string(data.n_features()) + " features, rules expect " +
                    std::to_string(rules.n_features));
  }
  std::vector<double> out;
  out.reserve(data.n_samples());
  for (std::size_t i = 0; i < data.n_samples(); ++i) out.push_back(rule_predict(rules, data.row(i))[1]);
  return out;
}

CompiledRules::CompiledRules(RuleSet rules) : rules_(std::move(rules)) {
  rules_.validate();
  for (int t = 0; t < rules_.n_trees; ++t) trees_.push_back(rebuild_tree(rules_, t));
}

Probabilities CompiledRules::predict(std::span<const double> sample) const {
  check_features(rules_, sample);
  Probabilities sum{0.0, 0.0};
  for (const auto& tree : trees_) {
    std::size_t at = 0;
    while (!tree[at].is_leaf()) {
      const auto& node = tree[at];
      at = static_cast<std::size_t>(
          sample[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
    }
    const auto& p = rules_.rules[static_cast<std::size_t>(tree[at].rule)].leaf_probabilities;
    sum[0] += p[0];
    sum[1] += p[1];
  }
  const auto m = static_cast<double>(rules_.normalization);
  return {sum[0] / m, sum[1] / m};
}

EquivalenceReport verify_equivalence(const Model& model, const RuleSet& rules, const Dataset& data) {
  if (data.empty()) throw DataError("empty dataset");
  const std::size_t d = n_features(model);
  if (static_cast<std::size_t>(rules.n_features) != d || data.n_features() != d) {
    throw DataError("feature count mismatch: model " + std::to_string(d) + ", rules " +
                    std::to_string(rules.n_features) + ", data " + std::to_string(data.n_features()));
  }

  EquivalenceReport report;
  report.per_sample.reserve(data.n_samples());
  std::vector<double> rule_p;
  std::vector<double> model_p;
  for (std::size_t i = 0; i < data.n_samples(); ++i) {
    const double r = rule_predict(rules, data.row(i))[1];
    const double m = predict_proba(model, data.row(i))[1];
    const double diff = std::fabs(r - m);
    report.per_sample.push_back({i, r, m, diff});
    report.max_abs_difference = std::max(report.max_abs_difference, diff);
    rule_p.push_back(r);
    model_p.push_back(m);
  }
  report.rule_stats = describe(rule_p);
  report.model_stats = describe(model_p);
  return report;
}

std::string report_to_csv(const EquivalenceReport& report) {
  std::string out = "sample_index,rule_probability,model_probability,abs_difference\n";
  for (const auto& s : report.per_sample) {
    out += std::to_string(s.sample_index) + ',' + format_shortest(s.rule_probability) + ',' +
           format_shortest(s.model_probability) + ',' + format_shortest(s.abs_difference) + '\n';
  }
  const auto& r = report.rule_stats;
  const auto& m = report.model_stats;
  const std::pair<const char*, std::pair<double, double>> rows[] = {
      {"Mean", {r.mean, m.mean}},           {"Stand. Dev.", {r.std, m.std}},
      {"Minimum", {r.min, m.min}},          {"25% Quantile", {r.q25, m.q25}},
      {"50% Quantile", {r.q50, m.q50}},     {"75% Quantile", {r.q75, m.q75}},
      {"Maximum", {r.max, m.max}},
  };
  out += "# statistic,rule_probability,model_probability,difference\n";
  for (const auto& [name, values] : rows) {
    out += std::string("# ") + name + ',' + format_shortest(values.first) + ',' +
           format_shortest(values.second) + ',' + format_shortest(std::fabs(values.first - values.second)) +
           '\n';
  }
  out += "# max_abs_difference=" + format_shortest(report.max_abs_difference) + '\n';
  return out;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const std::uint8_t> targets) {
  if (scores.size() != targets.size()) throw DataError("scores and targets differ in length");
  std::uint64_t positives = 0;
  for (auto t : targets) positives += t == 1 ? 1 : 0;
  const std::uint64_t negatives = targets.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw DataError("ROC needs at least one positive and one negative target");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  // Twice the area in units of (1/negatives) x (1/positives); integral, so
  // the AUC is a single correctly rounded division.
  std::uint64_t doubled_area = 0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double score = scores[order[i]];
    const std::uint64_t tp_before = tp;
    const std::uint64_t fp_before = fp;
    for (; i < order.size() && scores[order[i]] == score; ++i) {
      (targets[order[i]] == 1 ? tp : fp) += 1;
    }
    doubled_area += (fp - fp_before) * (tp + tp_before);
    curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(negatives),
                              static_cast<double>(tp) / static_cast<double>(positives));
  }
  curve.auc = static_cast<double>(doubled_area) /
              (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
  return curve;
}

std::string roc_to_csv(const RocCurve& curve) {
  std::string out = "fpr,tpr\n";
  for (const auto& [fpr, tpr] : curve.points) out += format_shortest(fpr) + ',' + format_shortest(tpr) + '\n';
  return out;
}

}  // namespace treerules
