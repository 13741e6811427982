#include "treerules/rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "treerules/csv.hpp"
#include "treerules/error.hpp"
#include "treerules/file_io.hpp"
#include "treerules/number_format.hpp"

namespace treerules {
namespace {

constexpr std::string_view kRuleHeader = "tree_id,leaf_id,n_leaf_samples,predicates,p0,p1";
constexpr int kRuleFormatVersion = 1;

std::vector<std::string_view> split_view(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

int to_int(long long v, std::size_t line, std::string_view what) {
  if (v < 0 || v > std::numeric_limits<int>::max()) {
    throw ParseError(std::string(what) + " out of range", line);
  }
  return static_cast<int>(v);
}

void render_tree(const RuleSet& rules, int tree_id, std::string& out) {
  const auto nodes = rebuild_tree(rules, tree_id);
  struct Frame {
    int node;
    int depth;
    bool is_else;
  };
  std::vector<Frame> stack{{0, 0, false}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    const auto& node = nodes[static_cast<std::size_t>(f.node)];
    const std::string indent(static_cast<std::size_t>(f.depth) * 4, ' ');
    if (f.is_else) {
      out += std::string(static_cast<std::size_t>(f.depth - 1) * 4, ' ') + "else:\n";
    }
    if (node.is_leaf()) {
      const auto& p = rules.rules[static_cast<std::size_t>(node.rule)].leaf_probabilities;
      out += indent + "return [" + format_display(p[0]) + ", " + format_display(p[1]) + "]\n";
      continue;
    }
    out += indent + "if " + rules.feature_names[static_cast<std::size_t>(node.feature)] +
           " <= " + format_display(node.threshold) + ":\n";
    stack.push_back({node.right, f.depth + 1, true});
    stack.push_back({node.left, f.depth + 1, false});
  }
}

}  // namespace

std::string_view file_token(CompareOp op) noexcept {
  return op == CompareOp::kLessEqual ? "le" : "gt";
}

std::string_view symbol(CompareOp op) noexcept {
  return op == CompareOp::kLessEqual ? "<=" : ">";
}

bool Rule::matches(std::span<const double> sample) const noexcept {
  return std::all_of(predicates.begin(), predicates.end(), [&](const Predicate& p) {
    return p.holds(sample[static_cast<std::size_t>(p.feature)]);
  });
}

void RuleSet::validate() const {
  if (n_trees < 1) throw ValidationError("rule set has no trees");
  if (normalization < 1) throw ValidationError("normalization must be >= 1");
  if (n_features < 1) throw ValidationError("rule set has no features");
  if (feature_names.size() != static_cast<std::size_t>(n_features)) {
    throw ValidationError("feature name list has " + std::to_string(feature_names.size()) +
                          " entries, expected " + std::to_string(n_features));
  }
  if (model_kind == ModelKind::kTree && n_trees != 1) {
    throw ValidationError("a single-tree rule set must have n_trees = 1");
  }
  int previous = 0;
  std::vector<bool> has_rules(static_cast<std::size_t>(n_trees), false);
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& rule = rules[i];
    const std::string where = "rule " + std::to_string(i);
    if (rule.tree_id < 0 || rule.tree_id >= n_trees) throw ValidationError(where + ": tree id out of range");
    if (rule.tree_id < previous) throw ValidationError(where + ": rules are not grouped by tree");
    previous = rule.tree_id;
    has_rules[static_cast<std::size_t>(rule.tree_id)] = true;
    for (const auto& p : rule.predicates) {
      if (p.feature < 0 || p.feature >= n_features) {
        throw ValidationError(where + ": feature index out of range");
      }
      if (!std::isfinite(p.threshold)) throw ValidationError(where + ": threshold is not finite");
    }
    for (double p : rule.leaf_probabilities) {
      if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(where + ": probability outside [0, 1]");
    }
  }
  for (int t = 0; t < n_trees; ++t) {
    if (!has_rules[static_cast<std::size_t>(t)]) {
      throw ValidationError("tree " + std::to_string(t) + " has no rules");
    }
  }
}

std::span<const Rule> RuleSet::tree_rules(int tree_id) const {
  const auto lo = std::lower_bound(rules.begin(), rules.end(), tree_id,
                                   [](const Rule& r, int id) { return r.tree_id < id; });
  const auto hi = std::upper_bound(lo, rules.end(), tree_id,
                                   [](int id, const Rule& r) { return id < r.tree_id; });
  return {lo, hi};
}

std::vector<std::string> default_feature_names(std::size_t n_features) {
  std::vector<std::string> names;
  names.reserve(n_features);
  for (std::size_t j = 0; j < n_features; ++j) names.push_back("f" + std::to_string(j));
  return names;
}

std::vector<Rule> build_rules(const TreeModel& tree, int tree_id,
                              std::span<const std::string> feature_names) {
  const auto names = feature_names.empty() ? default_feature_names(tree.n_features())
                                           : std::vector<std::string>(feature_names.begin(),
                                                                      feature_names.end());
  if (names.size() != tree.n_features()) {
    throw DataError("got " + std::to_string(names.size()) + " feature names for a model with " +
                    std::to_string(tree.n_features()) + " features");
  }

  std::vector<Rule> rules;
  struct Frame {
    NodeId node;
    std::vector<Predicate> path;
  };
  std::vector<Frame> stack;
  stack.push_back({TreeModel::root(), {}});
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const auto& node = tree.node(frame.node);
    if (node.is_leaf()) {
      rules.push_back({tree_id, frame.node, std::move(frame.path), node.probabilities,
                       node.n_node_samples});
      continue;
    }
    const auto& name = names[static_cast<std::size_t>(node.feature)];
    auto right_path = frame.path;
    right_path.push_back({node.feature, name, CompareOp::kGreater, node.threshold});
    frame.path.push_back({node.feature, name, CompareOp::kLessEqual, node.threshold});
    stack.push_back({node.right, std::move(right_path)});
    stack.push_back({node.left, std::move(frame.path)});
  }
  return rules;
}

RuleSet model_2rules(const Model& model, std::span<const std::string> feature_names) {
  RuleSet set;
  const auto trees = estimators(model);
  set.model_kind = kind_of(model);
  set.n_trees = static_cast<int>(trees.size());
  set.normalization = set.n_trees;
  set.n_features = static_cast<int>(n_features(model));
  set.feature_names = feature_names.empty()
                          ? default_feature_names(n_features(model))
                          : std::vector<std::string>(feature_names.begin(), feature_names.end());
  for (std::size_t t = 0; t < trees.size(); ++t) {
    auto tree_rules = build_rules(*trees[t], static_cast<int>(t), set.feature_names);
    std::move(tree_rules.begin(), tree_rules.end(), std::back_inserter(set.rules));
  }
  return set;
}

std::string rules_to_csv(const RuleSet& rules) {
  rules.validate();
  std::string out;
  out += "# treerules rule set\n";
  out += "# format_version=" + std::to_string(kRuleFormatVersion) + "\n";
  out += "# model_kind=" + std::string(to_string(rules.model_kind)) + "\n";
  out += "# n_trees=" + std::to_string(rules.n_trees) + "\n";
  out += "# normalization=" + std::to_string(rules.normalization) + "\n";
  out += "# n_features=" + std::to_string(rules.n_features) + "\n";
  out += "# feature_names=" + csv::join(rules.feature_names) + "\n";
  out += kRuleHeader;
  out += '\n';
  for (const auto& rule : rules.rules) {
    out += std::to_string(rule.tree_id) + ',' + std::to_string(rule.leaf_id) + ',' +
           std::to_string(rule.n_leaf_samples) + ',';
    for (std::size_t k = 0; k < rule.predicates.size(); ++k) {
      const auto& p = rule.predicates[k];
      if (k != 0) out += ';';
      out += std::to_string(p.feature) + '|' + std::string(file_token(p.op)) + '|' +
             format_shortest(p.threshold);
    }
    out += ',' + format_shortest(rule.leaf_probabilities[0]) + ',' +
           format_shortest(rule.leaf_probabilities[1]) + '\n';
  }
  return out;
}

void emit_csv(const RuleSet& rules, const std::filesystem::path& path) {
  write_file_atomically(path, rules_to_csv(rules));
}

RuleSet parse_rules_csv(std::string_view text) {
  RuleSet set;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool kind_seen = false;
  int version = 0;
  std::optional<int> n_trees;
  std::optional<int> normalization;
  std::optional<int> n_features;
  std::optional<std::vector<std::string>> names;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line.empty()) continue;
      if (line.front() == '#') {
        std::string_view body(line);
        body.remove_prefix(1);
        while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) continue;
        const auto key = body.substr(0, eq);
        const auto value = body.substr(eq + 1);
        if (key == "format_version") {
          version = static_cast<int>(parse_integer(value, line_no));
        } else if (key == "model_kind") {
          try {
            set.model_kind = parse_model_kind(value);
          } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
          }
          kind_seen = true;
        } else if (key == "n_trees") {
          n_trees = to_int(parse_integer(value, line_no), line_no, "n_trees");
        } else if (key == "normalization") {
          normalization = to_int(parse_integer(value, line_no), line_no, "normalization");
        } else if (key == "n_features") {
          n_features = to_int(parse_integer(value, line_no), line_no, "n_features");
        } else if (key == "feature_names") {
          names = csv::parse_line(value);
        } else {
          throw ParseError("unknown metadata key '" + std::string(key) + "'", line_no);
        }
        continue;
      }
      if (line != kRuleHeader) throw ParseError("expected rule header '" + std::string(kRuleHeader) + "'", line_no);
      if (version != kRuleFormatVersion) {
        throw ParseError("unsupported rule format version " + std::to_string(version), line_no);
      }
      if (!kind_seen || !n_trees || !normalization || !n_features || !names) {
        throw ParseError("rule file metadata is incomplete", line_no);
      }
      set.n_trees = *n_trees;
      set.normalization = *normalization;
      set.n_features = *n_features;
      set.feature_names = std::move(*names);
      if (set.feature_names.size() != static_cast<std::size_t>(set.n_features)) {
        throw ParseError("feature_names lists " + std::to_string(set.feature_names.size()) +
                             " names but n_features is " + std::to_string(set.n_features),
                         line_no);
      }
      header_seen = true;
      continue;
    }

    if (line.empty()) continue;
    const auto fields = split_view(line, ',');
    if (fields.size() != 6) {
      throw ParseError("expected 6 fields, found " + std::to_string(fields.size()), line_no);
    }
    Rule rule;
    rule.tree_id = to_int(parse_integer(fields[0], line_no), line_no, "tree_id");
    rule.leaf_id = to_int(parse_integer(fields[1], line_no), line_no, "leaf_id");
    const auto samples = parse_integer(fields[2], line_no);
    if (samples < 0) throw ParseError("n_leaf_samples is negative", line_no);
    rule.n_leaf_samples = static_cast<std::uint64_t>(samples);
    if (!fields[3].empty()) {
      for (const auto item : split_view(fields[3], ';')) {
        const auto parts = split_view(item, '|');
        if (parts.size() != 3) throw ParseError("malformed predicate '" + std::string(item) + "'", line_no);
        Predicate p;
        p.feature = to_int(parse_integer(parts[0], line_no), line_no, "feature index");
        if (p.feature >= set.n_features) throw ParseError("feature index out of range", line_no);
        p.feature_name = set.feature_names[static_cast<std::size_t>(p.feature)];
        if (parts[1] == "le") {
          p.op = CompareOp::kLessEqual;
        } else if (parts[1] == "gt") {
          p.op = CompareOp::kGreater;
        } else {
          throw ParseError("unknown operator '" + std::string(parts[1]) + "'", line_no);
        }
        p.threshold = parse_double(parts[2], line_no);
        rule.predicates.push_back(std::move(p));
      }
    }
    rule.leaf_probabilities = {parse_double(fields[4], line_no), parse_double(fields[5], line_no)};
    set.rules.push_back(std::move(rule));
  }
  if (!header_seen) throw ParseError("rule file has no header row", line_no);

  try {
    set.validate();
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), 0);
  }
  return set;
}

RuleSet load_rules_csv(const std::filesystem::path& path) {
  return parse_rules_csv(read_file(path));
}

std::vector<RuleTreeNode> rebuild_tree(const RuleSet& rules, int tree_id) {
  std::vector<RuleTreeNode> nodes(1);
  // A node is "open" until a rule path passes through it or ends on it.
  std::vector<bool> assigned(1, false);
  const auto tree = rules.tree_rules(tree_id);
  if (tree.empty()) throw ConsistencyError("tree " + std::to_string(tree_id) + " has no rules");
  const auto base = static_cast<int>(tree.data() - rules.rules.data());

  for (std::size_t r = 0; r < tree.size(); ++r) {
    const auto& rule = tree[r];
    std::size_t at = 0;
    for (const auto& p : rule.predicates) {
      if (!assigned[at]) {
        nodes[at].feature = p.feature;
        nodes[at].threshold = p.threshold;
        assigned[at] = true;
      } else if (nodes[at].is_leaf() || nodes[at].feature != p.feature ||
                 nodes[at].threshold != p.threshold) {
        throw ConsistencyError("tree " + std::to_string(tree_id) + ": rule for leaf " +
                               std::to_string(rule.leaf_id) + " conflicts with another rule's path");
      }
      int& child = p.op == CompareOp::kLessEqual ? nodes[at].left : nodes[at].right;
      if (child < 0) {
        child = static_cast<int>(nodes.size());
        nodes.emplace_back();
        assigned.push_back(false);
      }
      at = static_cast<std::size_t>(child);
    }
    if (assigned[at]) {
      throw ConsistencyError("tree " + std::to_string(tree_id) + ": rule for leaf " +
                             std::to_string(rule.leaf_id) + " overlaps another rule");
    }
    nodes[at].rule = base + static_cast<int>(r);
    assigned[at] = true;
  }
  for (const auto& node : nodes) {
    if (!node.is_leaf() && (node.left < 0 || node.right < 0)) {
      throw ConsistencyError("tree " + std::to_string(tree_id) +
                             ": rules do not cover both branches of a split");
    }
  }
  return nodes;
}

std::string emit_text(const RuleSet& rules) {
  rules.validate();
  std::string out;
  for (int t = 0; t < rules.n_trees; ++t) {
    if (rules.model_kind == ModelKind::kForest) {
      if (t != 0) out += '\n';
      out += "# estimator " + std::to_string(t) + "\n";
    }
    render_tree(rules, t, out);
  }
  return out;
}

}  // namespace treerules
