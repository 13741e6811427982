#include "treerules/interchange.hpp"

#include <cmath>

#include <json.hpp>

#include "treerules/error.hpp"
#include "treerules/file_io.hpp"
#include "treerules/rules.hpp"

namespace treerules {
namespace {

using nlohmann::ordered_json;

template <typename T>
ordered_json optional_to_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json tree_params_json(const TreeParams& p) {
  ordered_json j;
  j["max_depth"] = optional_to_json(p.max_depth);
  j["max_features"] = optional_to_json(p.max_features);
  j["max_leaf_nodes"] = optional_to_json(p.max_leaf_nodes);
  j["min_samples_split"] = p.min_samples_split;
  j["seed"] = p.seed;
  return j;
}

ordered_json tree_json(const TreeModel& tree) {
  ordered_json left = ordered_json::array();
  ordered_json right = ordered_json::array();
  ordered_json feature = ordered_json::array();
  ordered_json threshold = ordered_json::array();
  ordered_json value = ordered_json::array();
  ordered_json n_node_samples = ordered_json::array();
  ordered_json impurity = ordered_json::array();
  for (const auto& node : tree.nodes()) {
    left.push_back(node.left);
    right.push_back(node.right);
    feature.push_back(node.feature);
    threshold.push_back(node.threshold);
    value.push_back(ordered_json::array({node.class_counts[0], node.class_counts[1]}));
    n_node_samples.push_back(node.n_node_samples);
    impurity.push_back(node.impurity);
  }
  ordered_json j;
  j["children_left"] = std::move(left);
  j["children_right"] = std::move(right);
  j["feature"] = std::move(feature);
  j["threshold"] = std::move(threshold);
  j["value"] = std::move(value);
  j["n_node_samples"] = std::move(n_node_samples);
  j["impurity"] = std::move(impurity);
  j["seed"] = tree.params().seed;
  return j;
}

template <typename T>
std::optional<T> optional_from_json(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

TreeParams tree_params_from_json(const ordered_json& j) {
  TreeParams p;
  p.max_depth = optional_from_json<int>(j, "max_depth");
  p.max_features = optional_from_json<int>(j, "max_features");
  p.max_leaf_nodes = optional_from_json<int>(j, "max_leaf_nodes");
  p.min_samples_split = j.value("min_samples_split", 2);
  p.seed = j.value("seed", std::uint64_t{0});
  return p;
}

const ordered_json& array_field(const ordered_json& tree, const char* key, const std::string& where) {
  if (!tree.contains(key) || !tree.at(key).is_array()) {
    throw ValidationError(where + ": missing array '" + key + "'");
  }
  return tree.at(key);
}

std::uint64_t count_from_json(const ordered_json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const auto i = v.get<std::int64_t>();
    if (i < 0) throw ValidationError(where + ": negative class count");
    return static_cast<std::uint64_t>(i);
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (!(d >= 0.0) || d != std::floor(d) || d > 9.007199254740992e15) {
      throw ValidationError(where + ": class counts must be non-negative integers");
    }
    return static_cast<std::uint64_t>(d);
  }
  throw ValidationError(where + ": class count is not a number");
}

TreeModel tree_from_json(const ordered_json& j, std::size_t tree_index, std::size_t n_features,
                         const TreeParams& params) {
  const std::string tree_where = "tree " + std::to_string(tree_index);
  if (!j.is_object()) throw ValidationError(tree_where + ": record is not an object");
  const auto& left = array_field(j, "children_left", tree_where);
  const auto& right = array_field(j, "children_right", tree_where);
  const auto& feature = array_field(j, "feature", tree_where);
  const auto& threshold = array_field(j, "threshold", tree_where);
  const auto& value = array_field(j, "value", tree_where);
  const auto& samples = array_field(j, "n_node_samples", tree_where);
  const std::size_t n = left.size();
  if (n == 0) throw ValidationError(tree_where + ": tree has no nodes");
  for (const auto* arr : {&right, &feature, &threshold, &value, &samples}) {
    if (arr->size() != n) throw ValidationError(tree_where + ": node arrays differ in length");
  }

  std::vector<TreeNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string where = tree_where + ", node " + std::to_string(i);
    auto& node = nodes[i];
    const auto l = left[i].get<std::int64_t>();
    const auto r = right[i].get<std::int64_t>();
    const auto in_range = [n](std::int64_t c) { return c == kNoChild || (c >= 0 && c < static_cast<std::int64_t>(n)); };
    if (!in_range(l) || !in_range(r)) throw ValidationError(where + ": child index out of range");
    if ((l == kNoChild) != (r == kNoChild)) {
      throw ValidationError(where + ": exactly one child is -1");
    }
    const auto& row = value[i];
    if (!row.is_array() || row.size() != 2) {
      throw ValidationError(where + ": value row must hold two class counts");
    }
    node.class_counts = {count_from_json(row[0], where), count_from_json(row[1], where)};
    node.n_node_samples = count_from_json(samples[i], where);
    if (l == kNoChild) {
      node.kind = NodeKind::kLeaf;
      if (node.class_counts[0] + node.class_counts[1] == 0) {
        throw ValidationError(where + ": leaf value row sums to zero");
      }
    } else {
      node.kind = NodeKind::kInternal;
      node.left = static_cast<NodeId>(l);
      node.right = static_cast<NodeId>(r);
      const auto f = feature[i].get<std::int64_t>();
      if (f < 0 || static_cast<std::size_t>(f) >= n_features) {
        throw ValidationError(where + ": feature index out of range");
      }
      node.feature = static_cast<std::int32_t>(f);
      node.threshold = threshold[i].get<double>();
    }
  }
  TreeParams tree_params = params;
  if (j.contains("seed")) tree_params.seed = j.at("seed").get<std::uint64_t>();
  try {
    return TreeModel(std::move(nodes), n_features, tree_params);
  } catch (const ValidationError& e) {
    throw ValidationError(tree_where + ", " + e.what());
  }
}

}  // namespace

std::string export_json_string(const Model& model, std::span<const std::string> feature_names) {
  const auto names = feature_names.empty()
                         ? default_feature_names(n_features(model))
                         : std::vector<std::string>(feature_names.begin(), feature_names.end());
  if (names.size() != n_features(model)) throw DataError("feature name count does not match the model");

  ordered_json doc;
  doc["format_version"] = kInterchangeFormatVersion;
  doc["model_kind"] = std::string(to_string(kind_of(model)));
  doc["n_features"] = n_features(model);
  doc["feature_names"] = names;
  if (const auto* forest = std::get_if<ForestModel>(&model)) {
    ordered_json params;
    params["n_estimators"] = forest->params().n_estimators;
    params["bootstrap"] = forest->params().bootstrap;
    params["seed"] = forest->params().seed;
    params["tree_params"] = tree_params_json(forest->params().tree_params);
    doc["params"] = std::move(params);
  } else {
    doc["params"] = tree_params_json(std::get<TreeModel>(model).params());
  }
  ordered_json trees = ordered_json::array();
  for (const auto* tree : estimators(model)) trees.push_back(tree_json(*tree));
  doc["trees"] = std::move(trees);
  return doc.dump() + "\n";
}

void export_json(const Model& model, const std::filesystem::path& path,
                 std::span<const std::string> feature_names) {
  write_file_atomically(path, export_json_string(model, feature_names));
}

ModelDocument import_json_string(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
  }

  try {
    if (!doc.is_object()) throw ValidationError("document is not a JSON object");
    if (!doc.contains("format_version") || doc.at("format_version") != kInterchangeFormatVersion) {
      throw ParseError("unsupported format_version (expected " +
                           std::to_string(kInterchangeFormatVersion) + ")",
                       0);
    }
    const auto kind = parse_model_kind(doc.at("model_kind").get<std::string>());
    const auto n_features = doc.at("n_features").get<std::size_t>();
    if (n_features == 0) throw ValidationError("n_features must be positive");

    ModelDocument out;
    if (doc.contains("feature_names")) {
      out.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
      if (out.feature_names.size() != n_features) {
        throw ValidationError("feature_names has " + std::to_string(out.feature_names.size()) +
                              " entries, n_features is " + std::to_string(n_features));
      }
    } else {
      out.feature_names = default_feature_names(n_features);
    }

    const auto& trees = doc.at("trees");
    if (!trees.is_array() || trees.empty()) throw ValidationError("document has no trees");
    const ordered_json params = doc.value("params", ordered_json::object());

    if (kind == ModelKind::kTree) {
      if (trees.size() != 1) throw ValidationError("a tree document must hold exactly one tree");
      out.model = tree_from_json(trees[0], 0, n_features, tree_params_from_json(params));
    } else {
      ForestParams fp;
      fp.n_estimators = static_cast<int>(trees.size());
      fp.bootstrap = params.value("bootstrap", true);
      fp.seed = params.value("seed", std::uint64_t{0});
      if (params.contains("tree_params")) fp.tree_params = tree_params_from_json(params.at("tree_params"));
      std::vector<TreeModel> forest;
      for (std::size_t t = 0; t < trees.size(); ++t) {
        forest.push_back(tree_from_json(trees[t], t, n_features, fp.tree_params));
      }
      out.model = ForestModel(std::move(forest), fp);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed interchange document: ") + e.what());
  }
}

ModelDocument import_json(const std::filesystem::path& path) {
  return import_json_string(read_file(path));
}

}  // namespace treerules
