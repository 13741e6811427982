#include "treerules/model.hpp"

#include <string>

#include "treerules/error.hpp"

namespace treerules {

ModelKind kind_of(const Model& model) noexcept {
  return std::holds_alternative<TreeModel>(model) ? ModelKind::kTree : ModelKind::kForest;
}

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::kTree ? "tree" : "forest";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "tree") return ModelKind::kTree;
  if (text == "forest") return ModelKind::kForest;
  throw ParseError("unknown model kind '" + std::string(text) + "'", 0);
}

std::size_t n_features(const Model& model) noexcept {
  return std::visit([](const auto& m) { return m.n_features(); }, model);
}

std::vector<const TreeModel*> estimators(const Model& model) {
  if (const auto* tree = std::get_if<TreeModel>(&model)) return {tree};
  std::vector<const TreeModel*> out;
  for (const auto& tree : std::get<ForestModel>(model).trees()) out.push_back(&tree);
  return out;
}

Probabilities predict_proba(const Model& model, std::span<const double> sample) {
  if (const auto* tree = std::get_if<TreeModel>(&model)) return predict_proba_tree(*tree, sample);
  return predict_proba_forest(std::get<ForestModel>(model), sample);
}

std::vector<double> feature_importances(const Model& model) {
  if (const auto* tree = std::get_if<TreeModel>(&model)) {
    const auto imp = tree->feature_importances();
    return {imp.begin(), imp.end()};
  }
  return forest_feature_importances(std::get<ForestModel>(model));
}

}  // namespace treerules
