#pragma once

#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "treerules/cart.hpp"
#include "treerules/forest.hpp"

namespace treerules {

/// A fitted single tree or forest.
using Model = std::variant<TreeModel, ForestModel>;

enum class ModelKind { kTree, kForest };

ModelKind kind_of(const Model& model) noexcept;
std::string_view to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view text);

std::size_t n_features(const Model& model) noexcept;

/// Trees of the model in estimator order (one for a single tree).
std::vector<const TreeModel*> estimators(const Model& model);

Probabilities predict_proba(const Model& model, std::span<const double> sample);

/// Tree importances for a tree, averaged importances for a forest.
std::vector<double> feature_importances(const Model& model);

}  // namespace treerules
