#include <gtest/gtest.h>

#include <algorithm>

#include "lending_surrogate.hpp"
#include "oracles.hpp"
#include "random_trees.hpp"
#include "treerules/error.hpp"
#include "treerules/forest.hpp"
#include "treerules/model.hpp"

namespace treerules {
namespace {

TreeModel stump(int feature, double threshold, ClassCounts left, ClassCounts right, std::size_t n_features = 1) {
  std::vector<TreeNode> nodes(3);
  nodes[0] = {NodeKind::kInternal, feature, threshold, 1, 2, {left[0] + right[0], left[1] + right[1]}};
  nodes[1].class_counts = left;
  nodes[2].class_counts = right;
  for (auto& n : nodes) n.n_node_samples = n.class_counts[0] + n.class_counts[1];
  return TreeModel(std::move(nodes), n_features);
}

TEST(FitForest, SingleTreeWithoutBootstrapEqualsFitTree) {
  const Dataset d = testing::lending_dataset(3000, 1);
  ForestParams p;
  p.n_estimators = 1;
  p.bootstrap = false;
  p.seed = 42;
  p.tree_params.max_depth = 6;
  p.tree_params.max_features = 4;
  const ForestModel f = fit_forest(d, p);
  TreeParams tp = p.tree_params;
  tp.seed = 42;
  const TreeModel t = fit_tree(d, tp);
  ASSERT_EQ(f.n_estimators(), 1u);
  EXPECT_EQ(f.tree(0).nodes().size(), t.nodes().size());
  EXPECT_TRUE(std::equal(f.tree(0).nodes().begin(), f.tree(0).nodes().end(), t.nodes().begin()));
  for (std::size_t i = 0; i < 200; ++i) {
    EXPECT_EQ(predict_proba_forest(f, d.row(i)), predict_proba_tree(t, d.row(i)));
  }
}

TEST(FitForest, LendingFixtureFiveTreesOfBoundedDepth) {
  const Dataset d = testing::lending_dataset(5000, 2);
  ForestParams p;
  p.n_estimators = 5;
  p.tree_params.max_depth = 10;
  p.tree_params.max_features = 4;
  p.seed = 42;
  const ForestModel f = fit_forest(d, p);
  ASSERT_EQ(f.n_estimators(), 5u);
  for (const auto& t : f.trees()) EXPECT_LE(t.depth(), 10);
}

TEST(FitForest, DeterministicAndThreadCountIndependent) {
  const Dataset d = testing::lending_dataset(2000, 3);
  ForestParams p;
  p.n_estimators = 6;
  p.tree_params.max_depth = 8;
  p.tree_params.max_features = 3;
  p.seed = 9;
  const ForestModel a = fit_forest(d, p);
  EXPECT_EQ(a, fit_forest(d, p));
  p.n_threads = 4;
  EXPECT_EQ(a, fit_forest(d, p));
  p.seed = 10;
  EXPECT_FALSE(a == fit_forest(d, p));
}

TEST(FitForest, TreesUseTheirBootstrapSamples) {
  const Dataset d = testing::lending_dataset(500, 4);
  ForestParams p;
  p.n_estimators = 3;
  p.seed = 77;
  p.tree_params.max_depth = 4;
  const ForestModel f = fit_forest(d, p);
  for (std::size_t t = 0; t < 3; ++t) {
    const auto rows = bootstrap_rows(d.n_samples(), tree_seed(77, t));
    EXPECT_EQ(rows.size(), d.n_samples());
    TreeParams tp = p.tree_params;
    tp.seed = tree_seed(77, t);
    EXPECT_EQ(f.tree(t), fit_tree(d, rows, tp));
    EXPECT_EQ(f.tree(t).node(0).n_node_samples, d.n_samples());
  }
}

TEST(FitForest, RejectsBadParamsAndEmptyData) {
  ForestParams p;
  p.n_estimators = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  FeatureSchema s;
  s.features = {"a"};
  s.target_name = "y";
  s.target_mapping = {{"0", 0}, {"1", 1}};
  EXPECT_THROW(fit_forest(Dataset(s, {}, {}), ForestParams{}), DataError);
  EXPECT_THROW(ForestModel({}, ForestParams{}), ValidationError);
}

TEST(PredictForest, SingleTreeForestEqualsTree) {
  const TreeModel t = stump(0, 2.5, {3, 1}, {1, 5});
  const ForestModel f({t}, {});
  const double x[] = {2.0};
  EXPECT_EQ(predict_proba_forest(f, x), predict_proba_tree(t, x));
}

TEST(PredictForest, TwoOpposingStumpsAverageToHalf) {
  const ForestModel f({stump(0, 2.5, {4, 0}, {0, 4}), stump(0, 2.5, {0, 4}, {4, 0})}, {});
  const double x[] = {1.0};
  EXPECT_EQ(predict_proba_forest(f, x), (Probabilities{0.5, 0.5}));
}

TEST(PredictForest, FiveTreeFixtureMatchesHandMean) {
  // Leaf class-1 fractions reached by x = 1: 1/4, 2/4, 3/4, 1/2, 0/3.
  const ForestModel f({stump(0, 2.5, {3, 1}, {0, 1}), stump(0, 0.5, {1, 0}, {2, 2}), stump(0, 1.5, {1, 3}, {1, 0}),
                       stump(0, 9.0, {1, 1}, {1, 0}), stump(0, 1.0, {3, 0}, {0, 1})},
                      {});
  const double x[] = {1.0};
  const double expected = (0.25 + 0.5 + 0.75 + 0.5 + 0.0) / 5.0;
  EXPECT_EQ(predict_proba_forest(f, x)[1], expected);
  EXPECT_EQ(testing::traversal_probability(Model{f}, x), expected);
}

TEST(PredictForest, RejectsNonFiniteSamples) {
  const ForestModel f({stump(0, 2.5, {3, 1}, {1, 5})}, {});
  const double x[] = {std::numeric_limits<double>::infinity()};
  EXPECT_THROW(predict_proba_forest(f, x), DataError);
}

TEST(PredictForest, MeanLiesWithinTreeRange) {
  Rng rng(31);
  const Dataset d = testing::lending_dataset(2000, 5);
  ForestParams p;
  p.n_estimators = 7;
  p.tree_params.max_depth = 6;
  p.tree_params.max_features = 5;
  p.seed = 3;
  const ForestModel f = fit_forest(d, p);
  for (std::size_t i = 0; i < d.n_samples(); i += 7) {
    const auto mean = predict_proba_forest(f, d.row(i));
    for (std::size_t c = 0; c < 2; ++c) {
      double lo = 1.0, hi = 0.0;
      for (const auto& t : f.trees()) {
        const double v = predict_proba_tree(t, d.row(i))[c];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      EXPECT_GE(mean[c], lo);
      EXPECT_LE(mean[c], hi);
    }
    EXPECT_NEAR(mean[0] + mean[1], 1.0, 1e-12);
  }
}

TEST(ForestImportances, IdenticalStumpsAndSingleTree) {
  const TreeModel s = stump(0, 1.0, {2, 0}, {0, 2}, 3);
  const auto imp = forest_feature_importances(ForestModel({s, s, s}, {}));
  EXPECT_EQ(imp, (std::vector<double>{1.0, 0.0, 0.0}));

  const TreeModel t = stump(1, 1.0, {2, 1}, {0, 2}, 3);
  const auto single = forest_feature_importances(ForestModel({t}, {}));
  EXPECT_TRUE(std::equal(single.begin(), single.end(), t.feature_importances().begin()));
}

TEST(ForestImportances, ThreeTreeFixtureMatchesHandAverage) {
  // Each stump puts all importance on its feature: mean (2/3, 1/3, 0).
  const auto imp = forest_feature_importances(ForestModel(
      {stump(0, 1.0, {2, 0}, {0, 2}, 3), stump(1, 1.0, {2, 1}, {0, 2}, 3), stump(0, 3.0, {5, 1}, {1, 2}, 3)}, {}));
  EXPECT_NEAR(imp[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(imp[1], 1.0 / 3.0, 1e-15);
  EXPECT_EQ(imp[2], 0.0);
}

TEST(Model, VariantHelpers) {
  const Model tree = stump(0, 1.0, {2, 0}, {0, 2});
  const Model forest = ForestModel({stump(0, 1.0, {2, 0}, {0, 2}), stump(0, 2.0, {2, 1}, {0, 2})}, {});
  EXPECT_EQ(kind_of(tree), ModelKind::kTree);
  EXPECT_EQ(kind_of(forest), ModelKind::kForest);
  EXPECT_EQ(estimators(forest).size(), 2u);
  EXPECT_EQ(parse_model_kind(to_string(ModelKind::kForest)), ModelKind::kForest);
  EXPECT_EQ(n_features(tree), 1u);
  EXPECT_THROW(parse_model_kind("boosted"), Error);
}

}  // namespace
}  // namespace treerules
