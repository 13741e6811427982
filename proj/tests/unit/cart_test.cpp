#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "lending_surrogate.hpp"
#include "oracles.hpp"
#include "random_trees.hpp"
#include "treerules/cart.hpp"
#include "treerules/error.hpp"
#include "treerules/rules.hpp"

namespace treerules {
namespace {

FeatureSchema schema_of(std::size_t n_features) {
  FeatureSchema s;
  for (std::size_t j = 0; j < n_features; ++j) s.features.push_back("x" + std::to_string(j));
  s.target_name = "y";
  s.target_mapping = {{"0", 0}, {"1", 1}};
  return s;
}

Dataset one_d(std::vector<double> x, std::vector<std::uint8_t> y) {
  return Dataset(schema_of(1), std::move(x), std::move(y));
}

std::vector<std::uint32_t> all_rows(const Dataset& d) {
  std::vector<std::uint32_t> rows(d.n_samples());
  std::iota(rows.begin(), rows.end(), 0u);
  return rows;
}

std::vector<int> all_features(const Dataset& d) {
  std::vector<int> f(d.n_features());
  std::iota(f.begin(), f.end(), 0);
  return f;
}

TEST(Gini, SpecExamples) {
  EXPECT_EQ(gini({5, 5}), 0.5);
  EXPECT_EQ(gini({10, 0}), 0.0);
  // 1 - (0.7^2 + 0.3^2) = 1 - 0.58
  EXPECT_NEAR(gini({7, 3}), 0.42, 1e-15);
  EXPECT_THROW(gini({0, 0}), DataError);
}

TEST(BestSplit, PureNodeHasNoSplit) {
  const Dataset d = one_d({1, 2, 3}, {0, 0, 0});
  EXPECT_FALSE(best_split(all_rows(d), d, all_features(d)).has_value());
}

TEST(BestSplit, OneDimensionalMidpoint) {
  const Dataset d = one_d({1, 2, 3, 4}, {0, 0, 1, 1});
  const auto s = best_split(all_rows(d), d, all_features(d));
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0);
  EXPECT_EQ(s->threshold, 2.5);
  EXPECT_EQ(s->impurity_decrease, 0.5);
}

TEST(BestSplit, EqualDecreasesTakeLowestThreshold) {
  // 1.5 and 3.5 both isolate one class-0 sample: decrease 0.5 - 3/4 * 4/9 = 1/6.
  const Dataset d = one_d({1, 2, 3, 4}, {0, 1, 1, 0});
  const auto s = best_split(all_rows(d), d, all_features(d));
  ASSERT_TRUE(s);
  EXPECT_EQ(s->threshold, 1.5);
  EXPECT_NEAR(s->impurity_decrease, 1.0 / 6.0, 1e-15);
}

TEST(BestSplit, EqualFeaturesTakeLowestIndex) {
  const Dataset d(schema_of(3), {5, 1, 1, 6, 2, 2, 7, 3, 3, 8, 4, 4}, {0, 0, 1, 1});
  const auto s = best_split(all_rows(d), d, all_features(d));
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0);
  EXPECT_EQ(s->threshold, 6.5);
  const std::vector<int> later = {2, 1};
  EXPECT_EQ(best_split(all_rows(d), d, later)->feature, 1);
}

TEST(BestSplit, RepeatedRowsCountAsWeights) {
  const Dataset d = one_d({1, 2, 3}, {0, 1, 1});
  const std::vector<std::uint32_t> rows = {0, 0, 0, 1, 2};
  const auto s = best_split(rows, d, all_features(d));
  ASSERT_TRUE(s);
  EXPECT_EQ(s->threshold, 1.5);
  EXPECT_NEAR(s->impurity_decrease, 0.48, 1e-15);
}

TEST(BestSplit, TwentySampleFixtureMatchesBruteForce) {
  Rng rng(20);
  for (int trial = 0; trial < 50; ++trial) {
    const Dataset d = testing::random_dataset(rng, 20, 3);
    const auto rows = all_rows(d);
    const auto got = best_split(rows, d, all_features(d));
    const auto want = testing::brute_force_split(d, rows);
    ASSERT_EQ(got.has_value(), want.has_value());
    if (!got) continue;
    EXPECT_EQ(got->feature, want->feature);
    EXPECT_EQ(got->threshold, want->threshold);
    EXPECT_GT(got->impurity_decrease, 0.0);
  }
}

TEST(FitTree, PureDatasetGivesSingleLeaf) {
  const Dataset d = one_d({1, 2, 3}, {1, 1, 1});
  const TreeModel t = fit_tree(d, {});
  EXPECT_EQ(t.nodes().size(), 1u);
  EXPECT_EQ(t.node(0).probabilities, (Probabilities{0.0, 1.0}));
  EXPECT_EQ(t.depth(), 0);
  EXPECT_EQ(t.feature_importances()[0], 0.0);
}

TEST(FitTree, StumpFromBestSplit) {
  const Dataset d = one_d({1, 2, 3, 4}, {0, 0, 1, 1});
  TreeParams p;
  p.max_depth = 1;
  const TreeModel t = fit_tree(d, p);
  ASSERT_EQ(t.nodes().size(), 3u);
  const auto& root = t.node(0);
  EXPECT_EQ(root.feature, 0);
  EXPECT_EQ(root.threshold, 2.5);
  EXPECT_EQ(t.node(root.left).class_counts, (ClassCounts{2, 0}));
  EXPECT_EQ(t.node(root.right).class_counts, (ClassCounts{0, 2}));

  const double at_1_5[] = {1.5};
  const double at_2_5[] = {2.5};
  const double at_3[] = {3.0};
  EXPECT_EQ(predict_proba_tree(t, at_1_5), (Probabilities{1.0, 0.0}));
  EXPECT_EQ(predict_proba_tree(t, at_2_5), (Probabilities{1.0, 0.0}));
  EXPECT_EQ(predict_proba_tree(t, at_3), (Probabilities{0.0, 1.0}));
  EXPECT_EQ(t.feature_importances()[0], 1.0);
}

TEST(FitTree, EmptyDatasetIsAnError) {
  const Dataset empty(schema_of(1), {}, {});
  EXPECT_THROW(fit_tree(empty, {}), DataError);
}

TEST(FitTree, LendingFixtureRespectsLeafCap) {
  const Dataset d = testing::lending_dataset(5000, 7);
  TreeParams p;
  p.max_depth = 5;
  p.max_features = 50;
  p.max_leaf_nodes = 10;
  p.seed = 42;
  const TreeModel t = fit_tree(d, p);
  EXPECT_LE(t.n_leaves(), 10u);
  EXPECT_GT(t.n_leaves(), 1u);
  EXPECT_LE(t.depth(), 5);
  EXPECT_EQ(d.schema().features[static_cast<std::size_t>(t.node(0).feature)], "collection_recovery_fee");
  // Root separates zero fees from the smallest positive one.
  const auto fee = static_cast<std::size_t>(t.node(0).feature);
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.n_samples(); ++i) {
    const double v = d.row(i)[fee];
    if (v > 0.0) smallest = std::min(smallest, v);
  }
  EXPECT_EQ(t.node(0).threshold, std::midpoint(0.0, smallest));
}

TEST(FitTree, RejectsInvalidParams) {
  TreeParams p;
  p.max_depth = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.max_leaf_nodes = 1;
  EXPECT_NO_THROW(p.validate());
  p.min_samples_split = 1;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(FitTree, MaxLeafNodesOneGivesRootLeaf) {
  const Dataset d = one_d({1, 2, 3, 4}, {0, 0, 1, 1});
  TreeParams p;
  p.max_leaf_nodes = 1;
  EXPECT_EQ(fit_tree(d, p).n_leaves(), 1u);
}

TEST(FeatureImportances, HandAccumulatedTwoSplitTree) {
  // root (6,4) splits f0 into a pure (5,0) leaf and (1,4), which splits f1.
  // root: 0.48 - 0.5 * 0.32 = 0.32 at weight 1; child: 0.32 at weight 0.5.
  std::vector<TreeNode> nodes(5);
  nodes[0] = {NodeKind::kInternal, 0, 1.5, 1, 2, {6, 4}};
  nodes[1].class_counts = {5, 0};
  nodes[2] = {NodeKind::kInternal, 1, 0.5, 3, 4, {1, 4}};
  nodes[3].class_counts = {1, 0};
  nodes[4].class_counts = {0, 4};
  for (auto& n : nodes) n.n_node_samples = n.class_counts[0] + n.class_counts[1];
  const TreeModel t(nodes, 3);
  const auto imp = t.feature_importances();
  EXPECT_NEAR(imp[0], 0.32 / 0.48, 1e-15);
  EXPECT_NEAR(imp[1], 0.16 / 0.48, 1e-15);
  EXPECT_EQ(imp[2], 0.0);
}

TEST(TreeModel, RejectsMalformedArenas) {
  auto leaf = [](std::uint64_t a, std::uint64_t b) {
    TreeNode n;
    n.class_counts = {a, b};
    n.n_node_samples = a + b;
    return n;
  };
  TreeNode root{NodeKind::kInternal, 0, 1.0, 1, 2, {1, 1}};
  root.n_node_samples = 2;

  EXPECT_NO_THROW(TreeModel({root, leaf(1, 0), leaf(0, 1)}, 1));

  auto bad_feature = root;
  bad_feature.feature = 3;
  EXPECT_THROW(TreeModel({bad_feature, leaf(1, 0), leaf(0, 1)}, 1), ValidationError);

  auto self_loop = root;
  self_loop.left = 0;
  EXPECT_THROW(TreeModel({self_loop, leaf(1, 0), leaf(0, 1)}, 1), ValidationError);

  auto shared_child = root;
  shared_child.right = 1;
  EXPECT_THROW(TreeModel({shared_child, leaf(1, 0), leaf(0, 1)}, 1), ValidationError);

  auto nan_threshold = root;
  nan_threshold.threshold = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(TreeModel({nan_threshold, leaf(1, 0), leaf(0, 1)}, 1), ValidationError);

  EXPECT_THROW(TreeModel({root, leaf(0, 0), leaf(0, 1)}, 1), ValidationError);
  EXPECT_THROW(TreeModel({root, leaf(1, 0)}, 1), ValidationError);
  EXPECT_THROW(TreeModel({}, 1), ValidationError);
}

TEST(TreeModel, ApplyRejectsBadSamples) {
  const TreeModel t = fit_tree(one_d({1, 2}, {0, 1}), {});
  const double nan_sample[] = {std::numeric_limits<double>::quiet_NaN()};
  const double two[] = {1.0, 2.0};
  EXPECT_THROW(t.apply(nan_sample), DataError);
  EXPECT_THROW(t.apply(two), DataError);
}

// Property tests over random datasets and hyperparameters.

TreeParams random_params(Rng& rng) {
  TreeParams p;
  if (testing::unit(rng) < 0.6) p.max_depth = 1 + static_cast<int>(rng.uniform_index(6));
  if (testing::unit(rng) < 0.4) p.max_features = 1 + static_cast<int>(rng.uniform_index(4));
  if (testing::unit(rng) < 0.4) p.max_leaf_nodes = 1 + static_cast<int>(rng.uniform_index(12));
  p.min_samples_split = 2 + static_cast<int>(rng.uniform_index(4));
  p.seed = rng.next();
  return p;
}

TEST(FitTreeProperties, HyperparameterBoundsHold) {
  Rng rng(101);
  for (int trial = 0; trial < 150; ++trial) {
    const Dataset d = testing::random_dataset(rng, 5 + rng.uniform_index(120), 1 + rng.uniform_index(5));
    const TreeParams p = random_params(rng);
    const TreeModel t = fit_tree(d, p);
    if (p.max_depth) EXPECT_LE(t.depth(), *p.max_depth);
    if (p.max_leaf_nodes) EXPECT_LE(t.n_leaves(), static_cast<std::size_t>(*p.max_leaf_nodes));
    for (const auto& n : t.nodes()) {
      if (!n.is_leaf()) EXPECT_GE(n.n_node_samples, static_cast<std::uint64_t>(p.min_samples_split));
    }
  }
}

TEST(FitTreeProperties, LeafCountsConserveTrainingHistogram) {
  Rng rng(102);
  for (int trial = 0; trial < 150; ++trial) {
    const Dataset d = testing::random_dataset(rng, 5 + rng.uniform_index(120), 1 + rng.uniform_index(5));
    const TreeModel t = fit_tree(d, random_params(rng));
    ClassCounts leaves{};
    for (const auto& n : t.nodes()) {
      if (!n.is_leaf()) continue;
      leaves[0] += n.class_counts[0];
      leaves[1] += n.class_counts[1];
      EXPECT_NEAR(n.probabilities[0] + n.probabilities[1], 1.0, 1e-12);
    }
    ClassCounts data{};
    for (std::size_t i = 0; i < d.n_samples(); ++i) ++data[static_cast<std::size_t>(d.target(i))];
    EXPECT_EQ(leaves, data);

    // Routing every training row reproduces each leaf's histogram.
    std::vector<ClassCounts> routed(t.nodes().size());
    for (std::size_t i = 0; i < d.n_samples(); ++i) {
      ++routed[static_cast<std::size_t>(testing::traverse(t, d.row(i)))][static_cast<std::size_t>(d.target(i))];
    }
    for (std::size_t k = 0; k < t.nodes().size(); ++k) {
      if (t.nodes()[k].is_leaf()) EXPECT_EQ(routed[k], t.nodes()[k].class_counts);
    }
  }
}

TEST(FitTreeProperties, BitIdenticalAcrossRuns) {
  Rng rng(103);
  for (int trial = 0; trial < 40; ++trial) {
    const Dataset d = testing::random_dataset(rng, 10 + rng.uniform_index(100), 1 + rng.uniform_index(5));
    const TreeParams p = random_params(rng);
    EXPECT_EQ(fit_tree(d, p), fit_tree(d, p));
  }
}

TEST(FitTreeProperties, TraversalIsTotalAndMatchesOracle) {
  Rng rng(104);
  for (int trial = 0; trial < 60; ++trial) {
    const Dataset d = testing::random_dataset(rng, 10 + rng.uniform_index(100), 1 + rng.uniform_index(5));
    const TreeModel t = fit_tree(d, random_params(rng));
    std::vector<double> sample(d.n_features());
    for (int k = 0; k < 200; ++k) {
      for (auto& v : sample) v = testing::unit(rng) * 12.0 - 6.0;
      const NodeId leaf = t.apply(sample);
      EXPECT_TRUE(t.node(leaf).is_leaf());
      EXPECT_EQ(leaf, testing::traverse(t, sample));
    }
  }
}

TEST(FitTreeProperties, SplitsAreBruteForceOptimal) {
  Rng rng(105);
  for (int trial = 0; trial < 60; ++trial) {
    const Dataset d = testing::random_dataset(rng, 2 + rng.uniform_index(49), 1 + rng.uniform_index(5));
    const TreeModel t = fit_tree(d, {});
    std::vector<std::vector<std::uint32_t>> reach(t.nodes().size());
    for (std::uint32_t i = 0; i < d.n_samples(); ++i) {
      std::size_t at = 0;
      while (true) {
        reach[at].push_back(i);
        const auto& n = t.nodes()[at];
        if (n.is_leaf()) break;
        at = static_cast<std::size_t>(d.value(i, static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left
                                                                                                       : n.right);
      }
    }
    for (std::size_t k = 0; k < t.nodes().size(); ++k) {
      const auto& n = t.nodes()[k];
      const auto want = testing::brute_force_split(d, reach[k]);
      if (n.is_leaf()) {
        EXPECT_FALSE(want.has_value() && reach[k].size() >= 2) << "leaf " << k << " could still split";
        continue;
      }
      ASSERT_TRUE(want.has_value());
      EXPECT_EQ(n.feature, want->feature);
      EXPECT_EQ(n.threshold, want->threshold);
    }
  }
}

TEST(FitTreeProperties, UnboundedLeafCapGrowsTheSameRegions) {
  Rng rng(106);
  for (int trial = 0; trial < 40; ++trial) {
    const Dataset d = testing::random_dataset(rng, 10 + rng.uniform_index(80), 1 + rng.uniform_index(4));
    TreeParams depth_first;
    depth_first.max_depth = 1 + static_cast<int>(rng.uniform_index(5));
    TreeParams best_first = depth_first;
    best_first.max_leaf_nodes = 100000;
    auto regions = [](const TreeModel& t) {
      std::set<std::pair<std::vector<std::tuple<int, int, double>>, ClassCounts>> out;
      for (const auto& r : build_rules(t, 0)) {
        std::vector<std::tuple<int, int, double>> preds;
        for (const auto& p : r.predicates) preds.emplace_back(p.feature, static_cast<int>(p.op), p.threshold);
        out.emplace(preds, t.node(r.leaf_id).class_counts);
      }
      return out;
    };
    EXPECT_EQ(regions(fit_tree(d, depth_first)), regions(fit_tree(d, best_first)));
  }
}

TEST(FitTreeProperties, BestFirstExpandsLargestWeightedDecreaseFirst) {
  // Growing with a cap of k + 1 leaves adds exactly one split to the k-leaf tree.
  Rng rng(107);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset d = testing::random_dataset(rng, 30 + rng.uniform_index(60), 1 + rng.uniform_index(4));
    std::size_t previous_splits = 0;
    for (int cap = 2; cap <= 8; ++cap) {
      TreeParams p;
      p.max_leaf_nodes = cap;
      const TreeModel t = fit_tree(d, p);
      const std::size_t splits = t.nodes().size() / 2;
      EXPECT_TRUE(splits == previous_splits + 1 || splits == previous_splits);
      previous_splits = splits;
    }
  }
}

}  // namespace
}  // namespace treerules
