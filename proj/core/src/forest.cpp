#include "treerules/forest.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "treerules/error.hpp"
#include "treerules/random.hpp"

namespace treerules {

void ForestParams::validate() const {
  if (n_estimators < 1) throw ConfigError("n_estimators must be >= 1");
  if (n_threads < 1) throw ConfigError("n_threads must be >= 1");
  tree_params.validate();
}

ForestModel::ForestModel(std::vector<TreeModel> trees, ForestParams params)
    : trees_(std::move(trees)), params_(params) {
  if (trees_.empty()) throw ValidationError("forest has no trees");
  for (std::size_t t = 1; t < trees_.size(); ++t) {
    if (trees_[t].n_features() != trees_[0].n_features()) {
      throw ValidationError("tree " + std::to_string(t) + ": feature count differs from tree 0");
    }
  }
  params_.n_estimators = static_cast<int>(trees_.size());
}

std::vector<std::uint32_t> bootstrap_rows(std::size_t n_samples, std::uint64_t tree_seed) {
  Rng rng(splitmix64(tree_seed));
  std::vector<std::uint32_t> rows(n_samples);
  for (auto& r : rows) r = static_cast<std::uint32_t>(rng.uniform_index(n_samples));
  return rows;
}

ForestModel fit_forest(const Dataset& data, const ForestParams& params) {
  params.validate();
  if (data.empty()) throw DataError("empty dataset");

  const auto m = static_cast<std::size_t>(params.n_estimators);
  std::vector<TreeModel> trees(m);

  auto train_one = [&](std::size_t t) {
    TreeParams tp = params.tree_params;
    tp.seed = tree_seed(params.seed, t);
    if (params.bootstrap) {
      trees[t] = fit_tree(data, bootstrap_rows(data.n_samples(), tp.seed), tp);
    } else {
      trees[t] = fit_tree(data, tp);
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(params.n_threads), m);
  if (workers <= 1) {
    for (std::size_t t = 0; t < m; ++t) train_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t t = next++; t < m; t = next++) {
            try {
              train_one(t);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  return ForestModel(std::move(trees), params);
}

Probabilities predict_proba_forest(const ForestModel& model, std::span<const double> sample) {
  check_sample(sample, model.n_features());
  Probabilities sum{0.0, 0.0};
  for (const auto& tree : model.trees()) {
    const auto& p = tree.node(tree.apply(sample)).probabilities;
    sum[0] += p[0];
    sum[1] += p[1];
  }
  const auto m = static_cast<double>(model.n_estimators());
  return {sum[0] / m, sum[1] / m};
}

std::vector<double> forest_feature_importances(const ForestModel& model) {
  std::vector<double> mean(model.n_features(), 0.0);
  for (const auto& tree : model.trees()) {
    const auto imp = tree.feature_importances();
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += imp[j];
  }
  const auto m = static_cast<double>(model.n_estimators());
  for (double& v : mean) v /= m;
  const double sum = std::accumulate(mean.begin(), mean.end(), 0.0);
  if (sum > 0.0) {
    for (double& v : mean) v /= sum;
  }
  return mean;
}

}  // namespace treerules
