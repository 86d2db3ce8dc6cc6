#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wildfire/core/error.hpp"
#include "wildfire/core/parallel.hpp"
#include "wildfire/core/random.hpp"
#include "wildfire/ml/samples.hpp"
#include "wildfire/ml/tree.hpp"

namespace wildfire::ml {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 7;
  std::size_t min_samples_leaf = 1;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(std::vector<RegressionTree> trees, ForestParams params, std::size_t n_features)
      : trees_(std::move(trees)), params_(params), n_features_(n_features) {}

  double predict(std::span<const double> x) const {
    if (x.size() != n_features_)
      throw DimensionMismatch("forest expects " + std::to_string(n_features_) + " features, got " +
                              std::to_string(x.size()));
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict_unchecked(x);
    return sum / static_cast<double>(trees_.size());
  }

  const std::vector<RegressionTree>& trees() const { return trees_; }
  const ForestParams& params() const { return params_; }
  std::size_t n_features() const { return n_features_; }

 private:
  std::vector<RegressionTree> trees_;
  ForestParams params_;
  std::size_t n_features_ = 0;
};

// Tree t draws its bootstrap sample from derive_seed(seed, t), so the fit is
// identical however the trees are scheduled.
inline ForestModel fit_random_forest(const SampleSet& samples, const ForestParams& params = {},
                                     std::size_t max_workers = default_parallelism()) {
  if (samples.size() < 2) throw TooFewSamples("fit_random_forest needs >= 2 samples");
  if (params.n_trees < 1) throw InputError("InvalidInput", "n_trees must be >= 1");
  std::vector<RegressionTree> trees(static_cast<std::size_t>(params.n_trees));
  parallel_for(
      trees.size(),
      [&](std::size_t t) {
        std::vector<std::size_t> rows;
        if (params.bootstrap) {
          Rng rng(derive_seed(params.seed, t));
          rows.resize(samples.size());
          for (auto& r : rows) r = static_cast<std::size_t>(rng.below(samples.size()));
        }
        TreeBuilder builder(samples, std::move(rows));
        trees[t] = builder.build(samples.targets(), {params.max_depth, params.min_samples_leaf});
      },
      max_workers);
  return ForestModel(std::move(trees), params, samples.n_features());
}

}  // namespace wildfire::ml
