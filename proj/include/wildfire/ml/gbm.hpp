#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wildfire/core/error.hpp"
#include "wildfire/ml/samples.hpp"
#include "wildfire/ml/tree.hpp"

namespace wildfire::ml {

struct GbmParams {
  int n_estimators = 150;
  double learning_rate = 0.01;
  int max_depth = 7;
  std::size_t min_samples_leaf = 1;
  std::uint64_t seed = 0;  // recorded; the exact-greedy fit has no randomness
};

// Squared-error gradient boosting: F0 = mean(y), F_m = F_{m-1} + lr * tree_m
// where tree_m is fit to the residuals y - F_{m-1}.
class GbmModel {
 public:
  GbmModel() = default;
  GbmModel(double base, std::vector<RegressionTree> trees, GbmParams params, std::size_t n_features,
           std::vector<FeatureScaling> scaling = {}, bool scaled = false)
      : base_(base),
        trees_(std::move(trees)),
        params_(params),
        n_features_(n_features),
        scaling_(std::move(scaling)),
        scaled_(scaled) {}

  double predict(std::span<const double> x) const {
    if (x.size() != n_features_)
      throw DimensionMismatch("model expects " + std::to_string(n_features_) + " features, got " +
                              std::to_string(x.size()));
    if (scaled_) {
      const auto z = apply_scaling(x, scaling_);
      return accumulate(z);
    }
    return accumulate(x);
  }

  double base_prediction() const { return base_; }
  double learning_rate() const { return params_.learning_rate; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  const GbmParams& params() const { return params_; }
  std::size_t n_features() const { return n_features_; }
  const std::vector<FeatureScaling>& scaling() const { return scaling_; }
  bool scaled() const { return scaled_; }

 private:
  double accumulate(std::span<const double> x) const {
    double f = base_;
    for (const auto& t : trees_) f += params_.learning_rate * t.predict_unchecked(x);
    return f;
  }

  double base_ = 0.0;
  std::vector<RegressionTree> trees_;
  GbmParams params_;
  std::size_t n_features_ = 0;
  std::vector<FeatureScaling> scaling_;  // recorded at fit time
  bool scaled_ = false;                  // trees split raw features
};

inline double sse(std::span<const double> y, std::span<const double> f) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - f[i]) * (y[i] - f[i]);
  return s;
}

// `train_sse`, when given, receives the training SSE after every stage
// (index 0 is the constant model).
inline GbmModel fit_gbr(const SampleSet& samples, const GbmParams& params = {},
                        std::vector<double>* train_sse = nullptr) {
  if (samples.size() < 2) throw TooFewSamples("fit_gbr needs >= 2 samples, got " + std::to_string(samples.size()));
  if (params.n_estimators < 0) throw InputError("InvalidInput", "n_estimators must be >= 0");
  if (!(params.learning_rate > 0.0)) throw InputError("InvalidInput", "learning_rate must be > 0");

  const std::size_t n = samples.size();
  const auto& y = samples.targets();
  double base = 0.0;
  for (const double v : y) base += v;
  base /= static_cast<double>(n);

  std::vector<double> fitted(n, base), residual(n);
  if (train_sse) train_sse->assign(1, sse(y, fitted));

  TreeBuilder builder(samples);
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(params.n_estimators));
  for (int m = 0; m < params.n_estimators; ++m) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - fitted[i];
    auto tree = builder.build(residual, {params.max_depth, params.min_samples_leaf});
    for (std::size_t i = 0; i < n; ++i) fitted[i] += params.learning_rate * tree.predict_unchecked(samples.row(i));
    if (train_sse) train_sse->push_back(sse(y, fitted));
    trees.push_back(std::move(tree));
  }
  return GbmModel(base, std::move(trees), params, samples.n_features(), fit_scaling(samples), false);
}

}  // namespace wildfire::ml
