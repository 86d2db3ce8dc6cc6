#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "wildfire/core/error.hpp"
#include "wildfire/ml/samples.hpp"

namespace wildfire::ml {

// Ordinary least squares on standardized features:
// y = intercept + sum_j coef_j * (x_j - mean_j) / sd_j.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(std::vector<FeatureScaling> scaling, std::vector<double> coef, double intercept)
      : scaling_(std::move(scaling)), coef_(std::move(coef)), intercept_(intercept) {}

  double predict(std::span<const double> x) const {
    if (x.size() != scaling_.size())
      throw DimensionMismatch("linear model expects " + std::to_string(scaling_.size()) + " features, got " +
                              std::to_string(x.size()));
    double y = intercept_;
    for (std::size_t j = 0; j < x.size(); ++j) y += coef_[j] * scaling_[j].apply(x[j]);
    return y;
  }

  // Coefficients on the original feature scale.
  std::vector<double> slopes() const {
    std::vector<double> out(coef_.size());
    for (std::size_t j = 0; j < coef_.size(); ++j)
      out[j] = scaling_[j].stddev > 0.0 ? coef_[j] / scaling_[j].stddev : 0.0;
    return out;
  }

  double raw_intercept() const {
    double b = intercept_;
    const auto s = slopes();
    for (std::size_t j = 0; j < s.size(); ++j) b -= s[j] * scaling_[j].mean;
    return b;
  }

  std::size_t n_features() const { return scaling_.size(); }
  const std::vector<FeatureScaling>& scaling() const { return scaling_; }
  const std::vector<double>& coefficients() const { return coef_; }
  double intercept() const { return intercept_; }

 private:
  std::vector<FeatureScaling> scaling_;
  std::vector<double> coef_;  // on standardized features
  double intercept_ = 0.0;    // mean of training y
};

// Minimum-norm least squares via complete orthogonal decomposition, so
// collinear or constant columns are handled.
inline LinearModel fit_linear(const SampleSet& samples) {
  if (samples.size() < 2) throw TooFewSamples("fit_linear needs >= 2 samples, got " + std::to_string(samples.size()));
  const auto std_set = standardize(samples);
  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto p = static_cast<Eigen::Index>(samples.n_features());

  double mean_y = 0.0;
  for (const double v : samples.targets()) mean_y += v;
  mean_y /= static_cast<double>(samples.size());

  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j)
      x(i, j) = std_set.samples.x(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    y(i) = samples.y(static_cast<std::size_t>(i)) - mean_y;
  }
  std::vector<double> coef(static_cast<std::size_t>(p), 0.0);
  if (p > 0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
    cod.setThreshold(1e-10);
    const Eigen::VectorXd beta = cod.solve(y);
    for (Eigen::Index j = 0; j < p; ++j) coef[static_cast<std::size_t>(j)] = beta(j);
  }
  return LinearModel(std_set.scaling, std::move(coef), mean_y);
}

}  // namespace wildfire::ml
