#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wildfire/core/error.hpp"
#include "wildfire/ml/samples.hpp"

namespace wildfire::ml {

// k-nearest-neighbour regression in standardized feature space. Distance ties
// go to the lower training index.
class KnnModel {
 public:
  KnnModel() = default;
  KnnModel(SampleSet standardized, std::vector<FeatureScaling> scaling, std::size_t k)
      : train_(std::move(standardized)), scaling_(std::move(scaling)), k_(k) {}

  double predict(std::span<const double> x) const {
    const auto z = apply_scaling(x, scaling_);
    std::vector<std::pair<double, std::size_t>> dist(train_.size());
    for (std::size_t i = 0; i < train_.size(); ++i) {
      double d = 0.0;
      const auto r = train_.row(i);
      for (std::size_t f = 0; f < z.size(); ++f) d += (r[f] - z[f]) * (r[f] - z[f]);
      dist[i] = {d, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < k_; ++j) sum += train_.y(dist[j].second);
    return sum / static_cast<double>(k_);
  }

  std::size_t k() const { return k_; }
  std::size_t n_features() const { return scaling_.size(); }
  const SampleSet& training() const { return train_; }
  const std::vector<FeatureScaling>& scaling() const { return scaling_; }

 private:
  SampleSet train_;
  std::vector<FeatureScaling> scaling_;
  std::size_t k_ = 5;
};

inline KnnModel fit_knn(const SampleSet& samples, std::size_t k = 5) {
  if (samples.size() < 2) throw TooFewSamples("fit_knn needs >= 2 samples, got " + std::to_string(samples.size()));
  if (k == 0 || k > samples.size())
    throw KTooLarge("k = " + std::to_string(k) + " with " + std::to_string(samples.size()) + " samples");
  auto s = standardize(samples);
  return KnnModel(std::move(s.samples), std::move(s.scaling), k);
}

}  // namespace wildfire::ml
