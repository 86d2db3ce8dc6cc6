#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wildfire/core/error.hpp"
#include "wildfire/core/random.hpp"
#include "wildfire/dataset.hpp"

namespace wildfire::ml {

// Dense row-major design matrix with targets.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(std::size_t n_features) : n_features_(n_features) {}

  void add(std::span<const double> x, double y) {
    if (x.size() != n_features_)
      throw DimensionMismatch("sample has " + std::to_string(x.size()) + " features, expected " +
                              std::to_string(n_features_));
    x_.insert(x_.end(), x.begin(), x.end());
    y_.push_back(y);
  }

  std::size_t size() const { return y_.size(); }
  bool empty() const { return y_.empty(); }
  std::size_t n_features() const { return n_features_; }

  std::span<const double> row(std::size_t i) const { return {x_.data() + i * n_features_, n_features_}; }
  double x(std::size_t i, std::size_t f) const { return x_[i * n_features_ + f]; }
  double& x(std::size_t i, std::size_t f) { return x_[i * n_features_ + f]; }
  double y(std::size_t i) const { return y_[i]; }
  const std::vector<double>& targets() const { return y_; }

  SampleSet subset(std::span<const std::size_t> indices) const {
    SampleSet out(n_features_);
    out.x_.reserve(indices.size() * n_features_);
    out.y_.reserve(indices.size());
    for (const auto i : indices) out.add(row(i), y_[i]);
    return out;
  }

 private:
  std::size_t n_features_ = 0;
  std::vector<double> x_;
  std::vector<double> y_;
};

inline SampleSet to_samples(const std::vector<dataset::WindowSample>& windows) {
  SampleSet out(dataset::kNumFeatures);
  for (const auto& w : windows) out.add(w.x, w.y);
  return out;
}

inline std::vector<std::string> window_feature_names() {
  return {dataset::kFeatureNames.begin(), dataset::kFeatureNames.end()};
}

inline std::vector<std::string> generic_feature_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

struct FeatureScaling {
  double mean = 0.0;
  double stddev = 0.0;  // population; 0 for constant features

  double apply(double v) const { return stddev > 0.0 ? (v - mean) / stddev : 0.0; }
  double invert(double z) const { return stddev > 0.0 ? z * stddev + mean : mean; }

  bool operator==(const FeatureScaling&) const = default;
};

inline std::vector<FeatureScaling> fit_scaling(const SampleSet& s) {
  if (s.size() < 2) throw TooFewSamples("standardize needs >= 2 samples, got " + std::to_string(s.size()));
  std::vector<FeatureScaling> out(s.n_features());
  const double n = static_cast<double>(s.size());
  for (std::size_t f = 0; f < s.n_features(); ++f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) sum += s.x(i, f);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) ss += (s.x(i, f) - mean) * (s.x(i, f) - mean);
    double sd = std::sqrt(ss / n);
    // Spread far below the magnitude of the values is rounding noise.
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) sd = 0.0;
    out[f] = {mean, sd};
  }
  return out;
}

inline std::vector<double> apply_scaling(std::span<const double> x, const std::vector<FeatureScaling>& scaling) {
  if (x.size() != scaling.size())
    throw DimensionMismatch("expected " + std::to_string(scaling.size()) + " features, got " +
                            std::to_string(x.size()));
  std::vector<double> out(x.size());
  for (std::size_t f = 0; f < x.size(); ++f) out[f] = scaling[f].apply(x[f]);
  return out;
}

struct Standardized {
  SampleSet samples;
  std::vector<FeatureScaling> scaling;
};

// z-score every feature; constant features map to 0.
inline Standardized standardize(const SampleSet& s) {
  Standardized out{SampleSet(s.n_features()), fit_scaling(s)};
  for (std::size_t i = 0; i < s.size(); ++i) out.samples.add(apply_scaling(s.row(i), out.scaling), s.y(i));
  return out;
}

inline double r2_score(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) throw DimensionMismatch("r2_score: length mismatch");
  if (y_true.size() < 2) throw TooFewSamples("r2_score needs >= 2 values");
  double mean = 0.0;
  for (const double v : y_true) mean += v;
  mean /= static_cast<double>(y_true.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
  }
  if (ss_tot == 0.0) throw DegenerateTarget("r2_score: all true values are equal");
  return 1.0 - ss_res / ss_tot;
}

struct Split {
  SampleSet train;
  SampleSet test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

// Seeded uniform shuffle, then the first round(n * test_fraction) rows (at
// least 1, at most n - 1) become the test set.
inline Split train_test_split(const SampleSet& s, double test_fraction = 0.2, std::uint64_t seed = 0) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InputError("InvalidInput", "test_fraction must be in (0, 1)");
  if (s.size() < 2) throw TooFewSamples("train_test_split needs >= 2 samples");
  std::vector<std::size_t> idx(s.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(s.size()) * test_fraction));
  n_test = std::clamp<std::size_t>(n_test, 1, s.size() - 1);
  Split out;
  out.test_indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.train_indices.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  out.train = s.subset(out.train_indices);
  out.test = s.subset(out.test_indices);
  return out;
}

}  // namespace wildfire::ml
