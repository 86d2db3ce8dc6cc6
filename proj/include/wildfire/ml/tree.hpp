#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "wildfire/core/error.hpp"
#include "wildfire/ml/samples.hpp"

namespace wildfire::ml {

struct TreeParams {
  int max_depth = 7;
  std::size_t min_samples_leaf = 1;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // mean target of the samples that reached the node
  std::size_t n_samples = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Binary regression tree stored as a pre-order node list (root at 0). Routing
// goes left iff x[feature] <= threshold.
class RegressionTree {
 public:
  RegressionTree() = default;
  RegressionTree(std::vector<TreeNode> nodes, std::size_t n_features, TreeParams params = {})
      : nodes_(std::move(nodes)), n_features_(n_features), params_(params) {}

  double predict(std::span<const double> x) const {
    if (x.size() != n_features_)
      throw DimensionMismatch("tree expects " + std::to_string(n_features_) + " features, got " +
                              std::to_string(x.size()));
    return predict_unchecked(x);
  }

  double predict_unchecked(std::span<const double> x) const {
    int i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
      const auto& n = nodes_[static_cast<std::size_t>(i)];
      i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(i)].value;
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t n_features() const { return n_features_; }
  const TreeParams& params() const { return params_; }

  int depth() const { return nodes_.empty() ? 0 : depth_from(0); }

  std::size_t n_leaves() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](auto& n) { return n.is_leaf(); }));
  }

 private:
  int depth_from(int i) const {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    return n.is_leaf() ? 0 : 1 + std::max(depth_from(n.left), depth_from(n.right));
  }

  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
  TreeParams params_;
};

// Greedy CART builder with exact split search. Feature orderings are sorted
// once per builder, so repeated fits on the same design (boosting stages) only
// pay for partitioning.
//
// Split rule: candidate thresholds are midpoints between consecutive distinct
// values; the split minimizing the children's total SSE wins, ties going to
// the lowest feature index and then the lowest threshold. A node is a leaf at
// the depth limit, with fewer than 2 * min_samples_leaf samples, with constant
// targets, or when no candidate reduces SSE.
class TreeBuilder {
 public:
  // `rows` lists the training rows by id and may repeat ids (bootstrap
  // draws); empty means every row once.
  explicit TreeBuilder(const SampleSet& data, std::vector<std::size_t> rows = {})
      : n_features_(data.n_features()), rows_(std::move(rows)) {
    if (rows_.empty()) {
      rows_.resize(data.size());
      std::iota(rows_.begin(), rows_.end(), std::size_t{0});
    }
    if (rows_.empty()) throw EmptySampleSet("fit_tree: no samples");
    const std::size_t m = rows_.size();
    columns_.assign(n_features_, std::vector<double>(m));
    for (std::size_t f = 0; f < n_features_; ++f)
      for (std::size_t p = 0; p < m; ++p) columns_[f][p] = data.x(rows_[p], f);

    sorted_.assign(n_features_, std::vector<std::uint32_t>(m));
    for (std::size_t f = 0; f < n_features_; ++f) {
      auto& ord = sorted_[f];
      std::iota(ord.begin(), ord.end(), std::uint32_t{0});
      const auto& col = columns_[f];
      std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }
  }

  std::size_t size() const { return rows_.size(); }
  const std::vector<std::size_t>& rows() const { return rows_; }

  // `targets` is indexed by row id, as in the SampleSet.
  RegressionTree build(std::span<const double> targets, const TreeParams& params) {
    if (params.max_depth < 0) throw InputError("InvalidInput", "max_depth must be >= 0");
    const std::size_t m = rows_.size();
    y_.resize(m);
    for (std::size_t p = 0; p < m; ++p) y_[p] = targets[rows_[p]];
    work_ = sorted_;
    goes_left_.assign(m, 0);
    scratch_.resize(m);
    nodes_.clear();
    params_ = params;
    params_.min_samples_leaf = std::max<std::size_t>(1, params.min_samples_leaf);
    grow(0, m, 0);
    return RegressionTree(std::move(nodes_), n_features_, params_);
  }

 private:
  int grow(std::size_t begin, std::size_t end, int depth) {
    const std::size_t n = end - begin;
    const auto& any = work_.empty() ? identity(begin, end) : work_[0];
    double sum = 0.0;
    double lo = y_[any[begin]], hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = y_[any[i]];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double mean = sum / static_cast<double>(n);

    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back({-1, 0.0, -1, -1, mean, n});
    const std::size_t msl = params_.min_samples_leaf;
    if (depth >= params_.max_depth || n < 2 * msl || lo == hi || n_features_ == 0) return index;

    double node_sse = 0.0;
    for (std::size_t i = begin; i < end; ++i) node_sse += (y_[any[i]] - mean) * (y_[any[i]] - mean);

    // Children SSE = node SSE - gain, with gain = sL^2 * n / (nL * nR) for the
    // centred left sum sL.
    int best_feature = -1;
    double best_gain = 0.0, best_threshold = 0.0;
    std::size_t best_left = 0;
    for (std::size_t f = 0; f < n_features_; ++f) {
      const auto& ord = work_[f];
      const auto& col = columns_[f];
      double left_sum = 0.0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        left_sum += y_[ord[i]] - mean;
        const std::size_t nl = i - begin + 1;
        const std::size_t nr = n - nl;
        if (nl < msl) continue;
        if (nr < msl) break;
        const double xa = col[ord[i]];
        const double xb = col[ord[i + 1]];
        if (xa == xb) continue;
        const double gain = left_sum * left_sum * static_cast<double>(n) /
                            (static_cast<double>(nl) * static_cast<double>(nr));
        if (gain > best_gain * (1.0 + 1e-12)) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          double mid = 0.5 * (xa + xb);
          if (!(mid < xb)) mid = xa;
          best_threshold = mid;
          best_left = nl;
        }
      }
    }
    if (best_feature < 0 || !(best_gain > 1e-12 * node_sse)) return index;

    const auto& chosen = work_[static_cast<std::size_t>(best_feature)];
    for (std::size_t i = begin; i < end; ++i) goes_left_[chosen[i]] = i < begin + best_left;
    for (std::size_t f = 0; f < n_features_; ++f) {
      if (static_cast<int>(f) == best_feature) continue;
      auto& ord = work_[f];
      std::size_t l = begin, r = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const auto p = ord[i];
        if (goes_left_[p]) ord[l++] = p;
        else scratch_[r++] = p;
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r),
                ord.begin() + static_cast<std::ptrdiff_t>(l));
    }

    nodes_[static_cast<std::size_t>(index)].feature = best_feature;
    nodes_[static_cast<std::size_t>(index)].threshold = best_threshold;
    const int left = grow(begin, begin + best_left, depth + 1);
    const int right = grow(begin + best_left, end, depth + 1);
    nodes_[static_cast<std::size_t>(index)].left = left;
    nodes_[static_cast<std::size_t>(index)].right = right;
    return index;
  }

  // Zero-feature designs have no orderings; fall back to positional order.
  const std::vector<std::uint32_t>& identity(std::size_t, std::size_t) {
    if (identity_.size() != rows_.size()) {
      identity_.resize(rows_.size());
      std::iota(identity_.begin(), identity_.end(), std::uint32_t{0});
    }
    return identity_;
  }

  std::size_t n_features_;
  std::vector<std::size_t> rows_;
  std::vector<std::vector<double>> columns_;        // [feature][position]
  std::vector<std::vector<std::uint32_t>> sorted_;  // [feature] positions by value
  std::vector<std::vector<std::uint32_t>> work_;
  std::vector<std::uint32_t> identity_;
  std::vector<double> y_;
  std::vector<char> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<TreeNode> nodes_;
  TreeParams params_;
};

inline RegressionTree fit_tree(const SampleSet& samples, int max_depth = 7, std::size_t min_samples_leaf = 1) {
  if (samples.empty()) throw EmptySampleSet("fit_tree: no samples");
  TreeBuilder builder(samples);
  return builder.build(samples.targets(), {max_depth, min_samples_leaf});
}

}  // namespace wildfire::ml
