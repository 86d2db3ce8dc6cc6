#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wildfire/ml/forest.hpp"
#include "wildfire/ml/gbm.hpp"
#include "wildfire/ml/knn.hpp"
#include "wildfire/ml/linear.hpp"
#include "wildfire/ml/tree.hpp"

namespace wildfire::ml {

using ModelVariant = std::variant<GbmModel, RegressionTree, LinearModel, KnnModel, ForestModel>;

// A fitted model plus the ordered names of the features it consumes.
struct Model {
  ModelVariant impl;
  std::vector<std::string> feature_names;

  double predict(std::span<const double> x) const {
    return std::visit([&](const auto& m) { return m.predict(x); }, impl);
  }

  std::size_t n_features() const {
    return std::visit([](const auto& m) { return m.n_features(); }, impl);
  }

  std::string_view type() const {
    struct {
      std::string_view operator()(const GbmModel&) const { return "gbr"; }
      std::string_view operator()(const RegressionTree&) const { return "tree"; }
      std::string_view operator()(const LinearModel&) const { return "linear"; }
      std::string_view operator()(const KnnModel&) const { return "knn"; }
      std::string_view operator()(const ForestModel&) const { return "forest"; }
    } name;
    return std::visit(name, impl);
  }
};

}  // namespace wildfire::ml
