#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wildfire/core/csv.hpp"
#include "wildfire/core/error.hpp"
#include "wildfire/core/parallel.hpp"
#include "wildfire/dataset.hpp"
#include "wildfire/ml/model.hpp"
#include "wildfire/ml/model_io.hpp"

namespace wildfire::ml {

struct ModelConfig {
  std::string model = "gbr";  // gbr | tree | linear | knn | forest
  GbmParams gbr;
  ForestParams forest;
  TreeParams tree;
  std::size_t k = 5;
};

inline bool is_known_model(const std::string& name) {
  return name == "gbr" || name == "tree" || name == "linear" || name == "knn" || name == "forest";
}

inline nlohmann::json hyperparameters_json(const ModelConfig& c) {
  if (c.model == "gbr")
    return {{"n_estimators", c.gbr.n_estimators},
            {"learning_rate", c.gbr.learning_rate},
            {"max_depth", c.gbr.max_depth},
            {"min_samples_leaf", c.gbr.min_samples_leaf}};
  if (c.model == "forest")
    return {{"n_trees", c.forest.n_trees},
            {"max_depth", c.forest.max_depth},
            {"min_samples_leaf", c.forest.min_samples_leaf},
            {"bootstrap", c.forest.bootstrap}};
  if (c.model == "tree") return {{"max_depth", c.tree.max_depth}, {"min_samples_leaf", c.tree.min_samples_leaf}};
  if (c.model == "knn") return {{"k", c.k}};
  return nlohmann::json::object();
}

inline Model fit_model(const SampleSet& samples, const ModelConfig& config, std::vector<std::string> feature_names,
                       std::uint64_t seed = 0) {
  if (feature_names.size() != samples.n_features())
    throw DimensionMismatch("feature name count does not match sample width");
  Model m;
  m.feature_names = std::move(feature_names);
  if (config.model == "gbr") {
    auto p = config.gbr;
    p.seed = seed;
    m.impl = fit_gbr(samples, p);
  } else if (config.model == "tree") {
    if (samples.size() < 2) throw TooFewSamples("fit_tree needs >= 2 samples for evaluation");
    m.impl = fit_tree(samples, config.tree.max_depth, config.tree.min_samples_leaf);
  } else if (config.model == "linear") {
    m.impl = fit_linear(samples);
  } else if (config.model == "knn") {
    m.impl = fit_knn(samples, config.k);
  } else if (config.model == "forest") {
    auto p = config.forest;
    p.seed = seed;
    m.impl = fit_random_forest(samples, p);
  } else {
    throw InputError("InvalidInput", "unknown model type '" + config.model + "'");
  }
  return m;
}

struct EvalReport {
  std::string model;
  nlohmann::json hyperparameters;
  double r2 = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
};

struct TrainResult {
  Model model;
  EvalReport report;
};

inline std::vector<double> predict_all(const Model& model, const SampleSet& s) {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = model.predict(s.row(i));
  return out;
}

// Fits on a seeded holdout split and scores R² on the held-out part.
inline TrainResult train_and_evaluate(const SampleSet& samples, const ModelConfig& config,
                                      const std::vector<std::string>& feature_names, std::uint64_t seed,
                                      double test_fraction = 0.2) {
  if (samples.size() < 4) throw TooFewSamples("need >= 4 samples to train and evaluate, got " + std::to_string(samples.size()));
  const auto split = train_test_split(samples, test_fraction, seed);
  TrainResult out{fit_model(split.train, config, feature_names, seed), {}};
  out.report.model = config.model;
  out.report.hyperparameters = hyperparameters_json(config);
  out.report.n_train = split.train.size();
  out.report.n_test = split.test.size();
  out.report.seed = seed;
  out.report.r2 = r2_score(split.test.targets(), predict_all(out.model, split.test));
  return out;
}

struct SweepPoint {
  double parameter;
  double r2;
};

// For each w: windows with stride = w, holdout split, fit, held-out R².
inline std::vector<SweepPoint> sweep_window(const std::vector<dataset::JoinedDailyRecord>& table,
                                            const std::vector<int>& w_list, const ModelConfig& config,
                                            std::uint64_t seed, double test_fraction = 0.2,
                                            std::size_t max_workers = default_parallelism()) {
  std::vector<SweepPoint> out(w_list.size());
  parallel_for(
      w_list.size(),
      [&](std::size_t i) {
        const int w = w_list[i];
        const auto samples = to_samples(dataset::window_aggregate(table, w, w));
        out[i] = {static_cast<double>(w),
                  train_and_evaluate(samples, config, window_feature_names(), seed, test_fraction).report.r2};
      },
      max_workers);
  return out;
}

inline std::vector<SweepPoint> sweep_depth(const SampleSet& samples, const std::vector<int>& depth_list,
                                           const ModelConfig& config, std::uint64_t seed,
                                           double test_fraction = 0.2,
                                           std::size_t max_workers = default_parallelism()) {
  std::vector<SweepPoint> out(depth_list.size());
  const auto names = generic_feature_names(samples.n_features());
  parallel_for(
      depth_list.size(),
      [&](std::size_t i) {
        auto c = config;
        c.gbr.max_depth = c.forest.max_depth = c.tree.max_depth = depth_list[i];
        out[i] = {static_cast<double>(depth_list[i]), train_and_evaluate(samples, c, names, seed, test_fraction).report.r2};
      },
      max_workers);
  return out;
}

inline double best_parameter(const std::vector<SweepPoint>& points) {
  if (points.empty()) throw InputError("InvalidInput", "empty sweep");
  const SweepPoint* best = &points.front();
  for (const auto& p : points)
    if (p.r2 > best->r2) best = &p;
  return best->parameter;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  out << "parameter,r2\n";
  for (const auto& p : points) out << csv::format_double(p.parameter) << ',' << csv::format_double(p.r2) << '\n';
}

inline constexpr const char* kReportHeader = "model,r2,n_train,n_test,seed,hyperparameters";

inline void write_report_csv(std::ostream& out, const EvalReport& r) {
  out << kReportHeader << '\n';
  csv::write_row(out, {r.model, csv::format_double(r.r2), std::to_string(r.n_train), std::to_string(r.n_test),
                       std::to_string(r.seed), r.hyperparameters.dump()});
}

}  // namespace wildfire::ml
