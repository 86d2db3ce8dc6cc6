#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wildfire/core/error.hpp"
#include "wildfire/ml/model.hpp"

// Model artifact: a JSON document
//
//   schema_version   integer, currently 1
//   model_type       gbr | tree | linear | knn | forest
//   hyperparameters  object
//   feature_names    ordered list
//   scaling          [{mean, stddev}] per feature
//   scaled           whether predict() standardizes inputs first
//   base_prediction  gbr only
//   trees            list of pre-order node lists; a node is
//                    [feature_index, threshold, left_id, right_id] or [leaf_value]
//
// plus coefficients/intercept (linear) or k/training (knn).
namespace wildfire::ml {

inline constexpr int kModelSchemaVersion = 1;

namespace detail {

using nlohmann::json;

inline json scaling_to_json(const std::vector<FeatureScaling>& s) {
  json out = json::array();
  for (const auto& f : s) out.push_back({{"mean", f.mean}, {"stddev", f.stddev}});
  return out;
}

inline json tree_to_json(const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes()) {
    if (n.is_leaf()) nodes.push_back(json::array({n.value}));
    else nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right}));
  }
  return nodes;
}

[[noreturn]] inline void corrupt(const std::string& why) { throw CorruptModel("corrupt model artifact: " + why); }

inline double finite(const json& v, const char* what) {
  if (!v.is_number()) corrupt(std::string(what) + " is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) corrupt(std::string(what) + " is not finite");
  return d;
}

inline std::vector<FeatureScaling> scaling_from_json(const json& j, std::size_t n_features) {
  if (!j.is_array() || j.size() != n_features) corrupt("scaling table size does not match feature count");
  std::vector<FeatureScaling> out;
  for (const auto& f : j) out.push_back({finite(f.at("mean"), "mean"), finite(f.at("stddev"), "stddev")});
  return out;
}

inline RegressionTree tree_from_json(const json& j, std::size_t n_features, TreeParams params) {
  if (!j.is_array() || j.empty()) corrupt("empty tree");
  std::vector<TreeNode> nodes;
  const int count = static_cast<int>(j.size());
  for (int i = 0; i < count; ++i) {
    const auto& n = j[static_cast<std::size_t>(i)];
    TreeNode node;
    if (n.is_array() && n.size() == 1) {
      node.value = finite(n[0], "leaf value");
    } else if (n.is_array() && n.size() == 4) {
      node.feature = n[0].get<int>();
      node.threshold = finite(n[1], "threshold");
      node.left = n[2].get<int>();
      node.right = n[3].get<int>();
      if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= n_features) corrupt("feature index out of range");
      // Pre-order layout: children always follow their parent.
      if (node.left <= i || node.right <= i || node.left >= count || node.right >= count) corrupt("bad child index");
    } else {
      corrupt("malformed node");
    }
    nodes.push_back(node);
  }
  return RegressionTree(std::move(nodes), n_features, params);
}

}  // namespace detail

inline nlohmann::json model_to_json(const Model& model) {
  using nlohmann::json;
  json doc;
  doc["schema_version"] = kModelSchemaVersion;
  doc["model_type"] = std::string(model.type());
  doc["feature_names"] = model.feature_names;

  struct Writer {
    json& doc;
    void operator()(const GbmModel& m) const {
      const auto& p = m.params();
      doc["hyperparameters"] = {{"n_estimators", p.n_estimators},   {"learning_rate", p.learning_rate},
                                {"max_depth", p.max_depth},         {"min_samples_leaf", p.min_samples_leaf},
                                {"seed", p.seed}};
      doc["scaling"] = detail::scaling_to_json(m.scaling());
      doc["scaled"] = m.scaled();
      doc["base_prediction"] = m.base_prediction();
      json trees = json::array();
      for (const auto& t : m.trees()) trees.push_back(detail::tree_to_json(t));
      doc["trees"] = std::move(trees);
    }
    void operator()(const RegressionTree& t) const {
      doc["hyperparameters"] = {{"max_depth", t.params().max_depth},
                                {"min_samples_leaf", t.params().min_samples_leaf}};
      doc["scaling"] = json::array();
      doc["scaled"] = false;
      doc["trees"] = json::array({detail::tree_to_json(t)});
    }
    void operator()(const LinearModel& m) const {
      doc["hyperparameters"] = json::object();
      doc["scaling"] = detail::scaling_to_json(m.scaling());
      doc["scaled"] = true;
      doc["coefficients"] = m.coefficients();
      doc["intercept"] = m.intercept();
    }
    void operator()(const KnnModel& m) const {
      doc["hyperparameters"] = {{"k", m.k()}};
      doc["scaling"] = detail::scaling_to_json(m.scaling());
      doc["scaled"] = true;
      json x = json::array();
      for (std::size_t i = 0; i < m.training().size(); ++i) {
        const auto r = m.training().row(i);
        x.push_back(std::vector<double>(r.begin(), r.end()));
      }
      doc["training"] = {{"x", std::move(x)}, {"y", m.training().targets()}};
    }
    void operator()(const ForestModel& m) const {
      const auto& p = m.params();
      doc["hyperparameters"] = {{"n_trees", p.n_trees},
                                {"max_depth", p.max_depth},
                                {"min_samples_leaf", p.min_samples_leaf},
                                {"bootstrap", p.bootstrap},
                                {"seed", p.seed}};
      doc["scaling"] = json::array();
      doc["scaled"] = false;
      json trees = json::array();
      for (const auto& t : m.trees()) trees.push_back(detail::tree_to_json(t));
      doc["trees"] = std::move(trees);
    }
  };
  std::visit(Writer{doc}, model.impl);
  return doc;
}

inline Model model_from_json(const nlohmann::json& doc) {
  using detail::corrupt;
  if (!doc.is_object()) corrupt("not a JSON object");
  if (!doc.contains("schema_version")) corrupt("missing schema_version");
  const auto& version = doc.at("schema_version");
  if (!version.is_number_integer()) {
    if (version.is_string()) throw UnsupportedVersion("unsupported model schema_version \"" + version.get<std::string>() + "\"");
    corrupt("schema_version is not an integer");
  }
  if (version.get<long>() != kModelSchemaVersion)
    throw UnsupportedVersion("unsupported model schema_version " + std::to_string(version.get<long>()));

  try {
    Model model;
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    const std::size_t nf = model.feature_names.size();
    const auto type = doc.at("model_type").get<std::string>();
    const auto& hp = doc.at("hyperparameters");
    if (type == "gbr") {
      GbmParams p;
      p.n_estimators = hp.at("n_estimators").get<int>();
      p.learning_rate = detail::finite(hp.at("learning_rate"), "learning_rate");
      p.max_depth = hp.at("max_depth").get<int>();
      p.min_samples_leaf = hp.at("min_samples_leaf").get<std::size_t>();
      p.seed = hp.at("seed").get<std::uint64_t>();
      std::vector<RegressionTree> trees;
      for (const auto& t : doc.at("trees")) trees.push_back(detail::tree_from_json(t, nf, {p.max_depth, p.min_samples_leaf}));
      if (trees.size() != static_cast<std::size_t>(p.n_estimators)) corrupt("tree count does not match n_estimators");
      model.impl = GbmModel(detail::finite(doc.at("base_prediction"), "base_prediction"), std::move(trees), p, nf,
                            detail::scaling_from_json(doc.at("scaling"), nf), doc.at("scaled").get<bool>());
    } else if (type == "tree") {
      const TreeParams p{hp.at("max_depth").get<int>(), hp.at("min_samples_leaf").get<std::size_t>()};
      const auto& trees = doc.at("trees");
      if (trees.size() != 1) corrupt("tree model must hold exactly one tree");
      model.impl = detail::tree_from_json(trees[0], nf, p);
    } else if (type == "linear") {
      auto coef = doc.at("coefficients").get<std::vector<double>>();
      if (coef.size() != nf) corrupt("coefficient count does not match feature count");
      model.impl = LinearModel(detail::scaling_from_json(doc.at("scaling"), nf), std::move(coef),
                               detail::finite(doc.at("intercept"), "intercept"));
    } else if (type == "knn") {
      const auto k = hp.at("k").get<std::size_t>();
      const auto& tr = doc.at("training");
      const auto& xs = tr.at("x");
      const auto ys = tr.at("y").get<std::vector<double>>();
      if (xs.size() != ys.size() || k == 0 || k > ys.size()) corrupt("inconsistent knn training set");
      SampleSet train(nf);
      for (std::size_t i = 0; i < ys.size(); ++i) {
        const auto row = xs[i].get<std::vector<double>>();
        if (row.size() != nf) corrupt("knn training row has wrong width");
        train.add(row, ys[i]);
      }
      model.impl = KnnModel(std::move(train), detail::scaling_from_json(doc.at("scaling"), nf), k);
    } else if (type == "forest") {
      ForestParams p;
      p.n_trees = hp.at("n_trees").get<int>();
      p.max_depth = hp.at("max_depth").get<int>();
      p.min_samples_leaf = hp.at("min_samples_leaf").get<std::size_t>();
      p.bootstrap = hp.at("bootstrap").get<bool>();
      p.seed = hp.at("seed").get<std::uint64_t>();
      std::vector<RegressionTree> trees;
      for (const auto& t : doc.at("trees")) trees.push_back(detail::tree_from_json(t, nf, {p.max_depth, p.min_samples_leaf}));
      if (trees.empty() || trees.size() != static_cast<std::size_t>(p.n_trees)) corrupt("tree count does not match n_trees");
      model.impl = ForestModel(std::move(trees), p, nf);
    } else {
      corrupt("unknown model_type '" + type + "'");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    corrupt(e.what());
  }
}

// Writes through a temporary file and renames it into place.
inline void save_model(const Model& model, const std::filesystem::path& path) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("UnwritablePath", "cannot write model to " + path.string());
    out << model_to_json(model).dump(1) << '\n';
    if (!out) throw InputError("UnwritablePath", "failed writing model to " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

inline Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("MissingInput", "cannot read model file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModel("corrupt model artifact " + path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace wildfire::ml
