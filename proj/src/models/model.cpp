#include "factorforge/models/model.hpp"

#include <cmath>

#include "factorforge/error.hpp"
#include "factorforge/text.hpp"

namespace factorforge {

using nlohmann::json;

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kOls: return "ols";
    case ModelKind::kRidge: return "ridge";
    case ModelKind::kRandomForest: return "random_forest";
    case ModelKind::kGradientBoosting: return "gradient_boosting";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "ols") return ModelKind::kOls;
  if (name == "ridge") return ModelKind::kRidge;
  if (name == "random_forest") return ModelKind::kRandomForest;
  if (name == "gradient_boosting") return ModelKind::kGradientBoosting;
  throw Error("unknown model kind: " + std::string(name));
}

ModelSpec ModelSpec::from_json(const json& j, std::uint64_t default_seed) {
  ModelSpec s;
  s.kind = parse_model_kind(j.value("kind", std::string("gradient_boosting")));
  s.alpha = j.value("alpha", s.alpha);
  const auto seed = j.value("seed", default_seed);
  s.forest.seed = seed;
  s.boosting.seed = seed;
  if (s.kind == ModelKind::kRandomForest) {
    s.forest.n_estimators = j.value("n_estimators", s.forest.n_estimators);
    s.forest.max_depth = j.value("max_depth", s.forest.max_depth);
    s.forest.min_samples_split = j.value("min_samples_split", s.forest.min_samples_split);
    s.forest.feature_fraction = j.value("feature_fraction", s.forest.feature_fraction);
  }
  if (s.kind == ModelKind::kGradientBoosting) {
    s.boosting.n_iterations = j.value("n_iterations", s.boosting.n_iterations);
    s.boosting.max_depth = j.value("max_depth", s.boosting.max_depth);
    s.boosting.min_samples_split = j.value("min_samples_split", s.boosting.min_samples_split);
    s.boosting.learning_rate = j.value("learning_rate", s.boosting.learning_rate);
  }
  return s;
}

json ModelSpec::to_json() const {
  json j{{"kind", to_string(kind)}};
  switch (kind) {
    case ModelKind::kOls: break;
    case ModelKind::kRidge: j["alpha"] = alpha; break;
    case ModelKind::kRandomForest:
      j["n_estimators"] = forest.n_estimators;
      j["max_depth"] = forest.max_depth;
      j["min_samples_split"] = forest.min_samples_split;
      j["feature_fraction"] = forest.feature_fraction;
      j["seed"] = forest.seed;
      break;
    case ModelKind::kGradientBoosting:
      j["n_iterations"] = boosting.n_iterations;
      j["max_depth"] = boosting.max_depth;
      j["min_samples_split"] = boosting.min_samples_split;
      j["learning_rate"] = boosting.learning_rate;
      j["seed"] = boosting.seed;
      break;
  }
  return j;
}

Model fit_model(const ModelSpec& spec, const FeatureMatrix& X, std::span<const double> y) {
  switch (spec.kind) {
    case ModelKind::kOls: return fit_ols(X, y);
    case ModelKind::kRidge: return fit_ridge(X, y, spec.alpha);
    case ModelKind::kRandomForest: return fit_random_forest(X, y, spec.forest);
    case ModelKind::kGradientBoosting: return fit_gradient_boosting(X, y, spec.boosting);
  }
  throw Error("unknown model kind");
}

std::size_t feature_count(const Model& model) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return m.coefficients.size();
        } else {
          return m.n_features;
        }
      },
      model);
}

double predict_row(const Model& model, std::span<const double> x) {
  if (x.size() != feature_count(model))
    throw Error("row has " + std::to_string(x.size()) + " features; model expects " +
                std::to_string(feature_count(model)));
  return std::visit([&](const auto& m) { return m.predict_row(x); }, model);
}

std::vector<double> predict(const Model& model, const FeatureMatrix& X) {
  const std::size_t width = feature_count(model);
  if (X.cols() != width)
    throw Error("prediction matrix has " + std::to_string(X.cols()) +
                " features; model expects " + std::to_string(width));
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict_row(model, X.row(i));
  return out;
}

EvalMetrics evaluate(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) throw Error("evaluate: length mismatch");
  if (y_true.size() < 2) throw Error("evaluate: need at least two observations");
  const auto n = static_cast<double>(y_true.size());
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= n;
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    sse += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    sst += (y_true[i] - mean) * (y_true[i] - mean);
  }
  EvalMetrics m;
  m.mse = sse / n;
  if (sst == 0.0) {
    m.degenerate = true;
    m.r2 = sse == 0.0 ? 1.0 : 0.0;
  } else {
    m.r2 = 1.0 - sse / sst;
  }
  return m;
}

namespace {

json node_to_json(const RegressionTree& tree, int id) {
  const auto& n = tree.nodes[static_cast<std::size_t>(id)];
  if (n.is_leaf()) return json{{"value", n.value}, {"n", n.n_samples}};
  return json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"value", n.value},
              {"n", n.n_samples},
              {"gain", n.gain},
              {"left", node_to_json(tree, n.left)},
              {"right", node_to_json(tree, n.right)}};
}

int node_from_json(const json& j, RegressionTree& tree) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  TreeNode node;
  node.value = j.at("value").get<double>();
  node.n_samples = j.at("n").get<double>();
  if (j.contains("feature")) {
    node.feature = j.at("feature").get<int>();
    node.threshold = j.at("threshold").get<double>();
    node.gain = j.value("gain", 0.0);
    node.left = node_from_json(j.at("left"), tree);
    node.right = node_from_json(j.at("right"), tree);
  }
  tree.nodes[static_cast<std::size_t>(id)] = node;
  return id;
}

json trees_to_json(const std::vector<RegressionTree>& trees) {
  json arr = json::array();
  for (const auto& t : trees) arr.push_back(tree_to_json(t));
  return arr;
}

std::vector<RegressionTree> trees_from_json(const json& arr) {
  std::vector<RegressionTree> trees;
  for (const auto& t : arr) trees.push_back(tree_from_json(t));
  return trees;
}

}  // namespace

json tree_to_json(const RegressionTree& tree) {
  if (tree.nodes.empty()) throw Error("cannot serialize an empty tree");
  return node_to_json(tree, 0);
}

RegressionTree tree_from_json(const json& j) {
  RegressionTree tree;
  node_from_json(j, tree);
  return tree;
}

json model_to_json(const TrainedModel& tm) {
  json j;
  j["features"] = tm.features;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          j["kind"] = m.kind == LinearKind::kOls ? "ols" : "ridge";
          j["alpha"] = m.alpha;
          j["intercept"] = m.intercept;
          j["coefficients"] = m.coefficients;
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          j["kind"] = "random_forest";
          j["n_estimators"] = m.config.n_estimators;
          j["max_depth"] = m.config.max_depth;
          j["min_samples_split"] = m.config.min_samples_split;
          j["feature_fraction"] = m.config.feature_fraction;
          j["seed"] = m.config.seed;
          j["n_features"] = m.n_features;
          j["trees"] = trees_to_json(m.trees);
        } else {
          j["kind"] = "gradient_boosting";
          j["n_iterations"] = m.config.n_iterations;
          j["max_depth"] = m.config.max_depth;
          j["min_samples_split"] = m.config.min_samples_split;
          j["learning_rate"] = m.config.learning_rate;
          j["seed"] = m.config.seed;
          j["n_features"] = m.n_features;
          j["init_value"] = m.init_value;
          j["trees"] = trees_to_json(m.trees);
        }
      },
      tm.model);
  return j;
}

TrainedModel model_from_json(const json& j) {
  TrainedModel tm;
  tm.features = j.at("features").get<std::vector<std::string>>();
  auto kind = parse_model_kind(j.at("kind").get<std::string>());
  switch (kind) {
    case ModelKind::kOls:
    case ModelKind::kRidge: {
      LinearModel m;
      m.kind = kind == ModelKind::kOls ? LinearKind::kOls : LinearKind::kRidge;
      m.alpha = j.at("alpha").get<double>();
      m.intercept = j.at("intercept").get<double>();
      m.coefficients = j.at("coefficients").get<std::vector<double>>();
      tm.model = std::move(m);
      break;
    }
    case ModelKind::kRandomForest: {
      ForestModel m;
      m.config.n_estimators = j.at("n_estimators").get<int>();
      m.config.max_depth = j.at("max_depth").get<int>();
      m.config.min_samples_split = j.at("min_samples_split").get<int>();
      m.config.feature_fraction = j.at("feature_fraction").get<double>();
      m.config.seed = j.at("seed").get<std::uint64_t>();
      m.n_features = j.at("n_features").get<std::size_t>();
      m.trees = trees_from_json(j.at("trees"));
      tm.model = std::move(m);
      break;
    }
    case ModelKind::kGradientBoosting: {
      BoostedModel m;
      m.config.n_iterations = j.at("n_iterations").get<int>();
      m.config.max_depth = j.at("max_depth").get<int>();
      m.config.min_samples_split = j.at("min_samples_split").get<int>();
      m.config.learning_rate = j.at("learning_rate").get<double>();
      m.config.seed = j.at("seed").get<std::uint64_t>();
      m.init_value = j.at("init_value").get<double>();
      m.n_features = j.at("n_features").get<std::size_t>();
      m.trees = trees_from_json(j.at("trees"));
      tm.model = std::move(m);
      break;
    }
  }
  return tm;
}

void save_model(const std::string& path, const TrainedModel& model) {
  write_file(path, model_to_json(model).dump(1) + "\n");
}

TrainedModel load_model(const std::string& path) {
  try {
    return model_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw Error(path + ": invalid model file: " + e.what());
  }
}

}  // namespace factorforge
