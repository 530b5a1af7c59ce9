#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "factorforge/models/ensemble.hpp"
#include "factorforge/models/linear.hpp"

#include <json.hpp>

namespace factorforge {

enum class ModelKind { kOls, kRidge, kRandomForest, kGradientBoosting };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Hyperparameters for any of the four regressors. Only the block matching `kind` is used.
struct ModelSpec {
  ModelKind kind = ModelKind::kGradientBoosting;
  double alpha = 1.0;
  ForestConfig forest;
  BoostingConfig boosting;

  /// Reads `{"kind": ..., <hyperparameters>}`; missing keys keep their defaults.
  static ModelSpec from_json(const nlohmann::json& j, std::uint64_t default_seed);
  nlohmann::json to_json() const;
};

using Model = std::variant<LinearModel, ForestModel, BoostedModel>;

/// A fitted model together with the feature names it expects, in column order.
struct TrainedModel {
  std::vector<std::string> features;
  Model model;
};

Model fit_model(const ModelSpec& spec, const FeatureMatrix& X, std::span<const double> y);

std::size_t feature_count(const Model& model);
double predict_row(const Model& model, std::span<const double> x);
/// One prediction per row; throws on a feature-count mismatch.
std::vector<double> predict(const Model& model, const FeatureMatrix& X);

struct EvalMetrics {
  double mse = 0.0;
  double r2 = 0.0;
  bool degenerate = false;  // zero target variance
};

EvalMetrics evaluate(std::span<const double> y_true, std::span<const double> y_pred);

nlohmann::json tree_to_json(const RegressionTree& tree);
RegressionTree tree_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

void save_model(const std::string& path, const TrainedModel& model);
TrainedModel load_model(const std::string& path);

}  // namespace factorforge
