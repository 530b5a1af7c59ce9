#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "factorforge/models/matrix.hpp"
#include "factorforge/models/tree.hpp"

namespace factorforge {

struct ForestConfig {
  int n_estimators = 100;
  int max_depth = 5;
  int min_samples_split = 2;
  double feature_fraction = 1.0;
  std::uint64_t seed = 42;
};

struct ForestModel {
  ForestConfig config;
  std::size_t n_features = 0;
  std::vector<RegressionTree> trees;

  /// Mean of the tree outputs.
  double predict_row(std::span<const double> x) const;
};

/// Bagged CART forest. Tree i draws its bootstrap from Xoshiro256(derive_seed(seed, i)), so the
/// result is independent of how trees are scheduled across threads.
ForestModel fit_random_forest(const FeatureMatrix& X, std::span<const double> y,
                              const ForestConfig& cfg);

struct BoostingConfig {
  int n_iterations = 100;
  int max_depth = 3;
  int min_samples_split = 2;
  double learning_rate = 0.1;
  std::uint64_t seed = 42;
};

struct BoostedModel {
  BoostingConfig config;
  std::size_t n_features = 0;
  double init_value = 0.0;
  std::vector<RegressionTree> trees;
  /// Training MSE before any tree (index 0) and after each iteration.
  std::vector<double> training_loss;

  /// init_value + learning_rate * sum of tree outputs.
  double predict_row(std::span<const double> x) const;
};

/// Squared-error gradient boosting: each tree fits the current residuals on all rows.
BoostedModel fit_gradient_boosting(const FeatureMatrix& X, std::span<const double> y,
                                   const BoostingConfig& cfg);

}  // namespace factorforge
