#pragma once

#include <span>
#include <string>
#include <vector>

#include "factorforge/models/model.hpp"

namespace factorforge {

struct ImportanceReport {
  std::string method;  // "impurity" or "shap_mean_abs"
  std::vector<double> importance;
  bool degenerate = false;  // no split anywhere; all entries zero
};

/// Split gains credited to their features, each tree's gains scaled by 1/root cover, summed over
/// the ensemble and normalized to sum 1.
ImportanceReport impurity_importance(const Model& model);

struct ShapExplanation {
  double base_value = 0.0;
  std::vector<double> phi;
};

/// Path-dependent TreeSHAP for one tree: absent features follow the training cover split.
ShapExplanation tree_shap(const RegressionTree& tree, std::span<const double> x,
                          std::size_t n_features);

/// TreeSHAP aggregated by the ensemble's prediction formula. Throws for linear models.
ShapExplanation tree_shap(const Model& model, std::span<const double> x);

/// Exact Shapley values by subset enumeration under the same value function. Test oracle.
std::vector<double> brute_force_shapley(const RegressionTree& tree, std::span<const double> x,
                                        std::size_t n_features);

/// Cover-weighted mean output of a tree, i.e. its value with every feature absent.
double expected_value(const RegressionTree& tree);

/// phi_i = beta_i (x_i - mean_i), base = prediction at the feature means.
ShapExplanation linear_shap(const LinearModel& model, std::span<const double> x,
                            std::span<const double> feature_means);

struct FeatureRank {
  std::size_t feature = 0;
  double value = 0.0;
};

/// Mean |phi| per feature over the rows of X, sorted descending (ties by feature index).
/// `feature_means` is only consulted for linear models.
std::vector<FeatureRank> shap_summary(const Model& model, const FeatureMatrix& X,
                                      std::span<const double> feature_means = {});

/// Largest |base + sum(phi) - prediction| over the rows of X.
double max_local_accuracy_error(const Model& model, const FeatureMatrix& X,
                                std::span<const double> feature_means = {});

/// Sorts importances descending, ties by feature index.
std::vector<FeatureRank> rank_features(std::span<const double> values);

}  // namespace factorforge
