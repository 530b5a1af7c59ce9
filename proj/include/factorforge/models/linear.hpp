#pragma once

#include <span>
#include <vector>

#include "factorforge/models/matrix.hpp"

namespace factorforge {

enum class LinearKind { kOls, kRidge };

struct LinearModel {
  LinearKind kind = LinearKind::kOls;
  double alpha = 0.0;
  double intercept = 0.0;
  std::vector<double> coefficients;
  /// Set when the centered design was rank deficient and the minimum-norm solution was returned.
  bool rank_deficient = false;

  double predict_row(std::span<const double> x) const;
};

/// Least squares with an unpenalized intercept. Rank-deficient designs get the minimum-norm fit.
LinearModel fit_ols(const FeatureMatrix& X, std::span<const double> y);

/// Ridge: minimizes ||y - Xb - c||^2 + alpha ||b||^2 with the intercept c left unpenalized.
LinearModel fit_ridge(const FeatureMatrix& X, std::span<const double> y, double alpha);

}  // namespace factorforge
