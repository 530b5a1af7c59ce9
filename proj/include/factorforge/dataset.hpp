#pragma once

#include <span>
#include <string>
#include <vector>

#include "factorforge/factors.hpp"
#include "factorforge/models/matrix.hpp"

namespace factorforge {

/// Row indices of a chronological split: the first `fraction` of distinct dates train, the rest test.
struct TimeSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  Date last_train_date;
};

/// At least one date lands on each side; throws when fewer than two distinct dates exist.
TimeSplit chronological_split(const FactorPanel& fp, double fraction);

/// Feature matrix of the given rows and named columns, in that order.
FeatureMatrix feature_matrix(const FactorPanel& fp, std::span<const std::size_t> rows,
                             std::span<const std::string> features);

std::vector<double> target_values(const FactorPanel& fp, std::span<const std::size_t> rows);

/// Per-column arithmetic means of X.
std::vector<double> column_means(const FeatureMatrix& X);

}  // namespace factorforge
