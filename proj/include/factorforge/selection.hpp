#pragma once

#include <span>
#include <string>
#include <vector>

#include "factorforge/factors.hpp"
#include "factorforge/models/model.hpp"

#include <json.hpp>

namespace factorforge {

struct SelectionConfig {
  double target_corr_threshold = 0.1;
  double pairwise_corr_threshold = 0.75;
  int subset_size = 10;
  double split = 0.8;
  std::size_t max_combinations = 10000;
  ModelSpec scoring_model = default_scoring_model(42);

  static ModelSpec default_scoring_model(std::uint64_t seed);
  void validate() const;
};

struct PearsonResult {
  double r = 0.0;
  bool degenerate = false;  // a column had zero variance (or < 2 usable rows)
};

/// Pearson correlation over rows where both values are finite.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

struct TargetCorrelation {
  std::string factor;
  double abs_corr = 0.0;
  bool degenerate = false;
};

struct Layer1Result {
  std::vector<std::string> kept;
  std::vector<TargetCorrelation> dropped;
  std::vector<TargetCorrelation> stats;  // every candidate, in input order
};

/// Drops candidates with |corr(factor, ret)| above the threshold (pooled over all rows).
Layer1Result layer1_filter(const FactorPanel& fp, std::span<const std::string> candidates,
                           const SelectionConfig& cfg);

struct PairDrop {
  std::string dropped;
  std::string kept;
  double pair_corr = 0.0;
  double dropped_target_corr = 0.0;
  double kept_target_corr = 0.0;
};

struct Layer2Result {
  std::vector<std::string> low_corr_factors;
  std::vector<PairDrop> dropped;
};

/// Pairwise decorrelation in input order: for each pair above the threshold, the factor with the
/// smaller |target corr| goes (ties drop the later one).
Layer2Result layer2_decorrelate(const FactorPanel& fp, std::span<const std::string> kept,
                                const SelectionConfig& cfg);

struct SubsetResult {
  std::vector<std::string> best_subset;
  double best_score = 0.0;
  std::size_t evaluated_count = 0;
};

/// Number of k-subsets of n items, saturating at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k);

/// Scores every subset_size-combination (lexicographic) by held-out R^2 of the scoring model.
/// Combination c trains with seed (scoring seed XOR c).
SubsetResult subset_search(const FactorPanel& fp, std::span<const std::string> low_corr_factors,
                           const SelectionConfig& cfg);

struct SelectionReport {
  SelectionConfig config;
  Layer1Result layer1;
  Layer2Result layer2;
  SubsetResult subset;
  Date last_train_date;

  nlohmann::json to_json() const;
};

/// Layer 1, layer 2 and subset search over `candidates`.
SelectionReport run_selection(const FactorPanel& fp, std::span<const std::string> candidates,
                              const SelectionConfig& cfg);

}  // namespace factorforge
