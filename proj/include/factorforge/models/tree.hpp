#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "factorforge/models/matrix.hpp"
#include "factorforge/models/rng.hpp"

namespace factorforge {

/// Flat-array CART node. Leaves have feature == -1. Rows with x[feature] <= threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;      // mean training target of the rows reaching this node
  double n_samples = 0.0;  // training cover (bootstrap multiplicity counts)
  double gain = 0.0;       // weighted SSE decrease achieved by the split

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict_row(std::span<const double> x) const;
  /// Index of the leaf reached by `x`.
  int leaf_index(std::span<const double> x) const;
  /// Edges on the longest root-to-leaf path.
  int depth() const;
};

struct TreeConfig {
  int max_depth = 5;
  int min_samples_split = 2;
  double feature_fraction = 1.0;
};

/// Row indices of X sorted ascending by each column (ties by row index).
std::vector<std::vector<std::uint32_t>> presort_columns(const FeatureMatrix& X);

/// Greedy variance-reduction CART fit on unit-weight rows.
RegressionTree fit_tree(const FeatureMatrix& X, std::span<const double> y, const TreeConfig& cfg,
                        Xoshiro256& rng);

/// Same as fit_tree with integer multiplicity weights (0 = row absent). `presorted` may be
/// supplied to share the column sort across many trees on the same X.
RegressionTree fit_tree_weighted(const FeatureMatrix& X, std::span<const double> y,
                                 std::span<const double> weights, const TreeConfig& cfg,
                                 Xoshiro256& rng,
                                 const std::vector<std::vector<std::uint32_t>>* presorted = nullptr);

}  // namespace factorforge
