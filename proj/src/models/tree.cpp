#include "factorforge/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "factorforge/error.hpp"

namespace factorforge {

namespace {

using Index = std::uint32_t;
using SortedLists = std::vector<std::vector<Index>>;

// Splits whose gain is below this fraction of the node SSE are rounding noise.
constexpr double kRelativeGainTolerance = 1e-12;

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& X, std::span<const double> y, std::span<const double> w,
              const TreeConfig& cfg, Xoshiro256& rng)
      : X_(X), y_(y), w_(w), cfg_(cfg), rng_(rng), goes_left_(X.rows(), 0) {}

  RegressionTree build(std::vector<Index> rows, SortedLists sorted) {
    grow(std::move(rows), std::move(sorted), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<Index> rows, SortedLists sorted, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    double weight = 0.0, sum = 0.0;
    double y_min = y_[rows.front()], y_max = y_min;
    for (Index r : rows) {
      weight += w_[r];
      sum += w_[r] * y_[r];
      y_min = std::min(y_min, y_[r]);
      y_max = std::max(y_max, y_[r]);
    }
    const double mean = sum / weight;
    double sse = 0.0;
    for (Index r : rows) sse += w_[r] * (y_[r] - mean) * (y_[r] - mean);
    tree_.nodes[id].value = mean;
    tree_.nodes[id].n_samples = weight;

    if (depth >= cfg_.max_depth || weight < cfg_.min_samples_split || y_min == y_max) return id;

    auto split = best_split(sorted, candidate_features(), mean, weight, sse);
    if (split.feature < 0) return id;

    for (Index r : rows)
      goes_left_[r] = X_(r, static_cast<std::size_t>(split.feature)) <= split.threshold;
    std::vector<Index> left_rows, right_rows;
    for (Index r : rows) (goes_left_[r] ? left_rows : right_rows).push_back(r);
    SortedLists left_sorted(sorted.size()), right_sorted(sorted.size());
    for (std::size_t f = 0; f < sorted.size(); ++f) {
      left_sorted[f].reserve(left_rows.size());
      right_sorted[f].reserve(right_rows.size());
      for (Index r : sorted[f]) (goes_left_[r] ? left_sorted[f] : right_sorted[f]).push_back(r);
    }
    sorted.clear();
    sorted.shrink_to_fit();
    rows.clear();
    rows.shrink_to_fit();

    tree_.nodes[id].feature = split.feature;
    tree_.nodes[id].threshold = split.threshold;
    tree_.nodes[id].gain = split.gain;
    int left = grow(std::move(left_rows), std::move(left_sorted), depth + 1);
    int right = grow(std::move(right_rows), std::move(right_sorted), depth + 1);
    tree_.nodes[id].left = left;
    tree_.nodes[id].right = right;
    return id;
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t p = X_.cols();
    std::vector<std::size_t> features(p);
    std::iota(features.begin(), features.end(), std::size_t{0});
    if (cfg_.feature_fraction >= 1.0 || p == 0) return features;
    auto k = static_cast<std::size_t>(std::lround(cfg_.feature_fraction * static_cast<double>(p)));
    k = std::clamp<std::size_t>(k, 1, p);
    for (std::size_t i = 0; i < k; ++i) {
      auto j = i + static_cast<std::size_t>(rng_.bounded(p - i));
      std::swap(features[i], features[j]);
    }
    features.resize(k);
    std::sort(features.begin(), features.end());
    return features;
  }

  SplitChoice best_split(const SortedLists& sorted, const std::vector<std::size_t>& features,
                         double mean, double weight, double sse) const {
    SplitChoice best;
    const double min_gain = kRelativeGainTolerance * sse;
    for (std::size_t f : features) {
      const auto& order = sorted[f];
      double w_left = 0.0, s_left = 0.0;
      double s_total = 0.0;
      for (Index r : order) s_total += w_[r] * (y_[r] - mean);
      const double base = s_total * s_total / weight;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        Index r = order[i];
        w_left += w_[r];
        s_left += w_[r] * (y_[r] - mean);
        double x_here = X_(r, f);
        double x_next = X_(order[i + 1], f);
        if (!(x_here < x_next)) continue;
        double w_right = weight - w_left;
        double s_right = s_total - s_left;
        double gain = s_left * s_left / w_left + s_right * s_right / w_right - base;
        if (gain > best.gain && gain > min_gain) {
          double mid = x_here + (x_next - x_here) / 2.0;
          if (!(mid < x_next)) mid = x_here;
          best = {static_cast<int>(f), mid, gain};
        }
      }
    }
    return best;
  }

  const FeatureMatrix& X_;
  std::span<const double> y_;
  std::span<const double> w_;
  const TreeConfig& cfg_;
  Xoshiro256& rng_;
  std::vector<char> goes_left_;
  RegressionTree tree_;
};

}  // namespace

double RegressionTree::predict_row(std::span<const double> x) const {
  return nodes[static_cast<std::size_t>(leaf_index(x))].value;
}

int RegressionTree::leaf_index(std::span<const double> x) const {
  if (nodes.empty()) throw Error("empty tree");
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return i;
}

int RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

std::vector<std::vector<std::uint32_t>> presort_columns(const FeatureMatrix& X) {
  std::vector<std::vector<std::uint32_t>> sorted(X.cols());
  for (std::size_t f = 0; f < X.cols(); ++f) {
    auto& order = sorted[f];
    order.resize(X.rows());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return X(a, f) < X(b, f); });
  }
  return sorted;
}

RegressionTree fit_tree(const FeatureMatrix& X, std::span<const double> y, const TreeConfig& cfg,
                        Xoshiro256& rng) {
  std::vector<double> ones(X.rows(), 1.0);
  return fit_tree_weighted(X, y, ones, cfg, rng);
}

RegressionTree fit_tree_weighted(const FeatureMatrix& X, std::span<const double> y,
                                 std::span<const double> weights, const TreeConfig& cfg,
                                 Xoshiro256& rng,
                                 const std::vector<std::vector<std::uint32_t>>* presorted) {
  if (X.rows() != y.size() || weights.size() != y.size())
    throw Error("tree fit: feature rows, target and weight lengths differ");
  if (X.rows() > UINT32_MAX) throw Error("tree fit: too many rows");
  if (cfg.max_depth < 0) throw Error("tree fit: max_depth must be >= 0");

  std::vector<Index> rows;
  for (std::size_t r = 0; r < X.rows(); ++r)
    if (weights[r] > 0) rows.push_back(static_cast<Index>(r));
  if (rows.empty()) throw Error("tree fit needs at least one row");

  SortedLists local;
  if (presorted == nullptr) {
    local = presort_columns(X);
    presorted = &local;
  }
  SortedLists sorted(X.cols());
  for (std::size_t f = 0; f < X.cols(); ++f) {
    sorted[f].reserve(rows.size());
    for (Index r : (*presorted)[f])
      if (weights[r] > 0) sorted[f].push_back(r);
  }
  TreeBuilder builder(X, y, weights, cfg, rng);
  return builder.build(std::move(rows), std::move(sorted));
}

}  // namespace factorforge
