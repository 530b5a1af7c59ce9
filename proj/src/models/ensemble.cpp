#include "factorforge/models/ensemble.hpp"

#include "factorforge/error.hpp"
#include "factorforge/parallel.hpp"

namespace factorforge {

namespace {

double mean_squared(std::span<const double> y, std::span<const double> pred) {
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += (y[i] - pred[i]) * (y[i] - pred[i]);
  return sum / static_cast<double>(y.size());
}

}  // namespace

double ForestModel::predict_row(std::span<const double> x) const {
  if (trees.empty()) throw Error("forest has no trees");
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict_row(x);
  return sum / static_cast<double>(trees.size());
}

ForestModel fit_random_forest(const FeatureMatrix& X, std::span<const double> y,
                              const ForestConfig& cfg) {
  if (X.rows() == 0 || X.rows() != y.size()) throw Error("forest fit: bad training shape");
  if (cfg.n_estimators < 1) throw Error("forest fit: n_estimators must be >= 1");
  const auto presorted = presort_columns(X);
  const TreeConfig tree_cfg{cfg.max_depth, cfg.min_samples_split, cfg.feature_fraction};
  ForestModel model;
  model.config = cfg;
  model.n_features = X.cols();
  model.trees.resize(static_cast<std::size_t>(cfg.n_estimators));
  const std::size_t n = X.rows();
  parallel_for(model.trees.size(), [&](std::size_t i) {
    Xoshiro256 rng(derive_seed(cfg.seed, i));
    std::vector<double> counts(n, 0.0);
    for (std::size_t draw = 0; draw < n; ++draw) counts[rng.bounded(n)] += 1.0;
    model.trees[i] = fit_tree_weighted(X, y, counts, tree_cfg, rng, &presorted);
  });
  return model;
}

double BoostedModel::predict_row(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict_row(x);
  return init_value + config.learning_rate * sum;
}

BoostedModel fit_gradient_boosting(const FeatureMatrix& X, std::span<const double> y,
                                   const BoostingConfig& cfg) {
  if (X.rows() == 0 || X.rows() != y.size()) throw Error("boosting fit: bad training shape");
  if (cfg.n_iterations < 0) throw Error("boosting fit: n_iterations must be >= 0");
  if (!(cfg.learning_rate > 0.0)) throw Error("boosting fit: learning_rate must be > 0");
  const std::size_t n = X.rows();
  BoostedModel model;
  model.config = cfg;
  model.n_features = X.cols();
  double sum = 0.0;
  for (double v : y) sum += v;
  model.init_value = sum / static_cast<double>(n);

  const auto presorted = presort_columns(X);
  const std::vector<double> ones(n, 1.0);
  const TreeConfig tree_cfg{cfg.max_depth, cfg.min_samples_split, 1.0};
  // No subsampling, so the generator is never consulted; it only satisfies the tree API.
  Xoshiro256 rng(cfg.seed);

  std::vector<double> pred(n, model.init_value), residual(n);
  model.training_loss.push_back(mean_squared(y, pred));
  for (int it = 0; it < cfg.n_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];
    auto tree = fit_tree_weighted(X, residual, ones, tree_cfg, rng, &presorted);
    for (std::size_t i = 0; i < n; ++i) pred[i] += cfg.learning_rate * tree.predict_row(X.row(i));
    model.trees.push_back(std::move(tree));
    model.training_loss.push_back(mean_squared(y, pred));
  }
  return model;
}

}  // namespace factorforge
