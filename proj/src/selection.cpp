#include "factorforge/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "factorforge/dataset.hpp"
#include "factorforge/error.hpp"
#include "factorforge/parallel.hpp"

namespace factorforge {

using nlohmann::json;

ModelSpec SelectionConfig::default_scoring_model(std::uint64_t seed) {
  ModelSpec spec;
  spec.kind = ModelKind::kRandomForest;
  spec.forest.n_estimators = 25;
  spec.forest.max_depth = 5;
  spec.forest.seed = seed;
  spec.boosting.seed = seed;
  return spec;
}

void SelectionConfig::validate() const {
  if (!(target_corr_threshold > 0.0 && target_corr_threshold < 1.0))
    throw Error("target_corr_threshold must lie in (0, 1)");
  if (!(pairwise_corr_threshold > 0.0 && pairwise_corr_threshold < 1.0))
    throw Error("pairwise_corr_threshold must lie in (0, 1)");
  if (subset_size < 1) throw Error("subset_size must be >= 1");
  if (!(split > 0.0 && split < 1.0)) throw Error("split must lie in (0, 1)");
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson: length mismatch");
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    sx += x[i];
    sy += y[i];
    ++n;
  }
  if (n < 2) return {0.0, true};
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

Layer1Result layer1_filter(const FactorPanel& fp, std::span<const std::string> candidates,
                           const SelectionConfig& cfg) {
  cfg.validate();
  Layer1Result out;
  for (const auto& name : candidates) {
    auto pr = pearson(fp.column(name), fp.ret);
    TargetCorrelation tc{name, std::fabs(pr.r), pr.degenerate};
    out.stats.push_back(tc);
    if (tc.abs_corr > cfg.target_corr_threshold) {
      out.dropped.push_back(tc);
    } else {
      out.kept.push_back(name);
    }
  }
  return out;
}

Layer2Result layer2_decorrelate(const FactorPanel& fp, std::span<const std::string> kept,
                                const SelectionConfig& cfg) {
  cfg.validate();
  const std::size_t n = kept.size();
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = std::fabs(pearson(fp.column(kept[i]), fp.ret).r);

  std::vector<bool> alive(n, true);
  Layer2Result out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n && alive[i]; ++j) {
      if (!alive[j]) continue;
      const double c = std::fabs(pearson(fp.column(kept[i]), fp.column(kept[j])).r);
      if (!(c > cfg.pairwise_corr_threshold)) continue;
      const bool drop_i = target[i] < target[j];
      const std::size_t loser = drop_i ? i : j;
      const std::size_t winner = drop_i ? j : i;
      alive[loser] = false;
      out.dropped.push_back({kept[loser], kept[winner], c, target[loser], target[winner]});
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (alive[i]) out.low_corr_factors.push_back(kept[i]);
  return out;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    // result * (n - k + i) / i stays integral at every step
    const std::size_t num = n - k + i;
    if (result > std::numeric_limits<std::size_t>::max() / num)
      return std::numeric_limits<std::size_t>::max();
    result = result * num / i;
  }
  return result;
}

namespace {

std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < k; ++i) idx[i] = idx[i - 1] + 1;
  }
  return out;
}

FeatureMatrix select_columns(const FeatureMatrix& X, const std::vector<std::size_t>& cols) {
  FeatureMatrix out(X.rows(), cols.size());
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = X(i, cols[j]);
  return out;
}

ModelSpec with_seed(ModelSpec spec, std::uint64_t seed) {
  spec.forest.seed = seed;
  spec.boosting.seed = seed;
  return spec;
}

}  // namespace

SubsetResult subset_search(const FactorPanel& fp, std::span<const std::string> low_corr_factors,
                           const SelectionConfig& cfg) {
  cfg.validate();
  const std::size_t n = low_corr_factors.size();
  if (n == 0) throw Error("subset search needs at least one factor");
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(cfg.subset_size), n);
  const std::size_t count = binomial(n, k);
  if (count > cfg.max_combinations)
    throw Error("subset search would score " +
                (count == std::numeric_limits<std::size_t>::max() ? std::string("too many")
                                                                   : std::to_string(count)) +
                " combinations, above the budget of " + std::to_string(cfg.max_combinations) +
                "; raise selection.max_combinations or shrink the factor pool");

  auto split = chronological_split(fp, cfg.split);
  const std::vector<std::string> names(low_corr_factors.begin(), low_corr_factors.end());
  const auto X_train = feature_matrix(fp, split.train, names);
  const auto X_test = feature_matrix(fp, split.test, names);
  const auto y_train = target_values(fp, split.train);
  const auto y_test = target_values(fp, split.test);
  if (y_test.size() < 2) throw Error("subset search: test split needs at least two rows");

  const auto combos = combinations(n, k);
  const std::uint64_t base_seed = cfg.scoring_model.kind == ModelKind::kRandomForest
                                      ? cfg.scoring_model.forest.seed
                                      : cfg.scoring_model.boosting.seed;
  std::vector<double> scores(combos.size());
  parallel_for(combos.size(), [&](std::size_t c) {
    auto spec = with_seed(cfg.scoring_model, base_seed ^ static_cast<std::uint64_t>(c));
    auto model = fit_model(spec, select_columns(X_train, combos[c]), y_train);
    auto pred = predict(model, select_columns(X_test, combos[c]));
    scores[c] = evaluate(y_test, pred).r2;
  });

  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  SubsetResult out;
  for (std::size_t i : combos[best]) out.best_subset.push_back(names[i]);
  out.best_score = scores[best];
  out.evaluated_count = combos.size();
  return out;
}

json SelectionReport::to_json() const {
  json j;
  j["config"] = {{"target_corr_threshold", config.target_corr_threshold},
                 {"pairwise_corr_threshold", config.pairwise_corr_threshold},
                 {"subset_size", config.subset_size},
                 {"split", config.split},
                 {"split_kind", "chronological"},
                 {"last_train_date", last_train_date.iso()},
                 {"max_combinations", config.max_combinations},
                 {"scoring_model", config.scoring_model.to_json()}};
  json stats = json::array();
  for (const auto& s : layer1.stats)
    stats.push_back({{"factor", s.factor}, {"abs_target_corr", s.abs_corr}, {"degenerate", s.degenerate}});
  json dropped1 = json::array();
  for (const auto& s : layer1.dropped)
    dropped1.push_back({{"factor", s.factor}, {"abs_target_corr", s.abs_corr}});
  j["layer1"] = {{"kept", layer1.kept}, {"dropped", dropped1}, {"target_correlations", stats}};
  json dropped2 = json::array();
  for (const auto& d : layer2.dropped)
    dropped2.push_back({{"factor", d.dropped},
                        {"kept_partner", d.kept},
                        {"abs_pair_corr", d.pair_corr},
                        {"abs_target_corr", d.dropped_target_corr},
                        {"partner_abs_target_corr", d.kept_target_corr}});
  j["layer2"] = {{"low_corr_factors", layer2.low_corr_factors}, {"dropped", dropped2}};
  j["best_subset"] = subset.best_subset;
  j["best_score"] = subset.best_score;
  j["evaluated_count"] = subset.evaluated_count;
  return j;
}

SelectionReport run_selection(const FactorPanel& fp, std::span<const std::string> candidates,
                              const SelectionConfig& cfg) {
  SelectionReport report;
  report.config = cfg;
  report.layer1 = layer1_filter(fp, candidates, cfg);
  report.layer2 = layer2_decorrelate(fp, report.layer1.kept, cfg);
  if (report.layer2.low_corr_factors.empty())
    throw Error("every factor was removed by the correlation filters; nothing left to score");
  report.last_train_date = chronological_split(fp, cfg.split).last_train_date;
  report.subset = subset_search(fp, report.layer2.low_corr_factors, cfg);
  return report;
}

}  // namespace factorforge
