#include "factorforge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>

#include "factorforge/dataset.hpp"
#include "factorforge/error.hpp"
#include "factorforge/explain.hpp"
#include "factorforge/ingest.hpp"
#include "factorforge/svg.hpp"
#include "factorforge/text.hpp"

namespace factorforge {

using nlohmann::json;

namespace {

constexpr double kLocalAccuracyTolerance = 1e-9;

template <typename T>
void read_if(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

ModelSpec spec_with_kind(const json& j, ModelKind kind, std::uint64_t seed) {
  json copy = j.is_object() ? j : json::object();
  copy["kind"] = std::string(to_string(kind));
  return ModelSpec::from_json(copy, seed);
}

json factor_config_json(const FactorConfig& f) {
  return {{"momentum_lag", f.momentum_lag},
          {"momentum_ma_window", f.momentum_ma_window},
          {"long_ma_window", f.long_ma_window},
          {"volatility_window", f.volatility_window},
          {"spread_window", f.spread_window},
          {"rsi_window", f.rsi_window},
          {"smoothed_return_window", f.smoothed_return_window},
          {"short_momentum_lag", f.short_momentum_lag},
          {"long_momentum_lag", f.long_momentum_lag},
          {"volatility_slope_lag", f.volatility_slope_lag}};
}

std::vector<std::string> best_subset_from_report(const PipelineConfig& cfg) {
  const auto path = cfg.out("selection_report.json");
  if (!std::filesystem::exists(path))
    throw Error("no feature list configured and " + path + " not found; run `select` first");
  auto j = json::parse(read_file(path));
  return j.at("best_subset").get<std::vector<std::string>>();
}

std::string metrics_csv(const std::vector<std::pair<std::string, EvalMetrics>>& rows) {
  std::string out = "model,mse,r2\n";
  for (const auto& [name, m] : rows) out += name + ',' + format_number(m.mse) + ',' + format_number(m.r2) + '\n';
  return out;
}

std::string ranking_csv(const char* value_header, const std::vector<std::string>& names,
                        const std::vector<FeatureRank>& ranks) {
  std::string out = std::string("feature,") + value_header + ",rank\n";
  for (std::size_t i = 0; i < ranks.size(); ++i)
    out += names[ranks[i].feature] + ',' + format_number(ranks[i].value) + ',' + std::to_string(i + 1) + '\n';
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    read_if(p, "prices", c.prices_path);
    read_if(p, "membership", c.membership_path);
    read_if(p, "extra_features", c.extra_features_path);
    read_if(p, "out", c.out_dir);
  }
  read_if(j, "seed", c.seed);

  if (j.contains("factors")) {
    const auto& f = j.at("factors");
    read_if(f, "momentum_lag", c.factors.momentum_lag);
    read_if(f, "momentum_ma_window", c.factors.momentum_ma_window);
    read_if(f, "long_ma_window", c.factors.long_ma_window);
    read_if(f, "volatility_window", c.factors.volatility_window);
    read_if(f, "spread_window", c.factors.spread_window);
    read_if(f, "rsi_window", c.factors.rsi_window);
    read_if(f, "smoothed_return_window", c.factors.smoothed_return_window);
    read_if(f, "short_momentum_lag", c.factors.short_momentum_lag);
    read_if(f, "long_momentum_lag", c.factors.long_momentum_lag);
    read_if(f, "volatility_slope_lag", c.factors.volatility_slope_lag);
  }
  c.factors.validate();

  c.selection.scoring_model = SelectionConfig::default_scoring_model(c.seed);
  if (j.contains("selection")) {
    const auto& s = j.at("selection");
    read_if(s, "target_corr_threshold", c.selection.target_corr_threshold);
    read_if(s, "pairwise_corr_threshold", c.selection.pairwise_corr_threshold);
    read_if(s, "subset_size", c.selection.subset_size);
    read_if(s, "split", c.selection.split);
    read_if(s, "max_combinations", c.selection.max_combinations);
    if (s.contains("scoring_model")) {
      json sm = s.at("scoring_model");
      if (!sm.contains("kind")) sm["kind"] = "random_forest";
      if (sm.at("kind") == "random_forest" && !sm.contains("n_estimators")) sm["n_estimators"] = 25;
      c.selection.scoring_model = ModelSpec::from_json(sm, c.seed);
    }
  }
  c.selection.validate();

  const json models = j.value("models", json::object());
  c.ols = spec_with_kind(models.value("ols", json::object()), ModelKind::kOls, c.seed);
  c.ridge = spec_with_kind(models.value("ridge", json::object()), ModelKind::kRidge, c.seed);
  c.forest = spec_with_kind(models.value("random_forest", json::object()), ModelKind::kRandomForest, c.seed);
  c.boosting = spec_with_kind(models.value("gradient_boosting", json::object()),
                              ModelKind::kGradientBoosting, c.seed);

  if (j.contains("train")) {
    read_if(j.at("train"), "features", c.train_features);
    read_if(j.at("train"), "split", c.train_split);
  }
  if (!(c.train_split > 0.0 && c.train_split < 1.0)) throw Error("train.split must lie in (0, 1)");

  c.backtest.model = c.boosting;
  if (j.contains("backtest")) {
    const auto& b = j.at("backtest");
    read_if(b, "train_months", c.backtest.train_months);
    read_if(b, "test_months", c.backtest.test_months);
    read_if(b, "top_k", c.backtest.top_k);
    read_if(b, "features", c.backtest.features);
    if (b.contains("model")) c.backtest.model = ModelSpec::from_json(b.at("model"), c.seed);
  }
  c.backtest.validate();

  if (j.contains("explain")) {
    read_if(j.at("explain"), "model", c.explain_model);
    read_if(j.at("explain"), "max_rows", c.explain_max_rows);
  }
  parse_model_kind(c.explain_model);
  return c;
}

json PipelineConfig::to_json() const {
  return {{"paths",
           {{"prices", prices_path},
            {"membership", membership_path},
            {"extra_features", extra_features_path},
            {"out", out_dir}}},
          {"seed", seed},
          {"factors", factor_config_json(factors)},
          {"selection",
           {{"target_corr_threshold", selection.target_corr_threshold},
            {"pairwise_corr_threshold", selection.pairwise_corr_threshold},
            {"subset_size", selection.subset_size},
            {"split", selection.split},
            {"max_combinations", selection.max_combinations},
            {"scoring_model", selection.scoring_model.to_json()}}},
          {"models",
           {{"ols", ols.to_json()},
            {"ridge", ridge.to_json()},
            {"random_forest", forest.to_json()},
            {"gradient_boosting", boosting.to_json()}}},
          {"train", {{"features", train_features}, {"split", train_split}}},
          {"backtest",
           {{"train_months", backtest.train_months},
            {"test_months", backtest.test_months},
            {"top_k", backtest.top_k},
            {"features", backtest.features},
            {"model", backtest.model.to_json()}}},
          {"explain", {{"model", explain_model}, {"max_rows", explain_max_rows}}}};
}

std::string PipelineConfig::out(const std::string& file) const {
  return (std::filesystem::path(out_dir) / file).string();
}

PipelineConfig load_pipeline_config(const std::string& path, std::optional<std::uint64_t> seed,
                                    std::optional<std::string> out_dir) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(path + ": invalid JSON config: " + e.what());
  }
  if (seed) j["seed"] = *seed;
  if (out_dir) j["paths"]["out"] = *out_dir;
  try {
    return PipelineConfig::from_json(j);
  } catch (const json::exception& e) {
    throw Error(path + ": bad config value: " + e.what());
  }
}

StageResult cmd_ingest(const PipelineConfig& cfg, std::ostream& log) {
  if (cfg.prices_path.empty() || cfg.membership_path.empty())
    throw Error("paths.prices and paths.membership must be set");
  auto prices = load_prices_csv(cfg.prices_path);
  auto membership = load_membership_csv(cfg.membership_path);
  log << "ingest: loaded " << prices.rows.size() << " price rows, " << membership.size()
      << " membership rows\n";
  if (membership.empty()) log << "ingest: warning: membership list is empty; no rows survive\n";
  auto merged = merge_and_filter(prices, membership);
  log << "ingest: " << merged.rows.size() << " rows inside membership windows\n";
  const auto missing = count_missing(merged);
  auto cleaned = clean(merged);
  log << "ingest: cleaned " << cleaned.rows.size() << " rows (" << missing
      << " missing or infinite cells imputed)\n";
  write_file(cfg.out("panel.csv"), write_prices_csv(cleaned));
  return {"ingest", {"panel.csv"}};
}

StageResult cmd_factors(const PipelineConfig& cfg, std::ostream& log) {
  const auto panel_path = cfg.out("panel.csv");
  if (!std::filesystem::exists(panel_path))
    throw Error(panel_path + " not found; run `ingest` first");
  auto panel = parse_prices_csv(read_file(panel_path), panel_path);
  auto fp = compute_base_factors(panel, cfg.factors);
  compute_interaction_factors(fp, cfg.factors);
  if (!cfg.extra_features_path.empty())
    merge_extra_columns(fp, read_file(cfg.extra_features_path), cfg.extra_features_path);
  finalize(fp);
  write_file(cfg.out("factors.csv"), write_factor_csv(fp));
  log << "factors: " << fp.columns.size() << " factor columns over " << fp.rows() << " rows\n";
  return {"factors", {"factors.csv"}};
}

StageResult cmd_select(const PipelineConfig& cfg, std::ostream& log) {
  auto fp = load_factor_csv(cfg.out("factors.csv"));
  auto report = run_selection(fp, fp.names, cfg.selection);
  write_file(cfg.out("selection_report.json"), report.to_json().dump(2) + "\n");
  log << "select: layer 1 kept " << report.layer1.kept.size() << ", dropped "
      << report.layer1.dropped.size() << " (|corr with ret| > " << cfg.selection.target_corr_threshold
      << ")\n";
  for (const auto& d : report.layer1.dropped) log << "  - " << d.factor << " |corr|=" << d.abs_corr << "\n";
  log << "select: layer 2 kept " << report.layer2.low_corr_factors.size() << ", dropped "
      << report.layer2.dropped.size() << " (pairwise |corr| > " << cfg.selection.pairwise_corr_threshold
      << ")\n";
  for (const auto& d : report.layer2.dropped)
    log << "  - " << d.dropped << " (kept " << d.kept << ", |corr|=" << d.pair_corr << ")\n";
  log << "select: scored " << report.subset.evaluated_count << " combinations; best R^2 "
      << report.subset.best_score << " with:";
  for (const auto& f : report.subset.best_subset) log << ' ' << f;
  log << "\n";
  return {"select", {"selection_report.json"}};
}

StageResult cmd_train(const PipelineConfig& cfg, std::ostream& log) {
  auto fp = load_factor_csv(cfg.out("factors.csv"));
  auto features = cfg.train_features.empty() ? best_subset_from_report(cfg) : cfg.train_features;
  if (features.empty()) throw Error("train: feature list is empty");
  auto split = chronological_split(fp, cfg.train_split);
  auto X_train = feature_matrix(fp, split.train, features);
  auto X_test = feature_matrix(fp, split.test, features);
  auto y_train = target_values(fp, split.train);
  auto y_test = target_values(fp, split.test);

  StageResult result{"train", {}};
  std::vector<std::pair<std::string, EvalMetrics>> metrics;
  log << "train: " << split.train.size() << " train rows (through " << split.last_train_date.iso()
      << "), " << split.test.size() << " test rows, " << features.size() << " features\n";
  for (const ModelSpec* spec : {&cfg.ols, &cfg.ridge, &cfg.forest, &cfg.boosting}) {
    TrainedModel tm{features, fit_model(*spec, X_train, y_train)};
    const std::string name(to_string(spec->kind));
    const std::string file = "models/" + name + ".json";
    save_model(cfg.out(file), tm);
    result.artifacts.push_back(file);
    auto m = evaluate(y_test, predict(tm.model, X_test));
    metrics.emplace_back(name, m);
    log << "  " << name << "  MSE: " << m.mse << ", R2: " << m.r2 << "\n";
  }
  write_file(cfg.out("metrics.csv"), metrics_csv(metrics));
  result.artifacts.push_back("metrics.csv");
  return result;
}

StageResult cmd_explain(const PipelineConfig& cfg, const std::string& model_path, std::ostream& log) {
  const auto path = model_path.empty() ? cfg.out("models/" + cfg.explain_model + ".json") : model_path;
  auto tm = load_model(path);
  auto fp = load_factor_csv(cfg.out("factors.csv"));
  auto split = chronological_split(fp, cfg.train_split);
  std::vector<std::size_t> rows = split.test;
  if (rows.size() > cfg.explain_max_rows) rows.resize(cfg.explain_max_rows);
  auto X_eval = feature_matrix(fp, rows, tm.features);
  const auto feature_means = column_means(feature_matrix(fp, split.train, tm.features));

  const bool linear = std::holds_alternative<LinearModel>(tm.model);
  if (linear)
    log << "explain: linear model; using linear attributions beta_i * (x_i - mean_i) instead of TreeSHAP\n";
  auto shap = shap_summary(tm.model, X_eval, feature_means);
  const double err = max_local_accuracy_error(tm.model, X_eval, feature_means);
  const bool ok = err < kLocalAccuracyTolerance;
  log << "explain: local accuracy max |base + sum(phi) - prediction| = " << err << " over "
      << rows.size() << " held-out rows: " << (ok ? "pass" : "FAIL") << "\n";
  if (!ok) throw Error("local accuracy check failed");

  std::vector<FeatureRank> importance;
  if (linear) {
    std::vector<double> mass(tm.features.size(), 0.0);
    double total = 0.0;
    for (const auto& r : shap) total += r.value;
    for (const auto& r : shap) mass[r.feature] = total > 0.0 ? r.value / total : 0.0;
    importance = rank_features(mass);
    log << "explain: importance.csv holds normalized mean |phi| (no impurity for linear models)\n";
  } else {
    importance = rank_features(impurity_importance(tm.model).importance);
  }
  write_file(cfg.out("importance.csv"), ranking_csv("importance", tm.features, importance));
  write_file(cfg.out("shap_summary.csv"), ranking_csv("mean_abs_shap", tm.features, shap));

  std::vector<std::string> labels;
  std::vector<double> values;
  for (const auto& r : shap) {
    labels.push_back(tm.features[r.feature]);
    values.push_back(r.value);
  }
  write_file(cfg.out("shap_summary.svg"), bar_chart_svg("Mean |SHAP value| per feature", labels, values));
  log << "explain: top feature by mean |SHAP|: " << tm.features[shap.front().feature]
      << "; by importance: " << tm.features[importance.front().feature] << "\n";
  return {"explain", {"importance.csv", "shap_summary.csv", "shap_summary.svg"}};
}

StageResult cmd_backtest(const PipelineConfig& cfg, std::ostream& log) {
  auto fp = load_factor_csv(cfg.out("factors.csv"));
  BacktestConfig bt = cfg.backtest;
  if (bt.features.empty()) bt.features = best_subset_from_report(cfg);
  auto report = run_backtest(fp, bt);
  write_file(cfg.out("backtest_report.json"), report.to_json().dump(2) + "\n");
  write_file(cfg.out("backtest_curves.csv"), report.curves_csv());
  std::vector<std::string> labels;
  for (const auto& w : report.windows) labels.push_back(w.test_last.iso());
  write_file(cfg.out("backtest_curves.svg"),
             line_chart_svg("Cumulative return: strategy vs benchmark", labels, "Portfolio",
                            report.portfolio.cumulative, "Benchmark (all stocks)",
                            report.benchmark.cumulative));
  log << "backtest: " << report.windows.size() << " windows; portfolio mean " << report.portfolio.mean;
  if (report.portfolio.std_dev) log << ", std " << *report.portfolio.std_dev;
  if (report.portfolio.sharpe) {
    log << ", sharpe " << *report.portfolio.sharpe;
  } else {
    log << ", sharpe undefined";
  }
  log << "; benchmark mean " << report.benchmark.mean << "\n";
  return {"backtest", {"backtest_report.json", "backtest_curves.csv", "backtest_curves.svg"}};
}

StageResult cmd_run_all(const PipelineConfig& cfg, std::ostream& log) {
  std::vector<StageResult> stages;
  auto run = [&](const std::string& name, auto&& fn) {
    try {
      stages.push_back(fn());
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  };
  run("ingest", [&] { return cmd_ingest(cfg, log); });
  run("factors", [&] { return cmd_factors(cfg, log); });
  run("select", [&] { return cmd_select(cfg, log); });
  run("train", [&] { return cmd_train(cfg, log); });
  run("explain", [&] { return cmd_explain(cfg, "", log); });
  run("backtest", [&] { return cmd_backtest(cfg, log); });

  json summary;
  summary["version"] = kVersion;
  summary["seed"] = cfg.seed;
  summary["config_hash"] = fnv1a_hex(cfg.to_json().dump());
  json stage_list = json::array();
  for (const auto& s : stages) {
    json artifacts = json::array();
    for (const auto& a : s.artifacts)
      artifacts.push_back({{"path", a}, {"fnv1a", fnv1a_hex(read_file(cfg.out(a)))}});
    stage_list.push_back({{"stage", s.stage}, {"artifacts", artifacts}});
  }
  summary["stages"] = stage_list;
  write_file(cfg.out("summary.json"), summary.dump(2) + "\n");
  log << "run-all: all " << stages.size() << " stages succeeded; summary hash "
      << fnv1a_hex(summary.dump()) << "\n";
  return {"run-all", {"summary.json"}};
}

}  // namespace factorforge
