#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factorforge/factors.hpp"
#include "factorforge/models/model.hpp"

#include <json.hpp>

namespace factorforge {

struct BacktestConfig {
  int train_months = 36;
  int test_months = 1;
  int top_k = 100;
  ModelSpec model;  // gradient boosting, 100 iterations, depth 3
  std::vector<std::string> features;

  void validate() const;
};

/// Calendar-month ranges of one walk-forward step, as Date::month_index values (half-open).
struct WindowSpec {
  std::size_t index = 0;
  int train_begin = 0;
  int train_end = 0;
  int test_begin = 0;
  int test_end = 0;
};

/// Windows advance by test_months from the first month present; windows whose test months hold
/// no dates are skipped. Throws when the span is shorter than train_months + test_months.
std::vector<WindowSpec> make_windows(std::span<const Date> sorted_dates, const BacktestConfig& cfg);

struct WindowResult {
  std::size_t index = 0;
  Date train_first, train_last, test_first, test_last;
  std::vector<Permno> members;
  double portfolio_return = 0.0;
  double benchmark_return = 0.0;
};

struct PortfolioStats {
  double mean = 0.0;
  std::optional<double> std_dev;  // sample; needs >= 2 returns
  std::optional<double> sharpe;   // mean / std, only when std > 0
  std::vector<double> cumulative;
};

PortfolioStats portfolio_stats(std::span<const double> returns);

struct BacktestReport {
  BacktestConfig config;
  std::vector<WindowResult> windows;
  PortfolioStats portfolio;
  PortfolioStats benchmark;

  nlohmann::json to_json() const;
  std::string curves_csv() const;
};

/// Scores test rows given training rows (both as indices into the panel).
using Scorer = std::function<std::vector<double>(const FactorPanel& fp,
                                                 std::span<const std::size_t> train_rows,
                                                 std::span<const std::size_t> test_rows)>;

/// Walk-forward backtest fitting cfg.model on cfg.features in every window.
BacktestReport run_backtest(const FactorPanel& fp, const BacktestConfig& cfg);

/// Same loop with a caller-supplied scorer (used for oracle and sanity harnesses).
BacktestReport run_backtest(const FactorPanel& fp, const BacktestConfig& cfg, const Scorer& scorer);

}  // namespace factorforge
