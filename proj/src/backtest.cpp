#include "factorforge/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "factorforge/dataset.hpp"
#include "factorforge/error.hpp"
#include "factorforge/parallel.hpp"
#include "factorforge/text.hpp"

namespace factorforge {

using nlohmann::json;

void BacktestConfig::validate() const {
  if (train_months < 1) throw Error("backtest train_months must be >= 1");
  if (test_months < 1) throw Error("backtest test_months must be >= 1");
  if (top_k < 1) throw Error("backtest top_k must be >= 1");
}

std::vector<WindowSpec> make_windows(std::span<const Date> sorted_dates, const BacktestConfig& cfg) {
  cfg.validate();
  if (sorted_dates.empty()) throw Error("backtest: no dates available");
  std::set<int> months;
  for (const auto& d : sorted_dates) months.insert(d.month_index());
  const int first = *months.begin();
  const int span = *months.rbegin() - first + 1;
  const int required = cfg.train_months + cfg.test_months;
  if (span < required)
    throw Error("insufficient history: backtest needs " + std::to_string(required) +
                " calendar months, data spans " + std::to_string(span));

  std::vector<WindowSpec> out;
  for (int start = first; start + required <= first + span; start += cfg.test_months) {
    WindowSpec w;
    w.train_begin = start;
    w.train_end = start + cfg.train_months;
    w.test_begin = w.train_end;
    w.test_end = w.test_begin + cfg.test_months;
    auto it = months.lower_bound(w.test_begin);
    if (it == months.end() || *it >= w.test_end) continue;
    w.index = out.size();
    out.push_back(w);
  }
  return out;
}

PortfolioStats portfolio_stats(std::span<const double> returns) {
  PortfolioStats s;
  if (returns.empty()) return s;
  double growth = 1.0;
  double sum = 0.0;
  for (double r : returns) {
    growth *= 1.0 + r;
    s.cumulative.push_back(growth - 1.0);
    sum += r;
  }
  const auto n = static_cast<double>(returns.size());
  s.mean = sum / n;
  if (returns.size() >= 2) {
    double ss = 0.0;
    for (double r : returns) ss += (r - s.mean) * (r - s.mean);
    s.std_dev = std::sqrt(ss / (n - 1.0));
    if (*s.std_dev > 0.0) s.sharpe = s.mean / *s.std_dev;
  }
  return s;
}

namespace {

std::vector<double> model_scores(const FactorPanel& fp, const BacktestConfig& cfg,
                                 std::span<const std::size_t> train_rows,
                                 std::span<const std::size_t> test_rows) {
  auto X_train = feature_matrix(fp, train_rows, cfg.features);
  auto y_train = target_values(fp, train_rows);
  auto model = fit_model(cfg.model, X_train, y_train);
  return predict(model, feature_matrix(fp, test_rows, cfg.features));
}

WindowResult evaluate_window(const FactorPanel& fp, const BacktestConfig& cfg, const WindowSpec& w,
                             const Scorer& scorer) {
  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t i = 0; i < fp.rows(); ++i) {
    const int m = fp.date[i].month_index();
    if (m >= w.train_begin && m < w.train_end) train_rows.push_back(i);
    if (m >= w.test_begin && m < w.test_end) test_rows.push_back(i);
  }
  if (train_rows.empty())
    throw Error("backtest window " + std::to_string(w.index) + " has no training rows");

  WindowResult r;
  r.index = w.index;
  auto date_of = [&](std::size_t i) { return fp.date[i]; };
  auto [tr_min, tr_max] = std::minmax_element(train_rows.begin(), train_rows.end(),
                                              [&](auto a, auto b) { return date_of(a) < date_of(b); });
  auto [te_min, te_max] = std::minmax_element(test_rows.begin(), test_rows.end(),
                                              [&](auto a, auto b) { return date_of(a) < date_of(b); });
  r.train_first = date_of(*tr_min);
  r.train_last = date_of(*tr_max);
  r.test_first = date_of(*te_min);
  r.test_last = date_of(*te_max);
  if (!(r.train_last < r.test_first))
    throw Error("point-in-time violation in backtest window " + std::to_string(w.index));

  auto scores = scorer(fp, train_rows, test_rows);
  if (scores.size() != test_rows.size()) throw Error("scorer returned the wrong number of scores");

  struct StockTest {
    Permno permno;
    double score;
    double realized;
  };
  // Panel rows are sorted by (permno, date), so a stock's first test row comes first here.
  std::map<Permno, std::pair<double, std::vector<double>>> per_stock;
  for (std::size_t k = 0; k < test_rows.size(); ++k) {
    const auto id = fp.permno[test_rows[k]];
    auto [it, inserted] = per_stock.try_emplace(id, scores[k], std::vector<double>{});
    it->second.second.push_back(fp.ret[test_rows[k]]);
  }
  std::vector<StockTest> stocks;
  for (const auto& [id, entry] : per_stock) {
    double sum = 0.0;
    for (double v : entry.second) sum += v;
    stocks.push_back({id, entry.first, sum / static_cast<double>(entry.second.size())});
  }
  std::stable_sort(stocks.begin(), stocks.end(), [](const StockTest& a, const StockTest& b) {
    return a.score != b.score ? a.score > b.score : a.permno < b.permno;
  });

  double bench = 0.0;
  for (const auto& s : stocks) bench += s.realized;
  r.benchmark_return = bench / static_cast<double>(stocks.size());

  const auto k = std::min(stocks.size(), static_cast<std::size_t>(cfg.top_k));
  double port = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    r.members.push_back(stocks[i].permno);
    port += stocks[i].realized;
  }
  r.portfolio_return = port / static_cast<double>(k);
  return r;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json stats_json(const PortfolioStats& s) {
  return {{"mean_return", s.mean},
          {"std_return", optional_number(s.std_dev)},
          {"sharpe", optional_number(s.sharpe)},
          {"sharpe_defined", s.sharpe.has_value()},
          {"cumulative_return", s.cumulative.empty() ? json(0.0) : json(s.cumulative.back())}};
}

}  // namespace

BacktestReport run_backtest(const FactorPanel& fp, const BacktestConfig& cfg) {
  if (cfg.features.empty()) throw Error("backtest: feature list is empty");
  for (const auto& f : cfg.features)
    if (fp.find(f) < 0) throw Error("backtest: feature \"" + f + "\" is not in the factor panel");
  return run_backtest(fp, cfg, [&cfg](const FactorPanel& p, std::span<const std::size_t> train,
                                      std::span<const std::size_t> test) {
    return model_scores(p, cfg, train, test);
  });
}

BacktestReport run_backtest(const FactorPanel& fp, const BacktestConfig& cfg, const Scorer& scorer) {
  cfg.validate();
  std::vector<Date> dates = fp.date;
  std::sort(dates.begin(), dates.end());
  dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
  auto specs = make_windows(dates, cfg);

  BacktestReport report;
  report.config = cfg;
  report.windows.resize(specs.size());
  parallel_for(specs.size(),
               [&](std::size_t i) { report.windows[i] = evaluate_window(fp, cfg, specs[i], scorer); });

  std::vector<double> port, bench;
  for (const auto& w : report.windows) {
    port.push_back(w.portfolio_return);
    bench.push_back(w.benchmark_return);
  }
  report.portfolio = portfolio_stats(port);
  report.benchmark = portfolio_stats(bench);
  return report;
}

json BacktestReport::to_json() const {
  json j;
  j["config"] = {{"train_months", config.train_months},
                 {"test_months", config.test_months},
                 {"top_k", config.top_k},
                 {"model", config.model.to_json()},
                 {"features", config.features},
                 {"benchmark", "equal-weight mean of all stocks in the test window"},
                 {"sharpe_convention", "per-window mean/std, risk-free 0, unannualized"}};
  json windows_json = json::array();
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    windows_json.push_back({{"window", w.index},
                            {"train_start", w.train_first.iso()},
                            {"train_end", w.train_last.iso()},
                            {"test_start", w.test_first.iso()},
                            {"test_end", w.test_last.iso()},
                            {"members", w.members},
                            {"portfolio_return", w.portfolio_return},
                            {"benchmark_return", w.benchmark_return},
                            {"cum_portfolio", portfolio.cumulative[i]},
                            {"cum_benchmark", benchmark.cumulative[i]}});
  }
  j["windows"] = windows_json;
  j["summary"] = {{"window_count", windows.size()},
                  {"portfolio", stats_json(portfolio)},
                  {"benchmark", stats_json(benchmark)}};
  return j;
}

std::string BacktestReport::curves_csv() const {
  std::string out = "window,end_date,portfolio_return,benchmark_return,cum_portfolio,cum_benchmark\n";
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    out += std::to_string(w.index) + ',' + w.test_last.iso() + ',' +
           format_number(w.portfolio_return) + ',' + format_number(w.benchmark_return) + ',' +
           format_number(portfolio.cumulative[i]) + ',' + format_number(benchmark.cumulative[i]) +
           '\n';
  }
  return out;
}

}  // namespace factorforge
