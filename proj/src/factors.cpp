#include "factorforge/factors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>

#include "factorforge/error.hpp"
#include "factorforge/rolling.hpp"
#include "factorforge/text.hpp"

namespace factorforge {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

double safe_div(double num, double den) { return den == 0.0 ? kMissing : num / den; }

using Series = std::vector<double>;

std::span<const double> slice(const Series& s, const GroupRange& g) {
  return std::span<const double>(s).subspan(g.begin, g.end - g.begin);
}

void store(Series& column, const GroupRange& g, const Series& values) {
  std::copy(values.begin(), values.end(), column.begin() + static_cast<std::ptrdiff_t>(g.begin));
}

}  // namespace

void FactorConfig::validate() const {
  for (int v : {momentum_lag, momentum_ma_window, long_ma_window, volatility_window, spread_window,
                rsi_window, smoothed_return_window, short_momentum_lag, long_momentum_lag,
                volatility_slope_lag})
    if (v < 1) throw Error("factor windows and lags must be >= 1");
}

int FactorPanel::find(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

const std::vector<double>& FactorPanel::column(std::string_view name) const {
  int idx = find(name);
  if (idx < 0) throw Error("unknown factor column: " + std::string(name));
  return columns[static_cast<std::size_t>(idx)];
}

void FactorPanel::add_column(std::string name, std::vector<double> values) {
  if (values.size() != rows()) throw Error("column length mismatch for " + name);
  if (find(name) >= 0) throw Error("duplicate factor column: " + name);
  names.push_back(std::move(name));
  columns.push_back(std::move(values));
}

std::vector<GroupRange> FactorPanel::groups() const {
  std::vector<GroupRange> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= rows(); ++i) {
    if (i == rows() || permno[i] != permno[begin]) {
      out.push_back({permno[begin], begin, i});
      begin = i;
    }
  }
  if (rows() == 0) out.clear();
  return out;
}

FactorPanel FactorPanel::select_rows(std::span<const std::size_t> rows) const {
  FactorPanel out;
  out.names = names;
  out.columns.resize(columns.size());
  for (std::size_t r : rows) {
    out.permno.push_back(permno[r]);
    out.date.push_back(date[r]);
    out.ret.push_back(ret[r]);
    if (!prc.empty()) out.prc.push_back(prc[r]);
    for (std::size_t c = 0; c < columns.size(); ++c) out.columns[c].push_back(columns[c][r]);
  }
  return out;
}

const std::vector<std::string>& factor_catalog() {
  static const std::vector<std::string> kCatalog{
      "MarketCap",
      "Momentum",
      "PriceReturn",
      "MomentumChange",
      "MomentumMA",
      "LogMarketCap",
      "AmihudIlliquidity",
      "TurnoverRatio",
      "RollingVolatility",
      "HighLowSpread",
      "RSI",
      "MovingAverage",
      "ShortMomentum",
      "LongMomentum",
      "MomentumVsMarketCap",
      "VolatilityTurnover",
      "MomentumLiquidity",
      "MarketCapAdjMomentum",
      "MomentumMADeviation",
      "NormalizedHighLowSpread",
      "MomentumRSI",
      "SmoothedReturn",
      "VolatilityAdjustedReturn",
      "VolatilitySlope",
      "VolatilityDynamics",
      "LiquidityStress",
      "TrendStrength",
      "RiskAdjustedMomentum",
      "AbnormalBehavior",
      "MeanReversion",
      "MultiPeriodMomentum",
  };
  return kCatalog;
}

FactorPanel compute_base_factors(const Panel& panel, const FactorConfig& cfg) {
  cfg.validate();
  const std::size_t n = panel.rows.size();
  FactorPanel fp;
  fp.permno.reserve(n);
  Series p(n), r(n), v(n), s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = panel.rows[i];
    fp.permno.push_back(row.permno);
    fp.date.push_back(row.date);
    fp.ret.push_back(row.ret);
    p[i] = row.prc;
    r[i] = row.ret;
    v[i] = row.vol;
    s[i] = row.shrout;
  }
  fp.prc = p;

  Series market_cap(n), momentum(n), price_return(n), momentum_change(n), momentum_ma(n),
      log_market_cap(n), amihud(n), turnover(n), volatility(n), spread(n), rsi_col(n), moving_avg(n),
      short_mom(n), long_mom(n);

  for (const auto& g : group_ranges(panel)) {
    auto gp = slice(p, g);
    auto gv = slice(v, g);
    auto gs = slice(s, g);
    const std::size_t len = g.end - g.begin;

    Series mc(len), lmc(len), ami(len), turn(len), hl(len);
    auto dp = diff(gp, 1);
    auto low = rolling_stat(gp, cfg.spread_window, RollingStat::kMin);
    for (std::size_t t = 0; t < len; ++t) {
      mc[t] = std::fabs(gp[t]) * gs[t];
      lmc[t] = std::log1p(mc[t]);
      ami[t] = safe_div(std::fabs(dp[t]), gv[t]);
      turn[t] = safe_div(gv[t], gs[t]);
      hl[t] = gp[t] - low[t];
    }
    auto mom = pct_change(gp, cfg.momentum_lag);

    store(market_cap, g, mc);
    store(momentum, g, mom);
    store(price_return, g, pct_change(gp, 1));
    store(momentum_change, g, diff(mom, 1));
    store(momentum_ma, g, rolling_stat(mom, cfg.momentum_ma_window, RollingStat::kMean));
    store(log_market_cap, g, lmc);
    store(amihud, g, ami);
    store(turnover, g, turn);
    store(volatility, g, rolling_stat(slice(r, g), cfg.volatility_window, RollingStat::kStd));
    store(spread, g, hl);
    store(rsi_col, g, rsi(gp, cfg.rsi_window));
    store(moving_avg, g, rolling_stat(gp, cfg.long_ma_window, RollingStat::kMean));
    store(short_mom, g, pct_change(gp, cfg.short_momentum_lag));
    store(long_mom, g, pct_change(gp, cfg.long_momentum_lag));
  }

  fp.add_column("MarketCap", std::move(market_cap));
  fp.add_column("Momentum", std::move(momentum));
  fp.add_column("PriceReturn", std::move(price_return));
  fp.add_column("MomentumChange", std::move(momentum_change));
  fp.add_column("MomentumMA", std::move(momentum_ma));
  fp.add_column("LogMarketCap", std::move(log_market_cap));
  fp.add_column("AmihudIlliquidity", std::move(amihud));
  fp.add_column("TurnoverRatio", std::move(turnover));
  fp.add_column("RollingVolatility", std::move(volatility));
  fp.add_column("HighLowSpread", std::move(spread));
  fp.add_column("RSI", std::move(rsi_col));
  fp.add_column("MovingAverage", std::move(moving_avg));
  fp.add_column("ShortMomentum", std::move(short_mom));
  fp.add_column("LongMomentum", std::move(long_mom));
  return fp;
}

void compute_interaction_factors(FactorPanel& fp, const FactorConfig& cfg) {
  cfg.validate();
  if (fp.prc.size() != fp.rows()) throw Error("interaction factors need the price column");
  const std::size_t n = fp.rows();
  const auto& p = fp.prc;
  const Series mom = fp.column("Momentum");
  const Series pr = fp.column("PriceReturn");
  const Series mc = fp.column("MarketCap");
  const Series lmc = fp.column("LogMarketCap");
  const Series ami = fp.column("AmihudIlliquidity");
  const Series turn = fp.column("TurnoverRatio");
  const Series vol = fp.column("RollingVolatility");
  const Series hl = fp.column("HighLowSpread");
  const Series rsi_col = fp.column("RSI");
  const Series ma = fp.column("MovingAverage");
  const Series short_mom = fp.column("ShortMomentum");
  const Series long_mom = fp.column("LongMomentum");

  Series mom_long_ma(n, kMissing), smoothed(n, kMissing), vol_slope(n, kMissing);
  const double k = static_cast<double>(cfg.volatility_slope_lag);
  for (const auto& g : fp.groups()) {
    store(mom_long_ma, g, rolling_stat(slice(mom, g), cfg.long_ma_window, RollingStat::kMean));
    store(smoothed, g, rolling_stat(slice(pr, g), cfg.smoothed_return_window, RollingStat::kMean));
    auto dv = diff(slice(vol, g), cfg.volatility_slope_lag);
    for (auto& x : dv) x /= k;
    store(vol_slope, g, dv);
  }

  Series mom_vs_mc(n), vol_turn(n), mom_liq(n), mc_adj_mom(n), mom_ma_dev(n), norm_hl(n),
      mom_rsi(n), vol_adj_ret(n), vol_dyn(n), liq_stress(n), trend(n), risk_adj(n), abnormal(n),
      mean_rev(n), multi_mom(n);
  for (std::size_t i = 0; i < n; ++i) {
    mom_vs_mc[i] = mom[i] * lmc[i];
    vol_turn[i] = vol[i] * turn[i];
    mom_liq[i] = mom[i] * ami[i];
    mc_adj_mom[i] = safe_div(mom[i], mc[i]);
    mom_ma_dev[i] = mom[i] - mom_long_ma[i];
    norm_hl[i] = safe_div(hl[i], p[i]);
    mom_rsi[i] = mom[i] * rsi_col[i];
    vol_adj_ret[i] = safe_div(pr[i], vol[i]);
    vol_dyn[i] = vol[i] * vol_slope[i];
    liq_stress[i] = safe_div(turn[i] * std::fabs(pr[i]), mc[i]);
    trend[i] = mom[i] * mom_ma_dev[i] * rsi_col[i];
    risk_adj[i] = safe_div(mom[i], vol[i] * turn[i]);
    abnormal[i] = mom[i] * hl[i] - rsi_col[i] * ami[i];
    mean_rev[i] = safe_div(p[i] - ma[i], vol[i]);
    multi_mom[i] = short_mom[i] * long_mom[i];
  }

  fp.add_column("MomentumVsMarketCap", std::move(mom_vs_mc));
  fp.add_column("VolatilityTurnover", std::move(vol_turn));
  fp.add_column("MomentumLiquidity", std::move(mom_liq));
  fp.add_column("MarketCapAdjMomentum", std::move(mc_adj_mom));
  fp.add_column("MomentumMADeviation", std::move(mom_ma_dev));
  fp.add_column("NormalizedHighLowSpread", std::move(norm_hl));
  fp.add_column("MomentumRSI", std::move(mom_rsi));
  fp.add_column("SmoothedReturn", std::move(smoothed));
  fp.add_column("VolatilityAdjustedReturn", std::move(vol_adj_ret));
  fp.add_column("VolatilitySlope", std::move(vol_slope));
  fp.add_column("VolatilityDynamics", std::move(vol_dyn));
  fp.add_column("LiquidityStress", std::move(liq_stress));
  fp.add_column("TrendStrength", std::move(trend));
  fp.add_column("RiskAdjustedMomentum", std::move(risk_adj));
  fp.add_column("AbnormalBehavior", std::move(abnormal));
  fp.add_column("MeanReversion", std::move(mean_rev));
  fp.add_column("MultiPeriodMomentum", std::move(multi_mom));
}

void finalize(FactorPanel& fp) {
  auto groups = fp.groups();
  for (auto& column : fp.columns) {
    for (const auto& g : groups) {
      double last = kMissing;
      for (std::size_t i = g.begin; i < g.end; ++i) {
        double& v = column[i];
        if (!std::isfinite(v)) v = kMissing;
        if (std::isnan(v)) {
          v = last;
        } else {
          last = v;
        }
        if (std::isnan(v)) v = 0.0;
      }
    }
  }
}

FactorPanel compute_factors(const Panel& panel, const FactorConfig& cfg) {
  auto fp = compute_base_factors(panel, cfg);
  compute_interaction_factors(fp, cfg);
  finalize(fp);
  return fp;
}

namespace {

struct ParsedTable {
  std::vector<std::string> header;
  std::vector<Permno> permno;
  std::vector<Date> date;
  std::vector<std::vector<double>> values;  // per non-key column
};

ParsedTable parse_keyed_table(std::string_view text, const std::string& source,
                              std::size_t key_columns) {
  ParsedTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    auto cells = split_csv_line(line);
    if (line_no == 1) {
      for (auto c : cells) table.header.emplace_back(c);
      if (table.header.size() < key_columns || table.header[0] != "permno" ||
          table.header[1] != "date")
        throw SchemaError(source + ": header must start with permno,date");
      table.values.resize(table.header.size() - 2);
      continue;
    }
    if (line.empty() || line == "\r") continue;
    if (cells.size() != table.header.size())
      throw SchemaError(source + ": row " + std::to_string(line_no) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(table.header.size()));
    Permno id = 0;
    auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), id);
    if (cells[0].empty() || ec != std::errc{} || ptr != cells[0].data() + cells[0].size())
      throw SchemaError(source + ": row " + std::to_string(line_no) +
                        ", column \"permno\": malformed permno");
    auto d = Date::parse(cells[1]);
    if (!d)
      throw SchemaError(source + ": row " + std::to_string(line_no) +
                        ", column \"date\": malformed date \"" + std::string(cells[1]) + "\"");
    table.permno.push_back(id);
    table.date.push_back(*d);
    for (std::size_t c = 2; c < cells.size(); ++c) table.values[c - 2].push_back(parse_number(cells[c]));
  }
  if (line_no == 0) throw SchemaError(source + ": empty file, header row expected");
  return table;
}

}  // namespace

void merge_extra_columns(FactorPanel& fp, std::string_view csv_text, const std::string& source) {
  auto table = parse_keyed_table(csv_text, source, 2);
  std::map<std::pair<Permno, Date>, std::size_t> index;
  for (std::size_t i = 0; i < table.permno.size(); ++i) index[{table.permno[i], table.date[i]}] = i;
  for (std::size_t c = 0; c < table.values.size(); ++c) {
    std::vector<double> col(fp.rows(), kMissing);
    for (std::size_t i = 0; i < fp.rows(); ++i) {
      auto it = index.find({fp.permno[i], fp.date[i]});
      if (it != index.end()) col[i] = table.values[c][it->second];
    }
    fp.add_column(table.header[c + 2], std::move(col));
  }
}

std::string write_factor_csv(const FactorPanel& fp) {
  std::string out = "permno,date,ret";
  for (const auto& name : fp.names) out += ',' + name;
  out += '\n';
  for (std::size_t i = 0; i < fp.rows(); ++i) {
    out += std::to_string(fp.permno[i]);
    out += ',';
    out += fp.date[i].iso();
    out += ',';
    out += format_number(fp.ret[i]);
    for (const auto& column : fp.columns) {
      out += ',';
      out += format_number(column[i]);
    }
    out += '\n';
  }
  return out;
}

FactorPanel parse_factor_csv(std::string_view text, const std::string& source) {
  auto table = parse_keyed_table(text, source, 3);
  if (table.header[2] != "ret") throw SchemaError(source + ": third column must be \"ret\"");
  FactorPanel fp;
  fp.permno = std::move(table.permno);
  fp.date = std::move(table.date);
  fp.ret = std::move(table.values[0]);
  for (std::size_t c = 1; c < table.values.size(); ++c)
    fp.add_column(table.header[c + 2], std::move(table.values[c]));
  return fp;
}

FactorPanel load_factor_csv(const std::string& path) { return parse_factor_csv(read_file(path), path); }

}  // namespace factorforge
