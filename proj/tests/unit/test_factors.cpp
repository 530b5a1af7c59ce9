#include <doctest.h>

#include <cmath>
#include <limits>

#include "factorforge/error.hpp"
#include "factorforge/factors.hpp"
#include "factorforge/rolling.hpp"
#include "oracles.hpp"

using namespace factorforge;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same(double a, double b, double tol = 1e-12) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::fabs(a - b) <= tol;
}

void check_series(const std::vector<double>& got, const std::vector<double>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    INFO("index " << i << ": " << got[i] << " vs " << want[i]);
    CHECK(same(got[i], want[i]));
  }
}

Panel single_stock(const std::vector<double>& prices, double vol = 1000.0, double shrout = 1000.0) {
  Panel p;
  for (std::size_t t = 0; t < prices.size(); ++t) {
    ObservationRow r;
    r.permno = 1;
    r.date = Date(std::chrono::sys_days(std::chrono::days(Date(2000, 1, 3).days() + static_cast<int>(t))));
    r.prc = prices[t];
    r.ret = t == 0 ? 0.0 : prices[t] / prices[t - 1] - 1.0;
    r.vol = vol;
    r.shrout = shrout;
    p.rows.push_back(r);
  }
  return p;
}

}  // namespace

TEST_CASE("pct_change examples") {
  check_series(pct_change(std::vector<double>{100, 100, 100, 100, 100}, 4), {kNaN, kNaN, kNaN, kNaN, 0.0});
  auto step = pct_change(std::vector<double>{100, 110}, 1);
  CHECK(std::isnan(step[0]));
  CHECK(step[1] == doctest::Approx(0.10).epsilon(1e-15));
  check_series(pct_change(std::vector<double>{50, 0, 10}, 1), {kNaN, -1.0, kNaN});
  CHECK_THROWS_AS(pct_change(std::vector<double>{1, 2}, 0), Error);
}

TEST_CASE("rolling_stat examples") {
  check_series(rolling_stat(std::vector<double>{1, 2, 3, 4}, 2, RollingStat::kMean), {kNaN, 1.5, 2.5, 3.5});
  check_series(rolling_stat(std::vector<double>{3, 1, 2}, 3, RollingStat::kMin), {kNaN, kNaN, 1.0});
  auto s = rolling_stat(std::vector<double>(10, 7.25), 4, RollingStat::kStd);
  for (std::size_t t = 3; t < s.size(); ++t) CHECK(s[t] == 0.0);
  // A missing cell restarts the warm-up.
  check_series(rolling_stat(std::vector<double>{1, 2, kNaN, 4, 5, 6}, 2, RollingStat::kMean),
               {kNaN, 1.5, kNaN, kNaN, 4.5, 5.5});
}

TEST_CASE("rolling_stat matches the re-scan oracle on random data with gaps") {
  Xoshiro256 rng(7);
  std::vector<double> s(300);
  for (auto& x : s) x = 1e3 * rng.normal();
  s[50] = kNaN;
  s[51] = kNaN;
  s[200] = kNaN;
  for (int w : {1, 2, 5, 17}) {
    check_series(rolling_stat(s, w, RollingStat::kMean), oracle::rolling_mean(s, w));
    check_series(rolling_stat(s, w, RollingStat::kMin), oracle::rolling_min(s, w));
    check_series(rolling_stat(s, w, RollingStat::kStd), oracle::rolling_std(s, w));
  }
}

TEST_CASE("rsi boundary conventions") {
  std::vector<double> up, down, flat;
  for (int t = 0; t < 30; ++t) {
    up.push_back(10.0 + t);
    down.push_back(100.0 - t);
    flat.push_back(42.0);
  }
  auto ru = rsi(up, 14), rd = rsi(down, 14), rf = rsi(flat, 14);
  for (int t = 0; t < 14; ++t) CHECK(std::isnan(ru[t]));
  for (int t = 14; t < 30; ++t) {
    CHECK(ru[t] == 100.0);
    CHECK(rd[t] == 0.0);
    CHECK(rf[t] == 50.0);
  }
  Xoshiro256 rng(3);
  std::vector<double> walk{100.0};
  for (int t = 1; t < 400; ++t) walk.push_back(walk.back() * std::exp(0.03 * rng.normal()));
  check_series(rsi(walk, 14), oracle::rsi(walk, 14));
}

TEST_CASE("base factor arithmetic") {
  auto fp = compute_base_factors(single_stock({10.0, 12.0}, 1000.0, 1000.0), FactorConfig{});
  CHECK(fp.column("MarketCap")[0] == 10000.0);
  CHECK(fp.column("AmihudIlliquidity")[1] == doctest::Approx(0.002).epsilon(1e-15));
  CHECK(fp.column("TurnoverRatio")[0] == 1.0);
  CHECK(fp.column("LogMarketCap")[0] == doctest::Approx(std::log1p(10000.0)));

  auto neg = compute_base_factors(single_stock({-10.0}, 500.0, 1000.0), FactorConfig{});
  CHECK(neg.column("MarketCap")[0] == 10000.0);
  CHECK(neg.column("TurnoverRatio")[0] == 0.5);

  auto zero_vol = compute_base_factors(single_stock({10.0, 11.0}, 0.0, 1000.0), FactorConfig{});
  CHECK(std::isnan(zero_vol.column("AmihudIlliquidity")[1]));
}

TEST_CASE("catalog order and column count") {
  Panel p = oracle::random_panel(2, 60, 1, false);
  auto fp = compute_factors(p, FactorConfig{});
  CHECK(fp.names == factor_catalog());
  CHECK(fp.names.size() == 31);
  for (const auto& col : fp.columns)
    for (double v : col) CHECK(std::isfinite(v));
}

TEST_CASE("interaction factor identities") {
  // Flat prices: momentum is zero, volatility is flat, price equals its moving average.
  auto fp = compute_base_factors(single_stock(std::vector<double>(60, 10.0)), FactorConfig{});
  compute_interaction_factors(fp, FactorConfig{});
  for (std::size_t t = 25; t < fp.rows(); ++t) {
    CHECK(fp.column("Momentum")[t] == 0.0);
    CHECK(fp.column("MomentumVsMarketCap")[t] == 0.0);
    CHECK(fp.column("MomentumRSI")[t] == 0.0);
    CHECK(fp.column("VolatilitySlope")[t] == 0.0);
    CHECK(fp.column("VolatilityDynamics")[t] == 0.0);
    CHECK(fp.column("MultiPeriodMomentum")[t] ==
          fp.column("ShortMomentum")[t] * fp.column("LongMomentum")[t]);
  }
  finalize(fp);
  for (const char* name : {"Momentum", "ShortMomentum", "LongMomentum", "MomentumMA", "MomentumChange"})
    for (double v : fp.column(name)) CHECK(v == 0.0);
}

TEST_CASE("MeanReversion is zero at the moving average") {
  std::vector<double> prices;
  for (int t = 0; t < 40; ++t) prices.push_back(t % 2 == 0 ? 9.0 : 11.0);
  prices[38] = 10.0;
  prices[39] = 10.0;
  auto fp = compute_base_factors(single_stock(prices), FactorConfig{});
  compute_interaction_factors(fp, FactorConfig{});
  CHECK(fp.column("MovingAverage")[39] == 10.0);
  CHECK(fp.column("RollingVolatility")[39] > 0.0);
  CHECK(fp.column("MeanReversion")[39] == 0.0);
  for (std::size_t t = 20; t < 38; ++t) {
    double vol = fp.column("RollingVolatility")[t];
    CHECK(fp.column("MeanReversion")[t] ==
          doctest::Approx((prices[t] - fp.column("MovingAverage")[t]) / vol));
  }
}

TEST_CASE("finalize fills warm-up with zero and replaces mid-series infinities") {
  FactorPanel fp;
  for (int t = 0; t < 4; ++t) {
    fp.permno.push_back(1);
    fp.date.push_back(Date(2020, 1, 1 + t));
    fp.ret.push_back(0.0);
  }
  const double inf = std::numeric_limits<double>::infinity();
  fp.add_column("A", {kNaN, 0.5, inf, 0.7});
  fp.add_column("B", {1.0, 2.0, 3.0, 4.0});
  finalize(fp);
  CHECK(fp.column("A") == std::vector<double>{0.0, 0.5, 0.5, 0.7});
  CHECK(fp.column("B") == std::vector<double>{1.0, 2.0, 3.0, 4.0});
  CHECK_THROWS_AS(fp.add_column("B", {0, 0, 0, 0}), Error);
}

TEST_CASE("extra columns are joined on permno and date") {
  Panel p = oracle::random_panel(2, 5, 2, false);
  auto fp = compute_factors(p, FactorConfig{});
  std::string csv = "permno,date,Extra\n10001," + p.rows[7].date.iso() + ",3.5\n";
  merge_extra_columns(fp, csv, "extra.csv");
  const auto& extra = fp.column("Extra");
  CHECK(extra[7] == 3.5);
  CHECK(std::isnan(extra[0]));
}

TEST_CASE("factor CSV round trip") {
  Panel p = oracle::random_panel(3, 30, 5, false);
  auto fp = compute_factors(p, FactorConfig{});
  auto text = write_factor_csv(fp);
  CHECK(text.substr(0, text.find('\n')).find("permno,date,ret,MarketCap,") == 0);
  auto back = parse_factor_csv(text);
  CHECK(back.names == fp.names);
  CHECK(back.columns == fp.columns);
  CHECK(back.ret == fp.ret);
  CHECK(write_factor_csv(back) == text);
}

TEST_CASE("factors depend only on each security's own history") {
  Panel p = oracle::random_panel(4, 80, 8, false);
  auto full = compute_factors(p, FactorConfig{});
  Panel one;
  for (const auto& r : p.rows)
    if (r.permno == 10002) one.rows.push_back(r);
  auto alone = compute_factors(one, FactorConfig{});
  for (std::size_t c = 0; c < full.columns.size(); ++c)
    for (std::size_t t = 0; t < alone.rows(); ++t) CHECK(alone.columns[c][t] == full.columns[c][160 + t]);
}

TEST_CASE("prepending history leaves warmed-up values unchanged") {
  Panel p = oracle::random_panel(1, 120, 9, false);
  Panel tail;
  tail.rows.assign(p.rows.begin() + 30, p.rows.end());
  auto longer = compute_base_factors(p, FactorConfig{});
  compute_interaction_factors(longer, FactorConfig{});
  auto shorter = compute_base_factors(tail, FactorConfig{});
  compute_interaction_factors(shorter, FactorConfig{});
  for (std::size_t c = 0; c < shorter.columns.size(); ++c)
    for (std::size_t t = 45; t < shorter.rows(); ++t) {
      INFO(shorter.names[c] << " at " << t);
      CHECK(same(shorter.columns[c][t], longer.columns[c][t + 30], 1e-9));
    }
}

TEST_CASE("cell-wise identities before finalization") {
  Panel p = oracle::random_panel(3, 100, 10, true);
  auto fp = compute_base_factors(p, FactorConfig{});
  compute_interaction_factors(fp, FactorConfig{});
  const auto &mom = fp.column("Momentum"), &rsi_col = fp.column("RSI"), &mr = fp.column("MeanReversion"),
             &vol = fp.column("RollingVolatility"), &ma = fp.column("MovingAverage");
  for (std::size_t i = 0; i < fp.rows(); ++i) {
    if (!std::isnan(mom[i]) && !std::isnan(rsi_col[i])) CHECK(fp.column("MomentumRSI")[i] == mom[i] * rsi_col[i]);
    if (vol[i] > 0.0 && !std::isnan(ma[i]))
      CHECK(std::fabs(mr[i] * vol[i] - (fp.prc[i] - ma[i])) < 1e-9 * std::max(1.0, std::fabs(fp.prc[i])));
  }
}
