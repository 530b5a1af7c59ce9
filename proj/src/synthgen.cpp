#include "factorforge/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "factorforge/error.hpp"
#include "factorforge/models/rng.hpp"
#include "factorforge/text.hpp"

namespace factorforge {

namespace {

constexpr Permno kFirstPermno = 10001;
constexpr int kMomentumLag = 4;

Date month_date(const SynthConfig& cfg, int offset) {
  const int total = cfg.start_year * 12 + static_cast<int>(cfg.start_month) - 1 + offset;
  return month_end(total / 12, static_cast<unsigned>(total % 12) + 1);
}

}  // namespace

void SynthConfig::validate() const {
  if (n_stocks < 2) throw Error("synth: n_stocks must be >= 2");
  if (n_months < 2) throw Error("synth: n_months must be >= 2");
  if (!(signal_strength >= 0.0 && signal_strength <= 1.0))
    throw Error("synth: signal_strength must lie in [0, 1]");
  if (start_month < 1 || start_month > 12) throw Error("synth: start_month must be 1..12");
}

SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  Xoshiro256 rng(cfg.seed);
  SynthData out;
  std::string extra = "permno,date,LeakedReturn\n";

  for (int s = 0; s < cfg.n_stocks; ++s) {
    const Permno permno = kFirstPermno + s;
    const double base_vol = 0.06 * std::exp(0.35 * rng.normal());
    const double shares = std::round(2.0e7 * std::exp(1.0 * rng.normal()));
    const double turnover = 0.08 * std::exp(0.5 * rng.normal());
    double price = 30.0 * std::exp(0.8 * rng.normal());
    double log_vol_state = 0.0;

    std::vector<double> prices;
    std::vector<double> vols;  // volatility state per month
    for (int t = 0; t < cfg.n_months; ++t) {
      // Predictable part: nonlinear in last month's 4-period momentum, scaled by last month's
      // volatility state. Both are known before month t's shock.
      double signal = 0.0;
      if (t > kMomentumLag) {
        const double mom = prices[t - 1] / prices[t - 1 - kMomentumLag] - 1.0;
        signal = 0.05 * std::tanh(5.0 * mom) * (vols[t - 1] / 0.06);
      }
      log_vol_state = 0.8 * log_vol_state + 0.25 * rng.normal();
      const double sigma = base_vol * std::exp(log_vol_state);
      double r = cfg.signal_strength * signal + sigma * rng.normal();
      r = std::max(r, -0.9);

      const double prev = price;
      price = prev * (1.0 + r);
      const double ret = t == 0 ? r : price / prev - 1.0;
      prices.push_back(price);
      vols.push_back(sigma);

      ObservationRow row;
      row.permno = permno;
      row.date = month_date(cfg, t);
      row.prc = price;
      row.ret = ret;
      row.vol = std::round(shares * turnover * std::exp(0.3 * rng.normal()));
      row.shrout = shares;
      out.prices.rows.push_back(row);

      const double leak_noise = 1e-4 * rng.normal();
      if (cfg.leak_features)
        extra += std::to_string(permno) + ',' + row.date.iso() + ',' + format_number(ret + leak_noise) + '\n';
    }

    MembershipRow m;
    m.permno = permno;
    m.start_date = month_date(cfg, 0);
    if (s % 7 == 3 && cfg.n_months > 12) m.start_date = month_date(cfg, 6);
    if (s % 11 == 5 && cfg.n_months > 12) m.end_date = month_date(cfg, cfg.n_months - 7);
    out.membership.push_back(m);
  }

  out.prices_csv = write_prices_csv(out.prices);
  out.membership_csv = write_membership_csv(out.membership);
  if (cfg.leak_features) out.extra_features_csv = std::move(extra);
  return out;
}

}  // namespace factorforge
