#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "factorforge/ingest.hpp"

namespace factorforge {

struct SynthConfig {
  int n_stocks = 100;
  int n_months = 60;
  std::uint64_t seed = 42;
  /// Scale of the return component predictable from lagged momentum and volatility.
  double signal_strength = 0.5;
  /// Also emit `LeakedReturn` = ret + tiny noise as an extra feature file.
  bool leak_features = false;
  int start_year = 2019;
  unsigned start_month = 1;

  void validate() const;
};

struct SynthData {
  Panel prices;  // sorted by (permno, date), month-end dates
  std::vector<MembershipRow> membership;
  std::string prices_csv;
  std::string membership_csv;
  std::string extra_features_csv;  // empty unless leak_features
};

/// Deterministic synthetic monthly panel: geometric random-walk prices with per-stock stochastic
/// volatility, log-normal share counts and turnover, and ret[t] = prc[t]/prc[t-1] - 1.
SynthData generate(const SynthConfig& cfg);

}  // namespace factorforge
