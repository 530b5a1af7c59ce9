#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factorforge/ingest.hpp"

namespace factorforge {

/// Window and lag lengths, in observation periods.
struct FactorConfig {
  int momentum_lag = 4;
  int momentum_ma_window = 10;
  int long_ma_window = 20;
  int volatility_window = 20;
  int spread_window = 20;
  int rsi_window = 14;
  int smoothed_return_window = 10;
  int short_momentum_lag = 5;
  int long_momentum_lag = 20;
  int volatility_slope_lag = 1;

  void validate() const;
};

/// Long-format factor table keyed by (permno, date), column-major, sorted like its source panel.
struct FactorPanel {
  std::vector<Permno> permno;
  std::vector<Date> date;
  std::vector<double> ret;
  std::vector<double> prc;  // kept for price-normalized factors; empty when loaded from CSV
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return permno.size(); }
  /// Column index for `name`, or -1.
  int find(std::string_view name) const;
  const std::vector<double>& column(std::string_view name) const;
  void add_column(std::string name, std::vector<double> values);
  std::vector<GroupRange> groups() const;
  /// Subset of rows, in the given order.
  FactorPanel select_rows(std::span<const std::size_t> rows) const;
};

/// The factor names emitted by `compute_factors`, in output order.
const std::vector<std::string>& factor_catalog();

FactorPanel compute_base_factors(const Panel& panel, const FactorConfig& cfg);
void compute_interaction_factors(FactorPanel& fp, const FactorConfig& cfg);
/// Per permno: inf -> missing, forward fill, residual missing -> 0.
void finalize(FactorPanel& fp);

/// Base + interaction factors, finalized.
FactorPanel compute_factors(const Panel& panel, const FactorConfig& cfg);

/// Left-joins extra columns from a `permno,date,<name>...` CSV. Unmatched cells become missing.
void merge_extra_columns(FactorPanel& fp, std::string_view csv_text, const std::string& source);

std::string write_factor_csv(const FactorPanel& fp);
FactorPanel parse_factor_csv(std::string_view text, const std::string& source = "<memory>");
FactorPanel load_factor_csv(const std::string& path);

}  // namespace factorforge
