#pragma once

#include <span>
#include <vector>

namespace factorforge {

/// Series primitives used by the factor catalog. Missing cells are NaN and propagate.

/// out[t] = s[t] / s[t-lag] - 1; missing for t < lag or a zero denominator.
std::vector<double> pct_change(std::span<const double> series, int lag);

/// out[t] = s[t] - s[t-lag]; missing for t < lag.
std::vector<double> diff(std::span<const double> series, int lag);

enum class RollingStat { kMean, kStd, kMin };

/// Trailing-window statistic over s[t-window+1 .. t]. Missing until a full window of finite values
/// is available. kStd uses the n-1 denominator.
std::vector<double> rolling_stat(std::span<const double> series, int window, RollingStat stat);

/// Relative strength index with simple rolling means of gains and losses.
std::vector<double> rsi(std::span<const double> prices, int window);

}  // namespace factorforge
