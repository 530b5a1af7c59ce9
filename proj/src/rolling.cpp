#include "factorforge/rolling.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "factorforge/error.hpp"

namespace factorforge {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

void require_positive(int value, const char* what) {
  if (value < 1) throw Error(std::string(what) + " must be >= 1");
}

/// Neumaier-compensated running sum supporting removal.
class SlidingSum {
 public:
  void add(double x) { accumulate(x); }
  void remove(double x) { accumulate(-x); }
  double value() const { return sum_ + compensation_; }

 private:
  void accumulate(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Applies `fn(run_begin, run_end)` to every maximal run of finite values.
template <typename Fn>
void for_each_finite_run(std::span<const double> s, Fn&& fn) {
  std::size_t i = 0;
  while (i < s.size()) {
    if (!std::isfinite(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && std::isfinite(s[j])) ++j;
    fn(i, j);
    i = j;
  }
}

void rolling_mean_run(std::span<const double> s, std::size_t begin, std::size_t end, std::size_t w,
                      std::vector<double>& out) {
  SlidingSum sum;
  for (std::size_t t = begin; t < end; ++t) {
    sum.add(s[t]);
    if (t >= begin + w) sum.remove(s[t - w]);
    if (t + 1 >= begin + w) out[t] = sum.value() / static_cast<double>(w);
  }
}

void rolling_std_run(std::span<const double> s, std::size_t begin, std::size_t end, std::size_t w,
                     std::vector<double>& out) {
  if (w < 2) return;  // sample std needs two observations
  std::vector<double> means(s.size(), kMissing);
  rolling_mean_run(s, begin, end, w, means);
  for (std::size_t t = begin + w - 1; t < end; ++t) {
    double m = means[t];
    double ss = 0.0;
    for (std::size_t k = t + 1 - w; k <= t; ++k) ss += (s[k] - m) * (s[k] - m);
    out[t] = std::sqrt(ss / static_cast<double>(w - 1));
  }
}

void rolling_min_run(std::span<const double> s, std::size_t begin, std::size_t end, std::size_t w,
                     std::vector<double>& out) {
  std::deque<std::size_t> window;  // indices with increasing values
  for (std::size_t t = begin; t < end; ++t) {
    while (!window.empty() && s[window.back()] >= s[t]) window.pop_back();
    window.push_back(t);
    if (window.front() + w <= t) window.pop_front();
    if (t + 1 >= begin + w) out[t] = s[window.front()];
  }
}

}  // namespace

std::vector<double> pct_change(std::span<const double> series, int lag) {
  require_positive(lag, "lag");
  std::vector<double> out(series.size(), kMissing);
  for (std::size_t t = static_cast<std::size_t>(lag); t < series.size(); ++t) {
    double base = series[t - lag];
    if (base == 0.0) continue;
    out[t] = series[t] / base - 1.0;
  }
  return out;
}

std::vector<double> diff(std::span<const double> series, int lag) {
  require_positive(lag, "lag");
  std::vector<double> out(series.size(), kMissing);
  for (std::size_t t = static_cast<std::size_t>(lag); t < series.size(); ++t)
    out[t] = series[t] - series[t - lag];
  return out;
}

std::vector<double> rolling_stat(std::span<const double> series, int window, RollingStat stat) {
  require_positive(window, "window");
  std::vector<double> out(series.size(), kMissing);
  auto w = static_cast<std::size_t>(window);
  for_each_finite_run(series, [&](std::size_t begin, std::size_t end) {
    if (end - begin < w) return;
    switch (stat) {
      case RollingStat::kMean: rolling_mean_run(series, begin, end, w, out); break;
      case RollingStat::kStd: rolling_std_run(series, begin, end, w, out); break;
      case RollingStat::kMin: rolling_min_run(series, begin, end, w, out); break;
    }
  });
  return out;
}

std::vector<double> rsi(std::span<const double> prices, int window) {
  require_positive(window, "window");
  auto delta = diff(prices, 1);
  std::vector<double> gains(delta.size(), kMissing), losses(delta.size(), kMissing);
  std::vector<double> neg_gains(delta.size(), kMissing), neg_losses(delta.size(), kMissing);
  for (std::size_t t = 0; t < delta.size(); ++t) {
    if (std::isnan(delta[t])) continue;
    gains[t] = delta[t] > 0 ? delta[t] : 0.0;
    losses[t] = delta[t] < 0 ? -delta[t] : 0.0;
    neg_gains[t] = -gains[t];
    neg_losses[t] = -losses[t];
  }
  auto avg_gain = rolling_stat(gains, window, RollingStat::kMean);
  auto avg_loss = rolling_stat(losses, window, RollingStat::kMean);
  // min(-x) == 0 means every value in the window is exactly zero; the sliding sum may
  // leave rounding residue there, so zero windows are detected separately.
  auto max_gain = rolling_stat(neg_gains, window, RollingStat::kMin);
  auto max_loss = rolling_stat(neg_losses, window, RollingStat::kMin);

  std::vector<double> out(prices.size(), kMissing);
  for (std::size_t t = 0; t < prices.size(); ++t) {
    if (std::isnan(avg_gain[t]) || std::isnan(avg_loss[t])) continue;
    bool no_gain = max_gain[t] == 0.0;
    bool no_loss = max_loss[t] == 0.0;
    if (no_gain && no_loss) {
      out[t] = 50.0;
    } else if (no_loss) {
      out[t] = 100.0;
    } else if (no_gain) {
      out[t] = 0.0;
    } else {
      out[t] = 100.0 - 100.0 / (1.0 + avg_gain[t] / avg_loss[t]);
    }
  }
  return out;
}

}  // namespace factorforge
