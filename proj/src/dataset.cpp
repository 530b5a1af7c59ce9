#include "factorforge/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "factorforge/error.hpp"

namespace factorforge {

TimeSplit chronological_split(const FactorPanel& fp, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error("split fraction must lie in (0, 1)");
  std::vector<Date> dates = fp.date;
  std::sort(dates.begin(), dates.end());
  dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
  if (dates.size() < 2) throw Error("chronological split needs at least two distinct dates");
  auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(dates.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, dates.size() - 1);
  TimeSplit split;
  split.last_train_date = dates[n_train - 1];
  for (std::size_t i = 0; i < fp.rows(); ++i)
    (fp.date[i] <= split.last_train_date ? split.train : split.test).push_back(i);
  return split;
}

FeatureMatrix feature_matrix(const FactorPanel& fp, std::span<const std::size_t> rows,
                             std::span<const std::string> features) {
  std::vector<const std::vector<double>*> cols;
  for (const auto& name : features) cols.push_back(&fp.column(name));
  FeatureMatrix X(rows.size(), features.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) X(i, j) = (*cols[j])[rows[i]];
  return X;
}

std::vector<double> target_values(const FactorPanel& fp, std::span<const std::size_t> rows) {
  std::vector<double> y;
  y.reserve(rows.size());
  for (std::size_t r : rows) y.push_back(fp.ret[r]);
  return y;
}

std::vector<double> column_means(const FeatureMatrix& X) {
  std::vector<double> means(X.cols(), 0.0);
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t j = 0; j < X.cols(); ++j) means[j] += X(i, j);
  if (X.rows() > 0)
    for (double& m : means) m /= static_cast<double>(X.rows());
  return means;
}

}  // namespace factorforge
