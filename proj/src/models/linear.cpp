#include "factorforge/models/linear.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "factorforge/error.hpp"

namespace factorforge {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_inputs(const FeatureMatrix& X, std::span<const double> y) {
  if (X.rows() == 0) throw Error("linear fit needs at least one row");
  if (X.rows() != y.size()) throw Error("feature rows and target length differ");
  for (double v : X.data())
    if (!std::isfinite(v)) throw Error("non-finite value in feature matrix");
  for (double v : y)
    if (!std::isfinite(v)) throw Error("non-finite value in target");
}

struct Centered {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::RowVectorXd x_mean;
  double y_mean = 0.0;
};

Centered center(const FeatureMatrix& X, std::span<const double> y) {
  Eigen::Map<const RowMajor> xm(X.data().data(), static_cast<Eigen::Index>(X.rows()),
                                static_cast<Eigen::Index>(X.cols()));
  Eigen::Map<const Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(y.size()));
  Centered c;
  c.x_mean = xm.colwise().mean();
  c.y_mean = ym.mean();
  c.X = xm.rowwise() - c.x_mean;
  c.y = ym.array() - c.y_mean;
  return c;
}

LinearModel finish(LinearKind kind, double alpha, const Centered& c, const Eigen::VectorXd& beta) {
  LinearModel m;
  m.kind = kind;
  m.alpha = alpha;
  m.coefficients.assign(beta.data(), beta.data() + beta.size());
  m.intercept = c.y_mean - c.x_mean.dot(beta);
  return m;
}

}  // namespace

double LinearModel::predict_row(std::span<const double> x) const {
  if (x.size() != coefficients.size()) throw Error("feature count does not match linear model");
  double out = intercept;
  for (std::size_t j = 0; j < x.size(); ++j) out += coefficients[j] * x[j];
  return out;
}

LinearModel fit_ols(const FeatureMatrix& X, std::span<const double> y) {
  check_inputs(X, y);
  auto c = center(X, y);
  if (X.cols() == 0) return finish(LinearKind::kOls, 0.0, c, Eigen::VectorXd());
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(c.X);
  Eigen::VectorXd beta = cod.solve(c.y);
  auto m = finish(LinearKind::kOls, 0.0, c, beta);
  m.rank_deficient = cod.rank() < c.X.cols();
  return m;
}

LinearModel fit_ridge(const FeatureMatrix& X, std::span<const double> y, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("ridge alpha must be finite and >= 0");
  if (alpha == 0.0) {
    check_inputs(X, y);
    auto m = fit_ols(X, y);
    m.kind = LinearKind::kRidge;
    return m;
  }
  check_inputs(X, y);
  auto c = center(X, y);
  if (X.cols() == 0) return finish(LinearKind::kRidge, alpha, c, Eigen::VectorXd());
  // Augmented least squares [X; sqrt(alpha) I] b = [y; 0] avoids squaring the condition number.
  const auto n = c.X.rows();
  const auto p = c.X.cols();
  Eigen::MatrixXd A(n + p, p);
  A.topRows(n) = c.X;
  A.bottomRows(p) = std::sqrt(alpha) * Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + p);
  b.head(n) = c.y;
  Eigen::VectorXd beta = A.colPivHouseholderQr().solve(b);
  return finish(LinearKind::kRidge, alpha, c, beta);
}

}  // namespace factorforge
