#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "factorforge/error.hpp"
#include "factorforge/models/model.hpp"
#include "factorforge/parallel.hpp"
#include "oracles.hpp"

using namespace factorforge;

namespace {

FeatureMatrix random_matrix(std::size_t n, std::size_t p, Xoshiro256& rng) {
  FeatureMatrix X(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) X(i, j) = rng.normal();
  return X;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

RegressionTree leaf(double value, double n = 1.0) {
  RegressionTree t;
  t.nodes.push_back({-1, 0.0, -1, -1, value, n, 0.0});
  return t;
}

}  // namespace

TEST_CASE("OLS recovers an exact line") {
  FeatureMatrix X(10, 1);
  std::vector<double> y(10);
  for (int i = 0; i < 10; ++i) {
    X(i, 0) = i * 0.7 - 2.0;
    y[i] = 3.0 * X(i, 0) + 1.0;
  }
  auto m = fit_ols(X, y);
  CHECK(std::fabs(m.coefficients[0] - 3.0) < 1e-10);
  CHECK(std::fabs(m.intercept - 1.0) < 1e-10);
  CHECK_FALSE(m.rank_deficient);
}

TEST_CASE("OLS on a constant target gives zero slopes") {
  Xoshiro256 rng(1);
  auto X = random_matrix(20, 3, rng);
  std::vector<double> y(20, 4.5);
  auto m = fit_ols(X, y);
  for (double b : m.coefficients) CHECK(std::fabs(b) < 1e-12);
  CHECK(m.intercept == doctest::Approx(4.5).epsilon(1e-14));
}

TEST_CASE("OLS and ridge agree with the normal-equation oracle") {
  Xoshiro256 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    auto X = random_matrix(200, 5, rng);
    std::vector<double> y(200);
    for (std::size_t i = 0; i < 200; ++i)
      y[i] = 0.5 + X(i, 0) - 2.0 * X(i, 3) + 0.3 * rng.normal();
    auto ref = oracle::normal_equations(X, y, 0.0);
    auto ols = fit_ols(X, y);
    CHECK(max_abs_diff(ols.coefficients, ref.beta) < 1e-8);
    CHECK(std::fabs(ols.intercept - ref.intercept) < 1e-8);
    auto ref_r = oracle::normal_equations(X, y, 2.5);
    auto ridge = fit_ridge(X, y, 2.5);
    CHECK(max_abs_diff(ridge.coefficients, ref_r.beta) < 1e-8);
    CHECK(std::fabs(ridge.intercept - ref_r.intercept) < 1e-8);
  }
}

TEST_CASE("ridge limits and the one-feature closed form") {
  Xoshiro256 rng(5);
  auto X = random_matrix(50, 4, rng);
  std::vector<double> y(50);
  for (std::size_t i = 0; i < 50; ++i) y[i] = X(i, 1) + rng.normal();
  auto ols = fit_ols(X, y);
  auto r0 = fit_ridge(X, y, 0.0);
  CHECK(max_abs_diff(ols.coefficients, r0.coefficients) < 1e-10);
  CHECK(std::fabs(ols.intercept - r0.intercept) < 1e-10);
  CHECK(r0.kind == LinearKind::kRidge);

  auto big = fit_ridge(X, y, 1e12);
  double norm = 0.0;
  for (double b : big.coefficients) norm += b * b;
  CHECK(std::sqrt(norm) < 1e-6);
  CHECK(big.intercept == doctest::Approx(std::accumulate(y.begin(), y.end(), 0.0) / 50).epsilon(1e-6));

  FeatureMatrix x1(4, 1, {1.0, 2.0, 4.0, 5.0});
  std::vector<double> y1{1.0, 3.0, 2.0, 6.0};
  // Centered: x = [-2,-1,1,2], y = [-2,0,-1,3]; Sxy = 4 + 0 - 1 + 6 = 9, Sxx = 10.
  auto r1 = fit_ridge(x1, y1, 1.0);
  CHECK(r1.coefficients[0] == doctest::Approx(9.0 / 11.0).epsilon(1e-14));
  CHECK(r1.intercept == doctest::Approx(3.0 - 3.0 * 9.0 / 11.0).epsilon(1e-14));
  CHECK_THROWS_AS(fit_ridge(x1, y1, -1.0), Error);
}

TEST_CASE("rank-deficient OLS returns the flagged minimum-norm fit") {
  FeatureMatrix X(6, 2);
  std::vector<double> y(6);
  for (int i = 0; i < 6; ++i) {
    X(i, 0) = i;
    X(i, 1) = i;
    y[i] = 2.0 * i;
  }
  auto m = fit_ols(X, y);
  CHECK(m.rank_deficient);
  CHECK(m.coefficients[0] == doctest::Approx(1.0));
  CHECK(m.coefficients[1] == doctest::Approx(1.0));
}

TEST_CASE("non-finite inputs are rejected") {
  FeatureMatrix X(3, 1, {1.0, oracle::kNaN, 3.0});
  std::vector<double> y{1, 2, 3};
  CHECK_THROWS_AS(fit_ols(X, y), Error);
}

TEST_CASE("tree fitting") {
  Xoshiro256 rng(1);
  SUBCASE("constant target is a single leaf") {
    auto X = random_matrix(30, 2, rng);
    std::vector<double> y(30, 2.0);
    auto t = fit_tree(X, y, TreeConfig{}, rng);
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].value == 2.0);
  }
  SUBCASE("step function gives a stump at the gap") {
    FeatureMatrix X(10, 1);
    std::vector<double> y(10);
    for (int i = 0; i < 10; ++i) {
      X(i, 0) = i < 5 ? 0.1 * i : 0.6 + 0.1 * (i - 5);
      y[i] = i < 5 ? -1.0 : 3.0;
    }
    TreeConfig cfg;
    cfg.max_depth = 1;
    auto t = fit_tree(X, y, cfg, rng);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold > 0.4);
    CHECK(t.nodes[0].threshold < 0.6);
    CHECK(t.nodes[t.nodes[0].left].value == -1.0);
    CHECK(t.nodes[t.nodes[0].right].value == 3.0);
  }
  SUBCASE("max_depth is honored") {
    auto X = random_matrix(200, 3, rng);
    std::vector<double> y(200);
    for (std::size_t i = 0; i < 200; ++i) y[i] = std::sin(3 * X(i, 0)) + X(i, 1) * X(i, 2);
    TreeConfig cfg;
    cfg.max_depth = 2;
    CHECK(fit_tree(X, y, cfg, rng).depth() <= 2);
  }
  SUBCASE("gain ties go to the lowest feature index") {
    FeatureMatrix X(4, 2, {0, 0, 0, 0, 1, 1, 1, 1});
    std::vector<double> y{0, 0, 1, 1};
    TreeConfig cfg;
    cfg.max_depth = 1;
    auto t = fit_tree(X, y, cfg, rng);
    CHECK(t.nodes[0].feature == 0);
  }
}

TEST_CASE("random forest") {
  SUBCASE("single repeated sample") {
    FeatureMatrix X(5, 2, std::vector<double>(10, 1.5));
    std::vector<double> y(5, 0.25);
    ForestConfig cfg;
    cfg.n_estimators = 10;
    auto f = fit_random_forest(X, y, cfg);
    CHECK(f.predict_row(X.row(0)) == 0.25);
    std::vector<double> other{-3.0, 8.0};
    CHECK(f.predict_row(other) == 0.25);
  }
  SUBCASE("same seed gives identical forests regardless of threads") {
    Xoshiro256 rng(2);
    auto X = random_matrix(150, 4, rng);
    std::vector<double> y(150);
    for (std::size_t i = 0; i < 150; ++i) y[i] = X(i, 0) * X(i, 1) + rng.normal();
    ForestConfig cfg;
    cfg.n_estimators = 20;
    set_thread_count(1);
    auto a = model_to_json({{"a", "b", "c", "d"}, fit_random_forest(X, y, cfg)}).dump();
    set_thread_count(4);
    auto b = model_to_json({{"a", "b", "c", "d"}, fit_random_forest(X, y, cfg)}).dump();
    set_thread_count(0);
    CHECK(a == b);
    cfg.seed = 43;
    CHECK(model_to_json({{"a", "b", "c", "d"}, fit_random_forest(X, y, cfg)}).dump() != a);
  }
}

TEST_CASE("gradient boosting") {
  SUBCASE("constant target") {
    Xoshiro256 rng(3);
    auto X = random_matrix(40, 2, rng);
    std::vector<double> y(40, -1.25);
    auto m = fit_gradient_boosting(X, y, BoostingConfig{});
    CHECK(m.init_value == -1.25);
    for (std::size_t i = 0; i < 40; ++i) CHECK(m.predict_row(X.row(i)) == -1.25);
  }
  SUBCASE("one full-rate iteration equals a stump") {
    FeatureMatrix X(8, 1, {0, 1, 2, 3, 4, 5, 6, 7});
    std::vector<double> y{1, 1, 1, 1, 5, 5, 5, 6};
    BoostingConfig cfg;
    cfg.n_iterations = 1;
    cfg.learning_rate = 1.0;
    cfg.max_depth = 1;
    auto m = fit_gradient_boosting(X, y, cfg);
    TreeConfig tc;
    tc.max_depth = 1;
    Xoshiro256 rng(0);
    auto stump = fit_tree(X, y, tc, rng);
    double mse = 0.0;
    for (int i = 0; i < 8; ++i) mse += std::pow(y[i] - stump.predict_row(X.row(i)), 2) / 8.0;
    CHECK(m.training_loss.back() == doctest::Approx(mse).epsilon(1e-14));
  }
  SUBCASE("training loss never increases") {
    Xoshiro256 rng(4);
    auto X = random_matrix(300, 5, rng);
    std::vector<double> y(300);
    for (std::size_t i = 0; i < 300; ++i) y[i] = std::tanh(X(i, 0)) + 0.5 * X(i, 2) * X(i, 3) + 0.2 * rng.normal();
    auto m = fit_gradient_boosting(X, y, BoostingConfig{});
    REQUIRE(m.training_loss.size() == 101);
    for (std::size_t i = 1; i < m.training_loss.size(); ++i) CHECK(m.training_loss[i] <= m.training_loss[i - 1]);
  }
}

TEST_CASE("predict formulas") {
  LinearModel lin;
  lin.intercept = 1.0;
  lin.coefficients = {2.0};
  std::vector<double> x{3.0};
  CHECK(predict_row(Model{lin}, x) == 7.0);

  ForestModel forest;
  forest.n_features = 1;
  forest.trees = {leaf(5.0), leaf(5.0), leaf(5.0)};
  CHECK(predict_row(Model{forest}, x) == 5.0);

  BoostedModel boosted;
  boosted.n_features = 1;
  boosted.init_value = 2.0;
  boosted.config.learning_rate = 0.1;
  boosted.trees = {leaf(10.0)};
  CHECK(predict_row(Model{boosted}, x) == doctest::Approx(3.0).epsilon(1e-15));

  FeatureMatrix wide(1, 2, {1.0, 2.0});
  CHECK_THROWS_AS(predict(Model{lin}, wide), Error);
  CHECK_THROWS_AS(predict(Model{forest}, wide), Error);
}

TEST_CASE("evaluate") {
  std::vector<double> y{1, 2, 3};
  auto perfect = evaluate(y, y);
  CHECK(perfect.mse == 0.0);
  CHECK(perfect.r2 == 1.0);
  auto mean = evaluate(y, std::vector<double>{2, 2, 2});
  CHECK(mean.r2 == 0.0);
  auto m = evaluate(y, std::vector<double>{1, 2, 4});
  CHECK(m.mse == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(m.r2 == doctest::Approx(0.5).epsilon(1e-15));
  auto flat = evaluate(std::vector<double>{1, 1}, std::vector<double>{1, 2});
  CHECK(flat.degenerate);
  CHECK_THROWS_AS(evaluate(std::vector<double>{1}, std::vector<double>{1}), Error);
}

TEST_CASE("model JSON round trip predicts identically") {
  Xoshiro256 rng(9);
  auto X = random_matrix(120, 3, rng);
  std::vector<double> y(120);
  for (std::size_t i = 0; i < 120; ++i) y[i] = X(i, 0) - X(i, 1) * X(i, 2) + 0.1 * rng.normal();
  for (auto kind : {ModelKind::kOls, ModelKind::kRidge, ModelKind::kRandomForest, ModelKind::kGradientBoosting}) {
    ModelSpec spec;
    spec.kind = kind;
    spec.forest.n_estimators = 10;
    spec.boosting.n_iterations = 20;
    TrainedModel tm{{"x0", "x1", "x2"}, fit_model(spec, X, y)};
    auto text = model_to_json(tm).dump();
    auto back = model_from_json(nlohmann::json::parse(text));
    CHECK(back.features == tm.features);
    CHECK(predict(back.model, X) == predict(tm.model, X));
    CHECK(model_to_json(back).dump() == text);
    CHECK(parse_model_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_model_kind("svm"), Error);
}

TEST_CASE("model specs read hyperparameters from JSON") {
  auto spec = ModelSpec::from_json(nlohmann::json{{"kind", "random_forest"}, {"n_estimators", 7}, {"max_depth", 3}}, 99);
  CHECK(spec.kind == ModelKind::kRandomForest);
  CHECK(spec.forest.n_estimators == 7);
  CHECK(spec.forest.max_depth == 3);
  CHECK(spec.forest.seed == 99);
  auto again = ModelSpec::from_json(spec.to_json(), 1);
  CHECK(again.to_json() == spec.to_json());
}

TEST_CASE("OLS residuals are orthogonal to the design") {
  Xoshiro256 rng(17);
  auto X = random_matrix(200, 6, rng);
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) y[i] = X(i, 0) - X(i, 5) + rng.normal();
  auto m = fit_ols(X, y);
  std::vector<double> dots(7, 0.0);
  for (std::size_t i = 0; i < 200; ++i) {
    double r = y[i] - m.predict_row(X.row(i));
    dots[6] += r;
    for (std::size_t j = 0; j < 6; ++j) dots[j] += X(i, j) * r;
  }
  for (double d : dots) CHECK(std::fabs(d) < 1e-8);
}

TEST_CASE("ridge coefficient norm shrinks as alpha grows") {
  Xoshiro256 rng(18);
  auto X = random_matrix(100, 4, rng);
  std::vector<double> y(100);
  for (std::size_t i = 0; i < 100; ++i) y[i] = 2.0 * X(i, 1) + X(i, 2) + rng.normal();
  double prev = INFINITY;
  for (double alpha : {0.0, 0.1, 1.0, 10.0, 100.0, 1000.0}) {
    auto m = fit_ridge(X, y, alpha);
    double norm = 0.0;
    for (double b : m.coefficients) norm += b * b;
    CHECK(norm <= prev);
    prev = norm;
  }
}

TEST_CASE("tree leaves partition the rows and hold their means") {
  Xoshiro256 rng(19);
  auto X = random_matrix(250, 3, rng);
  std::vector<double> y(250);
  for (std::size_t i = 0; i < 250; ++i) y[i] = X(i, 0) * X(i, 1) + 0.2 * rng.normal();
  auto tree = fit_tree(X, y, TreeConfig{}, rng);
  std::vector<double> sum(tree.nodes.size(), 0.0), cnt(tree.nodes.size(), 0.0);
  for (std::size_t i = 0; i < 250; ++i) {
    int leaf = tree.leaf_index(X.row(i));
    REQUIRE(tree.nodes[leaf].is_leaf());
    sum[leaf] += y[i];
    cnt[leaf] += 1.0;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    if (!tree.nodes[k].is_leaf()) continue;
    CHECK(cnt[k] == tree.nodes[k].n_samples);
    CHECK(std::fabs(sum[k] / cnt[k] - tree.nodes[k].value) < 1e-12);
    total += cnt[k];
  }
  CHECK(total == 250.0);

  ForestConfig fc;
  fc.n_estimators = 10;
  auto forest = fit_random_forest(X, y, fc);
  const double lo = *std::min_element(y.begin(), y.end()), hi = *std::max_element(y.begin(), y.end());
  for (int k = 0; k < 100; ++k) {
    std::vector<double> x{3 * rng.normal(), 3 * rng.normal(), 3 * rng.normal()};
    double p = forest.predict_row(x);
    CHECK(p >= lo);
    CHECK(p <= hi);
  }
}
