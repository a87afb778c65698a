#include "cig/divergence.hpp"
#include "cig/fitting.hpp"
#include "cig/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace cig;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

Dataset data(std::initializer_list<std::pair<Index, Index>> obs, Index k, Index m) {
  std::vector<Observation> out;
  for (auto [x, y] : obs) out.push_back({x, y});
  return Dataset::make(out, k, m);
}

Matrix row(std::initializer_list<double> values) {
  Matrix m(1, static_cast<Index>(values.size()));
  Index j = 0;
  for (double v : values) m(0, j++) = v;
  return m;
}

// Single binary x with indicator feature on y = 0.
FeatureSet bernoulli_feature() { return FeatureSet::make({row({1, 0})}); }

// Margins of weak learner h on a binary label: F(x, y) = h(x) * (+1 for y = 0, -1 for y = 1).
FeatureSet margin_features(const std::vector<std::vector<double>>& learners) {
  std::vector<Matrix> out;
  for (const auto& h : learners) {
    Matrix f(static_cast<Index>(h.size()), 2);
    for (Index x = 0; x < f.rows(); ++x) {
      f(x, 0) = h[static_cast<std::size_t>(x)];
      f(x, 1) = -h[static_cast<std::size_t>(x)];
    }
    out.push_back(f);
  }
  return FeatureSet::make(out);
}

double divergence_at(const Vector& theta, const FeatureSet& features, const Dataset& d) {
  const auto emp = empirical(d);
  return i_divergence_closure(emp.r, emp.p_hat, model_from_theta(theta, features, ModelKind::logistic).entries());
}

}  // namespace

TEST_CASE("datasets and feature sets are validated") {
  CHECK(code_of([] { Dataset::make({}, 1, 2); }) == ErrorCode::EmptyDataset);
  CHECK(code_of([] { data({{0, 2}}, 1, 2); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([] { FeatureSet::make({}); }) == ErrorCode::BadShape);
  CHECK(code_of([] { FeatureSet::make({row({1, 0}), row({1, 0, 0})}); }) == ErrorCode::ShapeMismatch);
  const auto F = FeatureSet::make({row({1, 0}), row({0, 2})});
  Vector theta(2);
  theta << 1.0, 0.5;
  CHECK(F.scores(theta).isApprox(row({1, 1})));
  CHECK(code_of([&] { F.scores(Vector::Ones(3)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("empirical distributions of a dataset") {
  const auto a = empirical(data({{0, 0}, {0, 1}}, 1, 2));
  CHECK(a.r(0) == 1.0);
  CHECK(a.p_hat.isApprox(row({0.5, 0.5})));
  CHECK(empirical(data({{0, 0}, {0, 0}, {0, 0}, {0, 1}}, 1, 2)).p_hat.isApprox(row({0.75, 0.25})));
  const auto c = empirical(data({{0, 0}, {1, 1}}, 2, 2));
  CHECK(c.r(0) == 0.5);
  CHECK(c.r(1) == 0.5);
  // Unobserved x: zero weight, uniform row.
  const auto u = empirical(data({{0, 0}}, 2, 2));
  CHECK(u.r(1) == 0.0);
  CHECK(u.p_hat(1, 0) == 0.5);
}

TEST_CASE("models from parameters") {
  const auto F = FeatureSet::make({Matrix::Random(2, 3), Matrix::Random(2, 3)});
  const auto uniform = model_from_theta(Vector::Zero(2), F, ModelKind::logistic);
  CHECK(uniform.normalized());
  CHECK((uniform.entries().array() - 1.0 / 3).abs().maxCoeff() < 1e-15);
  CHECK(model_from_theta(Vector::Zero(2), F, ModelKind::boost).entries() == Matrix::Ones(2, 3));
  const auto p = model_from_theta(Vector::Constant(1, std::log(3.0)), bernoulli_feature(), ModelKind::logistic);
  CHECK(p(0, 0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(p(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(code_of([] { model_from_theta(Vector::Constant(1, 800.0), bernoulli_feature(), ModelKind::boost); }) ==
        ErrorCode::Overflow);
  // Large but allowed scores stay finite under the shifted softmax.
  const auto big = model_from_theta(Vector::Constant(1, 650.0), bernoulli_feature(), ModelKind::logistic);
  CHECK(big(0, 0) == 1.0);
  CHECK(big(0, 1) > 0.0);
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Index k = rng.integer(1, 3), m = rng.integer(2, 4), nf = rng.integer(1, 3);
    std::vector<Matrix> values;
    for (Index f = 0; f < nf; ++f) {
      Matrix v(k, m);
      for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < m; ++j) v(i, j) = rng.uniform(-1, 1);
      values.push_back(v);
    }
    const auto F = FeatureSet::make(values);
    std::vector<Observation> obs;
    for (Index n = rng.integer(3, 12); n > 0; --n) obs.push_back({rng.integer(0, k - 1), rng.integer(0, m - 1)});
    const auto D = Dataset::make(obs, k, m);
    Vector theta(nf);
    for (Index f = 0; f < nf; ++f) theta(f) = rng.uniform(-2, 2);

    const Vector g = loglik_and_grad(theta, F, D).gradient;
    Vector fd(nf);
    const double h = 1e-5;
    for (Index f = 0; f < nf; ++f) {
      Vector up = theta, down = theta;
      up(f) += h;
      down(f) -= h;
      fd(f) = (loglik_and_grad(up, F, D).value - loglik_and_grad(down, F, D).value) / (2 * h);
    }
    CHECK((fd - g).lpNorm<Eigen::Infinity>() <= 1e-6 * std::max(g.lpNorm<Eigen::Infinity>(), 1e-3));
    // Gradient is the moment gap.
    CHECK((g - (empirical_moments(F, D) - model_moments(theta, F, D))).norm() < 1e-14);
  }
}

TEST_CASE("logistic fits") {
  const auto F = bernoulli_feature();
  const auto balanced = data({{0, 0}, {0, 1}}, 1, 2);
  CHECK(loglik_and_grad(Vector::Zero(1), F, balanced).gradient.norm() == 0.0);
  const auto fb = fit_logistic(balanced, F);
  CHECK(std::abs(fb.theta(0)) < 1e-9);

  const auto three = data({{0, 0}, {0, 0}, {0, 0}, {0, 1}}, 1, 2);
  const auto f3 = fit_logistic(three, F);
  CHECK(f3.theta(0) == doctest::Approx(std::log(3.0)).epsilon(1e-8));
  CHECK(std::abs(f3.theta(0) - 1.098612) < 1e-6);
  CHECK_FALSE(f3.capped);

  // Separable data: theta grows until the gradient e^-theta drops below tol,
  // or stops at the cap when tol is tighter than e^-cap.
  const auto sep = fit_logistic(data({{0, 0}, {0, 0}}, 1, 2), F);
  CHECK_FALSE(sep.capped);
  CHECK(std::exp(-sep.theta(0)) <= 1e-9);
  const auto capped = fit_logistic(data({{0, 0}, {0, 0}}, 1, 2), F, {1e-15});
  CHECK(capped.capped);
  CHECK(capped.theta(0) == LogisticOptions{}.theta_cap);

  LogisticOptions once;
  once.max_iter = 1;
  CHECK(code_of([&] { fit_logistic(three, F, once); }) == ErrorCode::NotConverged);
}

TEST_CASE("logistic fit matches moments") {
  Rng rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const auto F = FeatureSet::make({Matrix::NullaryExpr(2, 3, [&] { return rng.uniform(-1, 1); }),
                                     Matrix::NullaryExpr(2, 3, [&] { return rng.uniform(-1, 1); })});
    std::vector<Observation> obs;
    for (int n = 0; n < 12; ++n) obs.push_back({rng.integer(0, 1), rng.integer(0, 2)});
    obs.push_back({0, 0});
    obs.push_back({0, 1});
    obs.push_back({0, 2});
    const auto D = Dataset::make(obs, 2, 3);
    const auto fit = fit_logistic(D, F);
    if (fit.capped) continue;
    CHECK((empirical_moments(F, D) - model_moments(fit.theta, F, D)).lpNorm<Eigen::Infinity>() <= 1e-9);
  }
}

TEST_CASE("logistic fit minimizes the divergence on a grid") {
  Rng rng(33);
  for (int trial = 0; trial < 5; ++trial) {
    const auto F = FeatureSet::make({Matrix::NullaryExpr(2, 2, [&] { return rng.uniform(-1, 1); }),
                                     Matrix::NullaryExpr(2, 2, [&] { return rng.uniform(-1, 1); })});
    std::vector<Observation> obs;
    for (int n = 0; n < 10; ++n) obs.push_back({rng.integer(0, 1), rng.integer(0, 1)});
    const auto D = Dataset::make(obs, 2, 2);
    const auto fit = fit_logistic(D, F);
    const double best = divergence_at(fit.theta, F, D);
    double grid_min = INFINITY;
    Vector theta(2);
    for (int i = -60; i <= 60; ++i)
      for (int j = -60; j <= 60; ++j) {
        theta << 0.05 * i, 0.05 * j;
        grid_min = std::min(grid_min, divergence_at(theta, F, D));
      }
    CHECK(best <= grid_min + 1e-12);
  }
}

TEST_CASE("exponential loss") {
  const auto F = margin_features({{1, 1}});
  const auto D = data({{0, 0}, {1, 1}}, 2, 2);
  CHECK(exp_loss(Vector::Zero(1), F, D) == 1.0);
  CHECK(exp_loss(Vector::Constant(1, 0.5), F, D) == doctest::Approx(0.5 * (std::exp(-0.5) + std::exp(0.5))));
}

TEST_CASE("AdaBoost step sizes") {
  // h = +1 everywhere; labels: three points y = 0 (correct), one y = 1 (wrong).
  const auto F = margin_features({{1, 1, 1, 1}});
  const auto D = data({{0, 0}, {1, 0}, {2, 0}, {3, 1}}, 4, 2);
  const auto s = adaboost_step(Vector::Zero(1), F, D, 0);
  CHECK(s.weighted_error == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(std::abs(s.alpha - 0.5 * std::log(3.0)) <= 1e-12);
  const auto res = fit_adaboost(D, F, {1, 10.0});
  CHECK(std::abs(res.alphas[0] - 0.549306) < 1e-6);
  CHECK_FALSE(res.degenerate);

  // A learner that is always right: capped step, loss exp(-alpha_max).
  const auto perfect = data({{0, 0}, {1, 0}}, 4, 2);
  const auto sep = fit_adaboost(perfect, F, {1, 10.0});
  CHECK(sep.degenerate);
  CHECK(sep.model.capped);
  CHECK(sep.alphas[0] == 10.0);
  CHECK(sep.loss[1] == doctest::Approx(std::exp(-10.0)));

  CHECK(code_of([&] { adaboost_step(Vector::Zero(1), F, D, 3); }) == ErrorCode::IndexOutOfRange);
  const auto bad = FeatureSet::make({Matrix::Constant(4, 2, 0.5)});
  CHECK(code_of([&] { fit_adaboost(D, bad); }) == ErrorCode::InvalidArgument);
  const auto wide = FeatureSet::make({Matrix::Ones(1, 3)});
  CHECK(code_of([&] { fit_adaboost(data({{0, 0}}, 1, 3), wide); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("AdaBoost loss never increases") {
  Rng rng(34);
  for (int trial = 0; trial < 10; ++trial) {
    const Index k = 6;
    std::vector<std::vector<double>> learners(4, std::vector<double>(k));
    for (auto& h : learners)
      for (auto& v : h) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
    std::vector<Observation> obs;
    for (int n = 0; n < 20; ++n) obs.push_back({rng.integer(0, k - 1), rng.integer(0, 1)});
    const auto D = Dataset::make(obs, k, 2);
    const auto res = fit_adaboost(D, margin_features(learners), {20, 10.0});
    REQUIRE(res.loss.size() == 21);
    for (std::size_t r = 1; r < res.loss.size(); ++r) CHECK(res.loss[r] <= res.loss[r - 1] * (1 + 1e-12));
  }
}

TEST_CASE("fit diagnostics") {
  const auto F = bernoulli_feature();
  const auto three = data({{0, 0}, {0, 0}, {0, 0}, {0, 1}}, 1, 2);
  const auto exact = fit_diagnostics(three, F, fit_logistic(three, F, {1e-13}));
  CHECK(exact.divergence < 1e-20);
  CHECK(exact.quadratic < 1e-20);
  CHECK(exact.geodesic_half_sq < 1e-20);

  // Feature cannot reproduce p_hat exactly; the fit stays close.
  const auto G = FeatureSet::make({row({0, 1, 1.2})});
  const auto four = data({{0, 0}, {0, 0}, {0, 1}, {0, 2}}, 1, 3);
  const auto fit = fit_logistic(four, G);
  CHECK(fit.theta(0) == doctest::Approx(-0.621569788327422).epsilon(1e-7));
  const auto near = fit_diagnostics(four, G, fit);
  CHECK(near.divergence > 0.0);
  CHECK(std::abs(near.ratio_quadratic - 1) < 0.05);
  CHECK(std::abs(near.ratio_geodesic - 1) < 0.05);
  CHECK_FALSE(near.taylor_regime_violated);

  FittedModel far;
  far.theta = Vector::Constant(1, 6.0);
  const auto distant = fit_diagnostics(four, G, far);
  CHECK(distant.taylor_regime_violated);
  CHECK(std::abs(distant.ratio_geodesic - 1) > 0.05);
}
