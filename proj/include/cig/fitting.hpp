#pragma once

// Logistic regression and AdaBoost as conditional exponential models fitted
// by constrained I-divergence minimization, at desk scale.
//
// A feature set holds F real functions on X x Y. The logistic model is
//   p(y|x) = exp(<theta, F(., x, y)>) / sum_y' exp(<theta, F(., x, y')>)
// and the boosting model is the unnormalized q(y|x) = exp(<theta, F(., x, y)>).

#include "cig/core.hpp"

#include <string>
#include <vector>

namespace cig {

struct Observation {
  Index x = 0;
  Index y = 0;
};

class Dataset {
 public:
  static Dataset make(std::vector<Observation> observations, Index k, Index m);

  Index k() const noexcept { return k_; }
  Index m() const noexcept { return m_; }
  Index size() const noexcept { return static_cast<Index>(obs_.size()); }
  const std::vector<Observation>& observations() const noexcept { return obs_; }

 private:
  Dataset(std::vector<Observation> obs, Index k, Index m) : obs_(std::move(obs)), k_(k), m_(m) {}

  std::vector<Observation> obs_;
  Index k_;
  Index m_;
};

class FeatureSet {
 public:
  // values[f](x, y) is feature f at (x, y).
  static FeatureSet make(std::vector<Matrix> values);

  Index count() const noexcept { return static_cast<Index>(values_.size()); }
  Index k() const noexcept { return values_.front().rows(); }
  Index m() const noexcept { return values_.front().cols(); }
  const Matrix& operator[](Index f) const { return values_.at(static_cast<std::size_t>(f)); }
  const std::vector<Matrix>& values() const noexcept { return values_; }

  // sum_f theta_f values[f]
  Matrix scores(const Vector& theta) const;

 private:
  explicit FeatureSet(std::vector<Matrix> values) : values_(std::move(values)) {}

  std::vector<Matrix> values_;
};

enum class ModelKind { logistic, boost };

const char* to_string(ModelKind kind);

struct FittedModel {
  Vector theta;
  ModelKind kind = ModelKind::logistic;
  int iterations = 0;
  // Some coordinate sits at the cap (separable data or a degenerate weak
  // learner); theta is the best capped value.
  bool capped = false;
};

struct Empirical {
  EmpiricalDistribution r;
  // count(x, y) / count(x); uniform rows for unobserved x.
  Matrix p_hat;
};

Empirical empirical(const Dataset& data);

// Scores beyond this magnitude are rejected with Overflow.
inline constexpr double kMaxScore = 700.0;

PositiveModel model_from_theta(const Vector& theta, const FeatureSet& features, ModelKind kind);

struct LogLikelihood {
  double value = 0.0;
  // E_hat[f] - sum_x r(x) E_{p_theta(.|x)}[f]
  Vector gradient;
};

LogLikelihood loglik_and_grad(const Vector& theta, const FeatureSet& features, const Dataset& data);

// Empirical feature expectations (1/N) sum_i F(f, x_i, y_i).
Vector empirical_moments(const FeatureSet& features, const Dataset& data);
// sum_x r(x) sum_y p(y|x) F(f, x, y).
Vector model_moments(const Vector& theta, const FeatureSet& features, const Dataset& data);

struct LogisticOptions {
  double tol = 1e-9;  // on the infinity norm of the (projected) gradient
  int max_iter = 1000;
  double theta_cap = 30.0;
  double armijo = 1e-4;
  double shrink = 0.5;
  double initial_step = 1.0;
};

/// Damped Newton ascent on the mean log-likelihood, theta kept in
/// [-theta_cap, theta_cap]. Throws NotConverged after max_iter iterations or
/// when the line search stalls.
FittedModel fit_logistic(const Dataset& data, const FeatureSet& features,
                         const LogisticOptions& opts = {});

// (1/N) sum_i exp(-sum_f theta_f F(f, x_i, y_i)).
double exp_loss(const Vector& theta, const FeatureSet& features, const Dataset& data);

struct AdaBoostOptions {
  int rounds = 20;
  double alpha_max = 10.0;
};

struct AdaBoostResult {
  FittedModel model;
  std::vector<double> loss;     // loss[0] at theta = 0, loss[r] after round r
  std::vector<double> alphas;
  std::vector<Index> chosen;
  bool degenerate = false;      // some round hit a weighted error of 0 or 1
};

/// Coordinate descent on the exponential loss. Needs m = 2 and feature
/// values in {-1, +1} on every observed (x, y): F(f, x, y) is the margin
/// h_f(x) * label(y) of weak learner f.
AdaBoostResult fit_adaboost(const Dataset& data, const FeatureSet& features,
                            const AdaBoostOptions& opts = {});

// First-round weighted error and step of weak learner f at the given theta.
struct WeakLearnerStep {
  double weighted_error = 0.0;
  double alpha = 0.0;
};
WeakLearnerStep adaboost_step(const Vector& theta, const FeatureSet& features, const Dataset& data,
                              Index feature, double alpha_max = AdaBoostOptions{}.alpha_max);

struct FitDiagnostics {
  double divergence = 0.0;          // D_r(p_hat, model), possibly +inf
  double quadratic = 0.0;           // 1/2 sum r (model - p_hat)^2 / p_hat
  double geodesic_half_sq = 0.0;    // Fisher-choice squared distance of r p_hat, r model
  double ratio_quadratic = 1.0;     // quadratic / divergence
  double ratio_geodesic = 1.0;      // geodesic_half_sq / divergence
  bool taylor_regime_violated = false;
};

// Ratios more than this far from 1 flag the Taylor regime as violated.
inline constexpr double kTaylorRegimeTol = 0.05;

FitDiagnostics fit_diagnostics(const Dataset& data, const FeatureSet& features,
                               const FittedModel& fitted);

}  // namespace cig
