#include "cig/fitting.hpp"

#include "cig/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cig {

const char* to_string(ModelKind kind) {
  return kind == ModelKind::logistic ? "logistic" : "boost";
}

Dataset Dataset::make(std::vector<Observation> observations, Index k, Index m) {
  if (k < 1 || m < 2) throw Error(ErrorCode::BadShape, "need k >= 1 and m >= 2");
  if (observations.empty()) throw Error(ErrorCode::EmptyDataset, "no observations");
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& o = observations[i];
    if (o.x < 0 || o.x >= k || o.y < 0 || o.y >= m)
      throw Error(ErrorCode::IndexOutOfRange, "observation " + std::to_string(i + 1), o.x, o.y);
  }
  return Dataset(std::move(observations), k, m);
}

FeatureSet FeatureSet::make(std::vector<Matrix> values) {
  if (values.empty()) throw Error(ErrorCode::BadShape, "need at least one feature");
  for (std::size_t f = 0; f < values.size(); ++f) {
    if (values[f].rows() != values.front().rows() || values[f].cols() != values.front().cols())
      throw Error(ErrorCode::ShapeMismatch, "features differ in shape", static_cast<Index>(f));
    if (!values[f].allFinite())
      throw Error(ErrorCode::InvalidArgument, "non-finite feature value", static_cast<Index>(f));
  }
  return FeatureSet(std::move(values));
}

Matrix FeatureSet::scores(const Vector& theta) const {
  if (theta.size() != count()) throw Error(ErrorCode::ShapeMismatch, "theta length differs from F");
  Matrix s = Matrix::Zero(k(), m());
  for (Index f = 0; f < count(); ++f) s += theta(f) * values_[static_cast<std::size_t>(f)];
  return s;
}

namespace {

void check_compatible(const FeatureSet& features, const Dataset& data) {
  if (features.k() != data.k() || features.m() != data.m())
    throw Error(ErrorCode::ShapeMismatch, "feature shape differs from the dataset domain");
}

Matrix checked_scores(const Vector& theta, const FeatureSet& features) {
  Matrix s = features.scores(theta);
  if (!(s.cwiseAbs().maxCoeff() <= kMaxScore))
    throw Error(ErrorCode::Overflow, "|<theta, F>| exceeds " + std::to_string(kMaxScore));
  return s;
}

// Row-wise log-softmax with max shift.
Matrix log_softmax(const Matrix& scores) {
  Matrix out = scores;
  for (Index x = 0; x < out.rows(); ++x) {
    const double shift = out.row(x).maxCoeff();
    const double lse = shift + std::log((out.row(x).array() - shift).exp().sum());
    out.row(x).array() -= lse;
  }
  return out;
}

double mean_loglik(const Matrix& log_p, const Dataset& data) {
  double sum = 0.0;
  for (const auto& o : data.observations()) sum += log_p(o.x, o.y);
  return sum / static_cast<double>(data.size());
}

Vector expected_features(const Matrix& p, const Vector& r, const FeatureSet& features) {
  Vector out(features.count());
  for (Index f = 0; f < features.count(); ++f)
    out(f) = (r.asDiagonal() * p.cwiseProduct(features[f])).sum();
  return out;
}

Vector clamp(Vector theta, double cap) { return theta.cwiseMax(-cap).cwiseMin(cap); }

// Zeroes gradient components that push a capped coordinate further out.
Vector projected(const Vector& grad, const Vector& theta, double cap) {
  Vector pg = grad;
  for (Index f = 0; f < pg.size(); ++f) {
    if (theta(f) >= cap && pg(f) > 0.0) pg(f) = 0.0;
    if (theta(f) <= -cap && pg(f) < 0.0) pg(f) = 0.0;
  }
  return pg;
}

// sum_x r(x) Cov_{p(.|x)}[F], the negative Hessian of the mean log-likelihood.
Matrix information(const Matrix& p, const Vector& r, const FeatureSet& features) {
  const Index n = features.count();
  Matrix H = Matrix::Zero(n, n);
  Vector fy(n);
  for (Index x = 0; x < p.rows(); ++x) {
    if (r(x) == 0.0) continue;
    Vector mean = Vector::Zero(n);
    Matrix second = Matrix::Zero(n, n);
    for (Index y = 0; y < p.cols(); ++y) {
      for (Index f = 0; f < n; ++f) fy(f) = features[f](x, y);
      mean += p(x, y) * fy;
      second += p(x, y) * fy * fy.transpose();
    }
    H += r(x) * (second - mean * mean.transpose());
  }
  return H;
}

// Newton direction on the coordinates not pinned at the cap; falls back to
// the projected gradient when the information is singular there.
Vector ascent_direction(const Matrix& H, const Vector& pg) {
  std::vector<Index> free;
  for (Index f = 0; f < pg.size(); ++f)
    if (pg(f) != 0.0) free.push_back(f);
  const auto n = static_cast<Index>(free.size());
  Matrix Hf(n, n);
  Vector gf(n);
  for (Index i = 0; i < n; ++i) {
    gf(i) = pg(free[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < n; ++j) Hf(i, j) = H(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
  }
  const Eigen::LDLT<Matrix> ldlt(Hf);
  Vector df = ldlt.info() == Eigen::Success ? Vector(ldlt.solve(gf)) : gf;
  if (!df.allFinite() || !(df.dot(gf) > 0.0) || ldlt.vectorD().minCoeff() <= 1e-12 * Hf.trace()) df = gf;
  Vector d = Vector::Zero(pg.size());
  for (Index i = 0; i < n; ++i) d(free[static_cast<std::size_t>(i)]) = df(i);
  return d;
}

// Margins F(f, x_i, y_i), checked to be +-1.
Matrix margins(const FeatureSet& features, const Dataset& data) {
  Matrix u(data.size(), features.count());
  for (Index i = 0; i < data.size(); ++i) {
    const auto& o = data.observations()[static_cast<std::size_t>(i)];
    for (Index f = 0; f < features.count(); ++f) {
      const double v = features[f](o.x, o.y);
      if (v != 1.0 && v != -1.0)
        throw Error(ErrorCode::InvalidArgument, "boosting features must be +-1 on observed pairs", f);
      u(i, f) = v;
    }
  }
  return u;
}

// Normalized example weights exp(-<theta, u_i>).
Vector boost_weights(const Matrix& u, const Vector& theta) {
  const Vector e = -(u * theta);
  const double shift = e.maxCoeff();
  Vector w = (e.array() - shift).exp();
  return w / w.sum();
}

WeakLearnerStep step_for(const Vector& w, const Matrix& u, Index f, double alpha_max) {
  WeakLearnerStep s;
  for (Index i = 0; i < u.rows(); ++i)
    if (u(i, f) < 0.0) s.weighted_error += w(i);
  if (s.weighted_error <= 0.0) {
    s.alpha = alpha_max;
  } else if (s.weighted_error >= 1.0) {
    s.alpha = -alpha_max;
  } else {
    s.alpha = std::clamp(0.5 * std::log((1.0 - s.weighted_error) / s.weighted_error), -alpha_max,
                         alpha_max);
  }
  return s;
}

double quadratic_closure(const Vector& r, const Matrix& p, const Matrix& q) {
  double sum = 0.0;
  for (Index x = 0; x < p.rows(); ++x) {
    if (r(x) == 0.0) continue;
    for (Index y = 0; y < p.cols(); ++y) {
      const double e = q(x, y) - p(x, y);
      if (e == 0.0) continue;
      if (p(x, y) == 0.0) return std::numeric_limits<double>::infinity();
      sum += r(x) * e * e / p(x, y);
    }
  }
  return 0.5 * sum;
}

double ratio_or_one(double num, double den) {
  if (num == 0.0 && den == 0.0) return 1.0;
  return num / den;
}

}  // namespace

Empirical empirical(const Dataset& data) {
  Matrix counts = Matrix::Zero(data.k(), data.m());
  for (const auto& o : data.observations()) counts(o.x, o.y) += 1.0;
  const Vector row_counts = counts.rowwise().sum();
  Matrix p_hat(data.k(), data.m());
  for (Index x = 0; x < data.k(); ++x) {
    if (row_counts(x) > 0.0)
      p_hat.row(x) = counts.row(x) / row_counts(x);
    else
      p_hat.row(x).setConstant(1.0 / static_cast<double>(data.m()));
  }
  Vector r = row_counts / static_cast<double>(data.size());
  r /= r.sum();
  return {EmpiricalDistribution::make(std::move(r)), std::move(p_hat)};
}

PositiveModel model_from_theta(const Vector& theta, const FeatureSet& features, ModelKind kind) {
  const Matrix s = checked_scores(theta, features);
  if (kind == ModelKind::boost) return PositiveModel::make(s.array().exp().matrix());
  Matrix p = log_softmax(s).array().exp().matrix();
  // Renormalize away rounding in exp so the row-sum invariant holds tightly.
  for (Index x = 0; x < p.rows(); ++x) p.row(x) /= p.row(x).sum();
  return PositiveModel::make(std::move(p), true);
}

Vector empirical_moments(const FeatureSet& features, const Dataset& data) {
  check_compatible(features, data);
  Vector out = Vector::Zero(features.count());
  for (const auto& o : data.observations())
    for (Index f = 0; f < features.count(); ++f) out(f) += features[f](o.x, o.y);
  return out / static_cast<double>(data.size());
}

Vector model_moments(const Vector& theta, const FeatureSet& features, const Dataset& data) {
  check_compatible(features, data);
  const Matrix p = log_softmax(checked_scores(theta, features)).array().exp().matrix();
  return expected_features(p, empirical(data).r.weights(), features);
}

LogLikelihood loglik_and_grad(const Vector& theta, const FeatureSet& features, const Dataset& data) {
  check_compatible(features, data);
  const Matrix log_p = log_softmax(checked_scores(theta, features));
  const Matrix p = log_p.array().exp().matrix();
  const Vector r = empirical(data).r.weights();
  return {mean_loglik(log_p, data),
          empirical_moments(features, data) - expected_features(p, r, features)};
}

FittedModel fit_logistic(const Dataset& data, const FeatureSet& features, const LogisticOptions& opts) {
  check_compatible(features, data);
  FittedModel fit;
  fit.kind = ModelKind::logistic;
  fit.theta = Vector::Zero(features.count());
  const Vector r = empirical(data).r.weights();

  LogLikelihood cur = loglik_and_grad(fit.theta, features, data);
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const Vector pg = projected(cur.gradient, fit.theta, opts.theta_cap);
    const double pg_norm = pg.lpNorm<Eigen::Infinity>();
    if (pg_norm <= opts.tol) {
      fit.iterations = iter;
      fit.capped = (fit.theta.cwiseAbs().array() >= opts.theta_cap).any();
      return fit;
    }
    const Matrix p = model_from_theta(fit.theta, features, ModelKind::logistic).entries();
    const Vector d = ascent_direction(information(p, r, features), pg);

    // Backtracking. Near the optimum the gain drops below the resolution of
    // the objective; a step that leaves it unchanged to rounding but shrinks
    // the projected gradient is accepted then.
    const double flat = 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(cur.value));
    bool accepted = false;
    for (double step = opts.initial_step; step > 1e-16; step *= opts.shrink) {
      const Vector trial = clamp(fit.theta + step * d, opts.theta_cap);
      const LogLikelihood next = loglik_and_grad(trial, features, data);
      const double gain = next.value - cur.value;
      const bool sufficient = gain >= opts.armijo * pg.dot(trial - fit.theta);
      const bool stalled = std::abs(gain) <= flat &&
                           projected(next.gradient, trial, opts.theta_cap).lpNorm<Eigen::Infinity>() < pg_norm;
      if (sufficient || stalled) {
        fit.theta = trial;
        cur = next;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw Error(ErrorCode::NotConverged, "line search stalled with projected gradient " + std::to_string(pg_norm));
  }
  throw Error(ErrorCode::NotConverged,
              "no convergence to tol within " + std::to_string(opts.max_iter) + " iterations");
}

double exp_loss(const Vector& theta, const FeatureSet& features, const Dataset& data) {
  check_compatible(features, data);
  if (theta.size() != features.count())
    throw Error(ErrorCode::ShapeMismatch, "theta length differs from F");
  Vector e(data.size());
  for (Index i = 0; i < data.size(); ++i) {
    const auto& o = data.observations()[static_cast<std::size_t>(i)];
    double s = 0.0;
    for (Index f = 0; f < features.count(); ++f) s += theta(f) * features[f](o.x, o.y);
    e(i) = -s;
  }
  if (!(e.cwiseAbs().maxCoeff() <= kMaxScore))
    throw Error(ErrorCode::Overflow, "margin exceeds " + std::to_string(kMaxScore));
  return e.array().exp().mean();
}

WeakLearnerStep adaboost_step(const Vector& theta, const FeatureSet& features, const Dataset& data,
                              Index feature, double alpha_max) {
  check_compatible(features, data);
  if (data.m() != 2) throw Error(ErrorCode::InvalidArgument, "boosting needs a binary response");
  if (feature < 0 || feature >= features.count())
    throw Error(ErrorCode::IndexOutOfRange, "feature index", feature);
  const Matrix u = margins(features, data);
  return step_for(boost_weights(u, theta), u, feature, alpha_max);
}

AdaBoostResult fit_adaboost(const Dataset& data, const FeatureSet& features, const AdaBoostOptions& opts) {
  check_compatible(features, data);
  if (data.m() != 2) throw Error(ErrorCode::InvalidArgument, "boosting needs a binary response");
  const Matrix u = margins(features, data);

  AdaBoostResult res;
  res.model.kind = ModelKind::boost;
  res.model.theta = Vector::Zero(features.count());
  res.loss.push_back(exp_loss(res.model.theta, features, data));
  for (int round = 0; round < opts.rounds; ++round) {
    const Vector w = boost_weights(u, res.model.theta);
    // Largest |edge| = |1 - 2 eps|; ties go to the lowest index.
    Index best = 0;
    WeakLearnerStep best_step = step_for(w, u, 0, opts.alpha_max);
    for (Index f = 1; f < features.count(); ++f) {
      const WeakLearnerStep s = step_for(w, u, f, opts.alpha_max);
      if (std::abs(1.0 - 2.0 * s.weighted_error) > std::abs(1.0 - 2.0 * best_step.weighted_error)) {
        best = f;
        best_step = s;
      }
    }
    if (best_step.weighted_error <= 0.0 || best_step.weighted_error >= 1.0) {
      res.degenerate = true;
      res.model.capped = true;
    }
    res.model.theta(best) += best_step.alpha;
    res.alphas.push_back(best_step.alpha);
    res.chosen.push_back(best);
    res.loss.push_back(exp_loss(res.model.theta, features, data));
    res.model.iterations = round + 1;
  }
  return res;
}

FitDiagnostics fit_diagnostics(const Dataset& data, const FeatureSet& features, const FittedModel& fitted) {
  check_compatible(features, data);
  const Empirical emp = empirical(data);
  const Matrix q = model_from_theta(fitted.theta, features, fitted.kind).entries();
  const Vector& r = emp.r.weights();

  FitDiagnostics d;
  d.divergence = i_divergence_closure(emp.r, emp.p_hat, q);
  d.quadratic = quadratic_closure(r, emp.p_hat, q);
  // Fisher choice C(t) = 1/(2t): d = sqrt(2) ||sqrt(r p_hat) - sqrt(r q)||.
  const Matrix rp = weighted_model(emp.r, emp.p_hat);
  const Matrix rq = weighted_model(emp.r, q);
  d.geodesic_half_sq = 2.0 * (rp.cwiseSqrt() - rq.cwiseSqrt()).squaredNorm();
  d.ratio_quadratic = ratio_or_one(d.quadratic, d.divergence);
  d.ratio_geodesic = ratio_or_one(d.geodesic_half_sq, d.divergence);
  d.taylor_regime_violated = !(std::abs(d.ratio_quadratic - 1.0) <= kTaylorRegimeTol &&
                               std::abs(d.ratio_geodesic - 1.0) <= kTaylorRegimeTol);
  return d;
}

}  // namespace cig
