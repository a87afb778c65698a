#include "cig/divergence.hpp"

#include <cmath>
#include <limits>

namespace cig {

namespace {

void check_shapes(const EmpiricalDistribution& r, Index rows, Index cols, const Matrix& other) {
  if (r.size() != rows) throw Error(ErrorCode::ShapeMismatch, "r length differs from the row count");
  if (other.rows() != rows || other.cols() != cols)
    throw Error(ErrorCode::ShapeMismatch, "models differ in shape");
}

// p log(p/q) - p + q written as p (x - log1p(x)) with x = (q - p)/p, which
// keeps full relative accuracy when q is close to p.
double pointwise(double p, double q) {
  if (p == 0.0) return q;
  if (q == 0.0) return std::numeric_limits<double>::infinity();
  const double x = (q - p) / p;
  return p * (x - std::log1p(x));
}

// sqrt(a) - sqrt(b) without cancellation.
double sqrt_diff(double a, double b) {
  const double s = std::sqrt(a) + std::sqrt(b);
  return s == 0.0 ? 0.0 : (a - b) / s;
}

}  // namespace

double i_divergence_closure(const EmpiricalDistribution& r, const Matrix& p, const Matrix& q) {
  check_shapes(r, p.rows(), p.cols(), q);
  double total = 0.0;
  for (Index x = 0; x < p.rows(); ++x) {
    if (r(x) == 0.0) continue;
    double row = 0.0;
    for (Index y = 0; y < p.cols(); ++y) {
      if (p(x, y) < 0.0 || q(x, y) < 0.0)
        throw Error(ErrorCode::NonPositiveEntry, "negative entry in non-negative mode", x, y);
      row += pointwise(p(x, y), q(x, y));
    }
    total += r(x) * row;
  }
  return total;
}

double i_divergence(const EmpiricalDistribution& r, const PositiveModel& p, const PositiveModel& q) {
  return i_divergence_closure(r, p.entries(), q.entries());
}

double quadratic_form(const EmpiricalDistribution& r, const PositiveModel& p, const TangentVector& eps) {
  check_shapes(r, p.rows(), p.cols(), eps.coeffs());
  const Matrix& e = eps.coeffs();
  return 0.5 * (r.weights().asDiagonal() * (e.array().square() / p.entries().array()).matrix()).sum();
}

Matrix weighted_model(const EmpiricalDistribution& r, const Matrix& p) {
  if (r.size() != p.rows()) throw Error(ErrorCode::ShapeMismatch, "r length differs from the row count");
  return r.weights().asDiagonal() * p;
}

std::vector<DivergenceReport> taylor_report(const EmpiricalDistribution& r, const PositiveModel& p,
                                            const TangentVector& eps, const std::vector<double>& steps) {
  check_shapes(r, p.rows(), p.cols(), eps.coeffs());
  std::vector<DivergenceReport> reports;
  for (double t : steps) {
    if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveArgument, "steps must be positive");
    const Matrix q = p.entries() + t * eps.coeffs();
    if (!(q.minCoeff() > 0.0))
      throw Error(ErrorCode::PerturbationLeavesCone, "p + t eps has a non-positive entry at t = " +
                                                         std::to_string(t));
    DivergenceReport rep;
    rep.t = t;
    rep.divergence = i_divergence_closure(r, p.entries(), q);
    rep.quadratic = quadratic_form(r, p, TangentVector::make(t * eps.coeffs()));
    rep.abs_error = std::abs(rep.divergence - rep.quadratic);
    rep.cancellation_dominated = t < 1e-5;
    reports.push_back(rep);
  }
  return reports;
}

DivergenceGeodesic divergence_vs_geodesic(const EmpiricalDistribution& r, const PositiveModel& p,
                                          const PositiveModel& q) {
  if (!p.normalized() || !q.normalized())
    throw Error(ErrorCode::NotNormalized, "both models must be normalized");
  check_shapes(r, p.rows(), p.cols(), q.entries());
  const Matrix rp = weighted_model(r, p.entries());
  const Matrix rq = weighted_model(r, q.entries());

  DivergenceGeodesic out;
  out.divergence = i_divergence(r, p, q);
  // d = 2 ||sqrt(rp) - sqrt(rq)|| for C(t) = 1/t, so d^2 / 2 = 2 ||.||^2.
  double chord_sq = 0.0;
  for (Index x = 0; x < rp.rows(); ++x)
    for (Index y = 0; y < rp.cols(); ++y) {
      const double d = sqrt_diff(rp(x, y), rq(x, y));
      chord_sq += d * d;
    }
  out.half_sq_distance = 2.0 * chord_sq;
  out.ratio = (out.divergence == 0.0 && out.half_sq_distance == 0.0)
                  ? 1.0
                  : out.divergence / out.half_sq_distance;
  return out;
}

}  // namespace cig
