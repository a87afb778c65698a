#pragma once

// Conditional I-divergence
//
//   D_r(p, q) = sum_x r(x) sum_y ( p log(p/q) - p + q )
//
// and its second-order expansion D_r(p, p + eps) ~ 1/2 sum r eps^2 / p,
// which is the squared length of r(x) eps(y, x) at r(x) p(y|x) under the
// metric A = B = 0, C(t) = 1/(2t).

#include "cig/core.hpp"

#include <vector>

namespace cig {

double i_divergence(const EmpiricalDistribution& r, const PositiveModel& p, const PositiveModel& q);

/// Divergence on the closure of the cone: entries may be zero. Uses
/// 0 log(0/q) = 0 and returns +infinity when some q entry is zero where p is
/// positive on a row with r(x) > 0.
double i_divergence_closure(const EmpiricalDistribution& r, const Matrix& p, const Matrix& q);

// 1/2 sum_xy r(x) eps(y,x)^2 / p(y|x). p + eps need not be positive.
double quadratic_form(const EmpiricalDistribution& r, const PositiveModel& p, const TangentVector& eps);

// The k x m matrix r(x) p(y|x). Rows with r(x) = 0 stay as zero rows.
Matrix weighted_model(const EmpiricalDistribution& r, const Matrix& p);

struct DivergenceReport {
  double t = 0.0;
  double divergence = 0.0;
  double quadratic = 0.0;
  double abs_error = 0.0;
  // Below t = 1e-5 the error estimate is dominated by rounding.
  bool cancellation_dominated = false;
};

inline const std::vector<double> kDefaultTaylorSteps = {1e-1, 1e-2, 1e-3, 1e-4};

std::vector<DivergenceReport> taylor_report(const EmpiricalDistribution& r, const PositiveModel& p,
                                            const TangentVector& eps,
                                            const std::vector<double>& steps = kDefaultTaylorSteps);

struct DivergenceGeodesic {
  double divergence = 0.0;
  // 1/2 d^2 under the product Fisher cone metric sum u^2 / M, between
  // r p and r q; equals the Fisher-choice squared distance.
  double half_sq_distance = 0.0;
  // divergence / half_sq_distance, with 0/0 := 1.
  double ratio = 1.0;
};

DivergenceGeodesic divergence_vs_geodesic(const EmpiricalDistribution& r, const PositiveModel& p,
                                          const PositiveModel& q);

}  // namespace cig
