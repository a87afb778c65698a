#pragma once

// The invariant metric family on the cone of positive conditional models,
//
//   g_M(d_ab, d_cd) = A(|M|) + [a == c] * ( |M| / |M_a| * B(|M|)
//                                          + [b == d] * |M| / M_ab * C(|M|) ),
//
// its bilinear extension to tangent vectors, the product Fisher form it
// reduces to on normalized models, and closed-form geodesic distances for
// the metrics with A = B = 0 and C(t) = c / t.

#include "cig/core.hpp"

#include <string>
#include <string_view>

namespace cig {

/// A smooth function on the positive reals drawn from one of three
/// analytic families.
struct ScalarField {
  enum class Kind { constant, reciprocal, power };

  Kind kind = Kind::constant;
  double coeff = 0.0;
  double exponent = 0.0;  // only used by Kind::power

  static ScalarField constant(double c) { return {Kind::constant, c, 0.0}; }
  // t -> c / t
  static ScalarField reciprocal(double c) { return {Kind::reciprocal, c, 0.0}; }
  // t -> c * t^p
  static ScalarField power(double c, double p) { return {Kind::power, c, p}; }

  double operator()(double t) const;

  friend bool operator==(const ScalarField&, const ScalarField&) = default;
};

double eval_scalar(const ScalarField& f, double t);

struct MetricParams {
  ScalarField A;
  ScalarField B;
  ScalarField C;

  // A = B = 0, C(t) = 1/(2t).
  static MetricParams fisher();
  // A = B = 0, C(t) = c/t. Squared lengths are c * sum u_ij^2 / M_ij.
  static MetricParams cone(double c);

  friend bool operator==(const MetricParams&, const MetricParams&) = default;
};

// Grammar: "fisher" | "abc:A=<fn>;B=<fn>;C=<fn>" with
// <fn> in {const:<v>, recip:<v>, pow:<c>,<p>}.
MetricParams parse_metric_spec(std::string_view spec);
std::string format_metric_spec(const MetricParams& params);

struct BasisIndex {
  Index row = 0;
  Index col = 0;
  friend bool operator==(const BasisIndex&, const BasisIndex&) = default;
};

double metric_basis(const MetricParams& params, const PositiveModel& model,
                    BasisIndex ab, BasisIndex cd);

double inner_product(const MetricParams& params, const PositiveModel& model,
                     const TangentVector& u, const TangentVector& v);

// scale * sum_ij u_ij v_ij / M_ij on a normalized model; with scale = k C(k)
// this equals inner_product for any A and B.
double fisher_inner_product(const PositiveModel& model, const TangentVector& u,
                            const TangentVector& v, double scale);

// km x km matrix indexed by row-major flattening (a, b) -> a * m + b.
Matrix gram_matrix(const MetricParams& params, const PositiveModel& model);

// Distance for A = B = 0, C(t) = c/t via the square-root embedding:
// 2 sqrt(c) || sqrt(M) - sqrt(N) ||_F.
double geodesic_distance_cone(const PositiveModel& m, const PositiveModel& n, double c);

// Product Fisher metric lambda * sum u v / p on normalized models:
// sqrt(lambda) * sqrt(sum_i (2 acos(BC_i))^2), BC_i the row Bhattacharyya
// coefficient.
double geodesic_distance_normalized(const PositiveModel& p, const PositiveModel& q,
                                    double lambda);

}  // namespace cig
