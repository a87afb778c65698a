#include "cig/metric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>

namespace cig {

double ScalarField::operator()(double t) const {
  if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveArgument, "scalar field evaluated at t <= 0");
  switch (kind) {
    case Kind::constant: return coeff;
    case Kind::reciprocal: return coeff / t;
    case Kind::power: return coeff * std::pow(t, exponent);
  }
  return 0.0;
}

double eval_scalar(const ScalarField& f, double t) { return f(t); }

MetricParams MetricParams::fisher() { return cone(0.5); }

MetricParams MetricParams::cone(double c) {
  return {ScalarField::constant(0.0), ScalarField::constant(0.0), ScalarField::reciprocal(c)};
}

namespace {

double parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    throw Error(ErrorCode::Parse, "bad number '" + std::string(text) + "'");
  return value;
}

ScalarField parse_field(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorCode::Parse, "expected <family>:<args> in '" + std::string(text) + "'");
  const auto family = text.substr(0, colon);
  const auto args = text.substr(colon + 1);
  if (family == "const") return ScalarField::constant(parse_double(args));
  if (family == "recip") return ScalarField::reciprocal(parse_double(args));
  if (family == "pow") {
    const auto comma = args.find(',');
    if (comma == std::string_view::npos) throw Error(ErrorCode::Parse, "pow needs <c>,<p>");
    return ScalarField::power(parse_double(args.substr(0, comma)),
                              parse_double(args.substr(comma + 1)));
  }
  throw Error(ErrorCode::Parse, "unknown scalar family '" + std::string(family) + "'");
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_field(const ScalarField& f) {
  switch (f.kind) {
    case ScalarField::Kind::constant: return "const:" + format_number(f.coeff);
    case ScalarField::Kind::reciprocal: return "recip:" + format_number(f.coeff);
    case ScalarField::Kind::power:
      return "pow:" + format_number(f.coeff) + "," + format_number(f.exponent);
  }
  return {};
}

void check_same_shape(const PositiveModel& model, const TangentVector& v) {
  if (v.rows() != model.rows() || v.cols() != model.cols())
    throw Error(ErrorCode::ShapeMismatch, "tangent shape differs from model shape");
}

}  // namespace

MetricParams parse_metric_spec(std::string_view spec) {
  if (spec == "fisher") return MetricParams::fisher();
  constexpr std::string_view prefix = "abc:";
  if (!spec.starts_with(prefix))
    throw Error(ErrorCode::Parse, "metric spec must be 'fisher' or 'abc:...'");
  spec.remove_prefix(prefix.size());

  std::optional<ScalarField> fields[3];
  while (!spec.empty()) {
    const auto semi = spec.find(';');
    const auto item = spec.substr(0, semi);
    spec = semi == std::string_view::npos ? std::string_view{} : spec.substr(semi + 1);
    if (item.size() < 3 || item[1] != '=')
      throw Error(ErrorCode::Parse, "expected A=, B= or C= in '" + std::string(item) + "'");
    const int slot = item[0] == 'A' ? 0 : item[0] == 'B' ? 1 : item[0] == 'C' ? 2 : -1;
    if (slot < 0 || fields[slot])
      throw Error(ErrorCode::Parse, "unknown or repeated slot '" + std::string(item) + "'");
    fields[slot] = parse_field(item.substr(2));
  }
  if (!fields[0] || !fields[1] || !fields[2])
    throw Error(ErrorCode::Parse, "metric spec needs all of A, B and C");
  // C must be positive on (0, inf); for all three families that is coeff > 0.
  if (!(fields[2]->coeff > 0.0))
    throw Error(ErrorCode::InvalidArgument, "C must be positive on the positive reals");
  return {*fields[0], *fields[1], *fields[2]};
}

std::string format_metric_spec(const MetricParams& params) {
  return "abc:A=" + format_field(params.A) + ";B=" + format_field(params.B) +
         ";C=" + format_field(params.C);
}

double metric_basis(const MetricParams& params, const PositiveModel& model,
                    BasisIndex ab, BasisIndex cd) {
  for (const auto& idx : {ab, cd})
    if (idx.row < 0 || idx.row >= model.rows() || idx.col < 0 || idx.col >= model.cols())
      throw Error(ErrorCode::IndexOutOfRange, "basis index", idx.row, idx.col);

  const double total = l1_norm(model);
  double g = params.A(total);
  if (ab.row == cd.row) {
    g += total / model.entries().row(ab.row).sum() * params.B(total);
    if (ab.col == cd.col) g += total / model(ab.row, ab.col) * params.C(total);
  }
  return g;
}

double inner_product(const MetricParams& params, const PositiveModel& model,
                     const TangentVector& u, const TangentVector& v) {
  check_same_shape(model, u);
  check_same_shape(model, v);
  const Matrix& M = model.entries();
  const double total = M.sum();

  // The double sum over basis pairs collapses into three terms: the total
  // coefficient sums, the per-row coefficient sums and the diagonal.
  const double a_term = u.coeffs().sum() * v.coeffs().sum() * params.A(total);
  const Vector row_weights = total * M.rowwise().sum().cwiseInverse();
  const double b_term = (u.coeffs().rowwise().sum().cwiseProduct(v.coeffs().rowwise().sum()))
                            .dot(row_weights) * params.B(total);
  const double c_term =
      (u.coeffs().array() * v.coeffs().array() / M.array()).sum() * total * params.C(total);
  return a_term + b_term + c_term;
}

double fisher_inner_product(const PositiveModel& model, const TangentVector& u,
                            const TangentVector& v, double scale) {
  check_same_shape(model, u);
  check_same_shape(model, v);
  if (!model.normalized())
    throw Error(ErrorCode::NotNormalized, "product Fisher form needs a normalized model");
  for (const auto* t : {&u, &v})
    for (Index i = 0; i < t->rows(); ++i)
      if (std::abs(t->coeffs().row(i).sum()) > kConstraintTol)
        throw Error(ErrorCode::RowSumNotZero, "", i);
  return scale * (u.coeffs().array() * v.coeffs().array() / model.entries().array()).sum();
}

Matrix gram_matrix(const MetricParams& params, const PositiveModel& model) {
  const Index k = model.rows();
  const Index m = model.cols();
  Matrix G(k * m, k * m);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < m; ++b)
      for (Index c = 0; c < k; ++c)
        for (Index d = 0; d < m; ++d)
          G(a * m + b, c * m + d) = metric_basis(params, model, {a, b}, {c, d});
  return G;
}

double geodesic_distance_cone(const PositiveModel& m, const PositiveModel& n, double c) {
  if (m.rows() != n.rows() || m.cols() != n.cols())
    throw Error(ErrorCode::ShapeMismatch, "models differ in shape");
  if (!(c > 0.0)) throw Error(ErrorCode::NonPositiveArgument, "c must be positive");
  const double chord = (m.entries().cwiseSqrt() - n.entries().cwiseSqrt()).norm();
  return 2.0 * std::sqrt(c) * chord;
}

double geodesic_distance_normalized(const PositiveModel& p, const PositiveModel& q,
                                    double lambda) {
  if (p.rows() != q.rows() || p.cols() != q.cols())
    throw Error(ErrorCode::ShapeMismatch, "models differ in shape");
  if (!p.normalized() || !q.normalized())
    throw Error(ErrorCode::NotNormalized, "both models must be normalized");
  if (!(lambda > 0.0)) throw Error(ErrorCode::NonPositiveArgument, "lambda must be positive");
  // 2 acos(BC) written as 4 asin(|sqrt(p_i) - sqrt(q_i)| / 2): identical on
  // normalized rows and free of the acos cancellation near BC = 1.
  const Matrix diff = p.entries().cwiseSqrt() - q.entries().cwiseSqrt();
  double sum_sq = 0.0;
  for (Index i = 0; i < diff.rows(); ++i) {
    const double angle = 4.0 * std::asin(std::clamp(0.5 * diff.row(i).norm(), 0.0, 1.0));
    sum_sq += angle * angle;
  }
  return std::sqrt(lambda) * std::sqrt(sum_sq);
}

}  // namespace cig
