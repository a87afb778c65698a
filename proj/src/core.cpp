#include "cig/core.hpp"

#include <cmath>

namespace cig {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::RowIndexOutOfRange: return "RowIndexOutOfRange";
    case ErrorCode::RowSumNotZero: return "RowSumNotZero";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonPositiveArgument: return "NonPositiveArgument";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::Overlap: return "Overlap";
    case ErrorCode::Gap: return "Gap";
    case ErrorCode::EmptyBlock: return "EmptyBlock";
    case ErrorCode::NotAStochastic: return "NotAStochastic";
    case ErrorCode::NotAPermutation: return "NotAPermutation";
    case ErrorCode::NotComposable: return "NotComposable";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::SizeCapExceeded: return "SizeCapExceeded";
    case ErrorCode::PerturbationLeavesCone: return "PerturbationLeavesCone";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::DegenerateWeakLearner: return "DegenerateWeakLearner";
    case ErrorCode::RationalOverflow: return "RationalOverflow";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownSuite: return "UnknownSuite";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& detail,
                           std::optional<Index> first,
                           std::optional<Index> second) {
  std::string msg = to_string(code);
  if (first) {
    msg += "(" + std::to_string(*first + 1);
    if (second) msg += "," + std::to_string(*second + 1);
    msg += ")";
  }
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(format_message(code, detail, std::nullopt, std::nullopt)),
      code_(code) {}

Error::Error(ErrorCode code, const std::string& detail, Index first,
             std::optional<Index> second)
    : std::runtime_error(format_message(code, detail, first, second)),
      code_(code),
      first_(first),
      second_(second) {}

PositiveModel PositiveModel::make(Matrix entries, bool normalized) {
  if (entries.rows() < 1 || entries.cols() < 2)
    throw Error(ErrorCode::BadShape, "need k >= 1 rows and m >= 2 columns");
  for (Index i = 0; i < entries.rows(); ++i) {
    for (Index j = 0; j < entries.cols(); ++j) {
      const double v = entries(i, j);
      if (!std::isfinite(v))
        throw Error(ErrorCode::BadShape, "non-finite entry", i, j);
      if (!(v > 0.0)) throw Error(ErrorCode::NonPositiveEntry, "", i, j);
    }
  }
  if (normalized) {
    for (Index i = 0; i < entries.rows(); ++i) {
      if (std::abs(entries.row(i).sum() - 1.0) > kConstraintTol)
        throw Error(ErrorCode::NotNormalized, "row does not sum to 1", i);
    }
  }
  return PositiveModel(std::move(entries), normalized);
}

double l1_norm(const PositiveModel& model) { return model.entries().sum(); }

double row_l1_norm(const PositiveModel& model, Index row) {
  if (row < 0 || row >= model.rows())
    throw Error(ErrorCode::RowIndexOutOfRange, "", row);
  return model.entries().row(row).sum();
}

PositiveModel normalize_rows(const PositiveModel& model) {
  if (model.normalized()) return model;
  Matrix out = model.entries();
  for (Index i = 0; i < out.rows(); ++i) out.row(i) /= out.row(i).sum();
  return PositiveModel::make(std::move(out), true);
}

TangentVector TangentVector::make(Matrix coeffs, bool normalized_context) {
  for (Index i = 0; i < coeffs.rows(); ++i)
    for (Index j = 0; j < coeffs.cols(); ++j)
      if (!std::isfinite(coeffs(i, j)))
        throw Error(ErrorCode::BadShape, "non-finite tangent coefficient", i, j);
  if (normalized_context) {
    for (Index i = 0; i < coeffs.rows(); ++i) {
      if (std::abs(coeffs.row(i).sum()) > kConstraintTol)
        throw Error(ErrorCode::RowSumNotZero, "", i);
    }
  }
  return TangentVector(std::move(coeffs), normalized_context);
}

TangentVector TangentVector::basis(Index rows, Index cols, Index row, Index col) {
  if (row < 0 || row >= rows || col < 0 || col >= cols)
    throw Error(ErrorCode::IndexOutOfRange, "basis index", row, col);
  Matrix coeffs = Matrix::Zero(rows, cols);
  coeffs(row, col) = 1.0;
  return TangentVector(std::move(coeffs), false);
}

TangentVector project_to_normalized(const Matrix& coeffs) {
  Matrix out = coeffs;
  out.colwise() -= coeffs.rowwise().mean();
  return TangentVector::make(std::move(out), true);
}

RationalModel RationalModel::make(IntMatrix numerators, std::int64_t denominator) {
  if (numerators.rows() < 1 || numerators.cols() < 2)
    throw Error(ErrorCode::BadShape, "need k >= 1 rows and m >= 2 columns");
  if (denominator < 1)
    throw Error(ErrorCode::NonPositiveArgument, "denominator must be >= 1");
  for (Index i = 0; i < numerators.rows(); ++i)
    for (Index j = 0; j < numerators.cols(); ++j)
      if (numerators(i, j) < 1)
        throw Error(ErrorCode::NonPositiveEntry, "numerators must be >= 1", i, j);
  return RationalModel(std::move(numerators), denominator);
}

std::int64_t RationalModel::numerator_row_sum(Index row) const {
  if (row < 0 || row >= rows()) throw Error(ErrorCode::RowIndexOutOfRange, "", row);
  return numerators_.row(row).sum();
}

std::int64_t RationalModel::numerator_sum() const { return numerators_.sum(); }

PositiveModel RationalModel::to_model() const {
  return PositiveModel::make(numerators_.cast<double>() / static_cast<double>(denominator_));
}

RationalModel rationalize(const PositiveModel& model, std::int64_t denominator) {
  if (denominator < 1)
    throw Error(ErrorCode::NonPositiveArgument, "denominator must be >= 1");
  IntMatrix num(model.rows(), model.cols());
  const double z = static_cast<double>(denominator);
  for (Index i = 0; i < model.rows(); ++i)
    for (Index j = 0; j < model.cols(); ++j)
      num(i, j) = std::max<std::int64_t>(1, std::llround(z * model(i, j)));
  return RationalModel::make(std::move(num), denominator);
}

EmpiricalDistribution EmpiricalDistribution::make(Vector weights) {
  if (weights.size() < 1) throw Error(ErrorCode::BadShape, "empty distribution");
  for (Index i = 0; i < weights.size(); ++i)
    if (!(weights(i) >= 0.0) || !std::isfinite(weights(i)))
      throw Error(ErrorCode::InvalidArgument, "weights must be finite and >= 0", i);
  if (std::abs(weights.sum() - 1.0) > kConstraintTol)
    throw Error(ErrorCode::NotNormalized, "weights do not sum to 1");
  return EmpiricalDistribution(std::move(weights));
}

}  // namespace cig
