#pragma once

// Value types for finite conditional models: positive k x m matrices
// M(i, j) = p(y_j | x_i), tangent vectors over the basis d_ij, exact
// rational models and empirical distributions over the explanatory space.
//
// All indices in the C++ API are 0-based. Error messages and the file
// formats report 1-based indices.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace cig {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

enum class ErrorCode {
  BadShape,
  NonPositiveEntry,
  NotNormalized,
  RowIndexOutOfRange,
  RowSumNotZero,
  ShapeMismatch,
  NonPositiveArgument,
  IndexOutOfRange,
  Overlap,
  Gap,
  EmptyBlock,
  NotAStochastic,
  NotAPermutation,
  NotComposable,
  PreconditionViolated,
  SizeCapExceeded,
  PerturbationLeavesCone,
  EmptyDataset,
  Overflow,
  NotConverged,
  DegenerateWeakLearner,
  RationalOverflow,
  Parse,
  InvalidArgument,
  UnknownSuite,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);
  Error(ErrorCode code, const std::string& detail, Index first,
        std::optional<Index> second = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  // 0-based indices attached to the error, when it concerns an entry/row.
  std::optional<Index> first() const noexcept { return first_; }
  std::optional<Index> second() const noexcept { return second_; }

 private:
  ErrorCode code_;
  std::optional<Index> first_;
  std::optional<Index> second_;
};

// Absolute tolerance for constraint checks (row sums, zero tangents).
inline constexpr double kConstraintTol = 1e-12;
// Relative tolerance for derived identities.
inline constexpr double kIdentityTol = 1e-9;

/// A point of the cone of strictly positive k x m matrices (k >= 1,
/// m >= 2). When `normalized()` every row is a distribution over the
/// response space and the model lies on the product of simplexes.
class PositiveModel {
 public:
  static PositiveModel make(Matrix entries, bool normalized = false);

  Index rows() const noexcept { return entries_.rows(); }
  Index cols() const noexcept { return entries_.cols(); }
  bool normalized() const noexcept { return normalized_; }
  const Matrix& entries() const noexcept { return entries_; }
  double operator()(Index i, Index j) const { return entries_(i, j); }

 private:
  PositiveModel(Matrix entries, bool normalized)
      : entries_(std::move(entries)), normalized_(normalized) {}

  Matrix entries_;
  bool normalized_;
};

double l1_norm(const PositiveModel& model);
double row_l1_norm(const PositiveModel& model, Index row);

// Idempotent; the result is flagged normalized.
PositiveModel normalize_rows(const PositiveModel& model);

/// Coefficients of a tangent vector sum_ij coeffs(i, j) d_ij. In a
/// normalized context every row of coefficients sums to zero.
class TangentVector {
 public:
  static TangentVector make(Matrix coeffs, bool normalized_context = false);
  // Unit basis vector d_{row, col} in a k x m tangent space.
  static TangentVector basis(Index rows, Index cols, Index row, Index col);

  Index rows() const noexcept { return coeffs_.rows(); }
  Index cols() const noexcept { return coeffs_.cols(); }
  bool normalized_context() const noexcept { return normalized_context_; }
  const Matrix& coeffs() const noexcept { return coeffs_; }

 private:
  TangentVector(Matrix coeffs, bool normalized_context)
      : coeffs_(std::move(coeffs)), normalized_context_(normalized_context) {}

  Matrix coeffs_;
  bool normalized_context_;
};

// Subtracts each row's mean so the result is a valid normalized-context
// tangent.
TangentVector project_to_normalized(const Matrix& coeffs);

/// M = numerators / denominator with every numerator >= 1.
class RationalModel {
 public:
  static RationalModel make(IntMatrix numerators, std::int64_t denominator);

  Index rows() const noexcept { return numerators_.rows(); }
  Index cols() const noexcept { return numerators_.cols(); }
  const IntMatrix& numerators() const noexcept { return numerators_; }
  std::int64_t denominator() const noexcept { return denominator_; }

  // Row sums |M~_i| and total |M~| of the numerators.
  std::int64_t numerator_row_sum(Index row) const;
  std::int64_t numerator_sum() const;

  PositiveModel to_model() const;

 private:
  RationalModel(IntMatrix numerators, std::int64_t denominator)
      : numerators_(std::move(numerators)), denominator_(denominator) {}

  IntMatrix numerators_;
  std::int64_t denominator_;
};

// Numerators are round(z * M_ij), clamped to at least 1.
RationalModel rationalize(const PositiveModel& model, std::int64_t denominator);

/// Non-negative weights over the explanatory space summing to one.
class EmpiricalDistribution {
 public:
  static EmpiricalDistribution make(Vector weights);

  Index size() const noexcept { return weights_.size(); }
  const Vector& weights() const noexcept { return weights_; }
  double operator()(Index i) const { return weights_(i); }

 private:
  explicit EmpiricalDistribution(Vector weights) : weights_(std::move(weights)) {}

  Vector weights_;
};

}  // namespace cig
