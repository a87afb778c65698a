#pragma once

// Congruent embeddings by Markov morphisms f(M) = R^T (M (x) Q) between
// cones of positive conditional models.
//
// R is a B-stochastic k x l matrix and Q = {Q(0), ..., Q(k-1)} are
// A(i)-stochastic m x n matrices: every row is a probability vector
// supported exactly on one block of a partition, so every column holds a
// single nonzero. The types are templated on the scalar so the same code
// runs in double precision and in exact rational arithmetic.

#include "cig/core.hpp"
#include "cig/metric.hpp"
#include "cig/rational.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <type_traits>
#include <vector>

namespace cig {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// A partition of {0, ..., n-1} into nonempty, pairwise disjoint blocks.
/// Elements inside each block are kept sorted; block order is preserved.
class Partition {
 public:
  static Partition make(std::vector<std::vector<Index>> blocks, Index ground_size);
  // Singleton blocks {0}, {1}, ...
  static Partition identity(Index n);
  // Consecutive blocks of the given sizes.
  static Partition contiguous(std::span<const Index> sizes);

  Index ground_size() const noexcept { return ground_size_; }
  Index block_count() const noexcept { return static_cast<Index>(blocks_.size()); }
  const std::vector<std::vector<Index>>& blocks() const noexcept { return blocks_; }
  const std::vector<Index>& block(Index i) const { return blocks_.at(static_cast<std::size_t>(i)); }
  Index owner(Index element) const { return owner_.at(static_cast<std::size_t>(element)); }

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.ground_size_ == b.ground_size_ && a.blocks_ == b.blocks_;
  }

 private:
  Partition(std::vector<std::vector<Index>> blocks, std::vector<Index> owner, Index n)
      : blocks_(std::move(blocks)), owner_(std::move(owner)), ground_size_(n) {}

  std::vector<std::vector<Index>> blocks_;
  std::vector<Index> owner_;
  Index ground_size_;
};

namespace detail {

template <typename Scalar>
bool is_one(const Scalar& x, double tol) {
  if constexpr (std::is_same_v<Scalar, Rational>)
    return x == Rational(1);
  else
    return std::abs(x - 1.0) <= tol;
}

template <typename Scalar>
bool nearly_equal(const Scalar& x, const Scalar& y, double tol) {
  if constexpr (std::is_same_v<Scalar, Rational>)
    return x == y;
  else
    return std::abs(x - y) <= tol;
}

}  // namespace detail

/// True iff row i of `Q` is positive exactly on block i of `partition` and
/// every row sums to one.
template <typename Scalar>
bool is_a_stochastic(const MatrixX<Scalar>& Q, const Partition& partition,
                     double tol = kConstraintTol) {
  if (Q.rows() != partition.block_count() || Q.cols() != partition.ground_size()) return false;
  for (Index j = 0; j < Q.cols(); ++j) {
    const Index owner = partition.owner(j);
    for (Index i = 0; i < Q.rows(); ++i) {
      const bool on_block = i == owner;
      if (on_block && !(Q(i, j) > Scalar(0))) return false;
      if (!on_block && !(Q(i, j) == Scalar(0))) return false;
    }
  }
  for (Index i = 0; i < Q.rows(); ++i)
    if (!detail::is_one<Scalar>(Q.row(i).sum(), tol)) return false;
  return true;
}

// A-stochastic, with equal support sizes and identical positive entries.
template <typename Scalar>
bool is_uniform_a_stochastic(const MatrixX<Scalar>& Q, const Partition& partition,
                             double tol = kConstraintTol) {
  if (!is_a_stochastic<Scalar>(Q, partition, tol)) return false;
  const auto size = partition.block(0).size();
  const Scalar value = Q(0, partition.block(0).front());
  for (Index i = 0; i < partition.block_count(); ++i) {
    if (partition.block(i).size() != size) return false;
    for (Index j : partition.block(i))
      if (!detail::nearly_equal<Scalar>(Q(i, j), value, tol)) return false;
  }
  return true;
}

template <typename Scalar>
class AStochasticMatrix {
 public:
  static AStochasticMatrix make(MatrixX<Scalar> entries, Partition partition) {
    if (!is_a_stochastic<Scalar>(entries, partition))
      throw Error(ErrorCode::NotAStochastic,
                  "rows must be probability vectors supported exactly on their block");
    return AStochasticMatrix(std::move(entries), std::move(partition));
  }

  // Skips validation. Only for building deliberately broken morphisms in
  // mutation tests of the isometry checker.
  static AStochasticMatrix unchecked(MatrixX<Scalar> entries, Partition partition) {
    return AStochasticMatrix(std::move(entries), std::move(partition));
  }

  // Each row spread evenly over its block.
  static AStochasticMatrix uniform(Partition partition) {
    MatrixX<Scalar> entries = MatrixX<Scalar>::Zero(partition.block_count(), partition.ground_size());
    for (Index i = 0; i < partition.block_count(); ++i) {
      const Scalar value = Scalar(1) / Scalar(static_cast<std::int64_t>(partition.block(i).size()));
      for (Index j : partition.block(i)) entries(i, j) = value;
    }
    return make(std::move(entries), std::move(partition));
  }

  Index rows() const noexcept { return entries_.rows(); }
  Index cols() const noexcept { return entries_.cols(); }
  const MatrixX<Scalar>& entries() const noexcept { return entries_; }
  const Partition& partition() const noexcept { return partition_; }
  Scalar operator()(Index i, Index j) const { return entries_(i, j); }

  template <typename To>
  AStochasticMatrix<To> cast() const {
    MatrixX<To> out(rows(), cols());
    for (Index i = 0; i < rows(); ++i)
      for (Index j = 0; j < cols(); ++j) out(i, j) = static_cast<To>(entries_(i, j));
    if constexpr (std::is_same_v<To, double>) {
      // Rounded rows can drift from 1 by a few ulps; renormalize.
      for (Index i = 0; i < out.rows(); ++i) out.row(i) /= out.row(i).sum();
    }
    return AStochasticMatrix<To>::make(std::move(out), partition_);
  }

 private:
  AStochasticMatrix(MatrixX<Scalar> entries, Partition partition)
      : entries_(std::move(entries)), partition_(std::move(partition)) {}

  MatrixX<Scalar> entries_;
  Partition partition_;
};

/// f : R+^{k x m} -> R+^{l x n}, f(M) = R^T (M (x) Q).
template <typename Scalar>
class MarkovMorphism {
 public:
  static MarkovMorphism make(AStochasticMatrix<Scalar> R, std::vector<AStochasticMatrix<Scalar>> Q) {
    if (static_cast<Index>(Q.size()) != R.rows())
      throw Error(ErrorCode::ShapeMismatch, "need one Q matrix per row of R");
    for (const auto& q : Q)
      if (q.rows() != Q.front().rows() || q.cols() != Q.front().cols())
        throw Error(ErrorCode::ShapeMismatch, "all Q matrices must share their shape");
    return MarkovMorphism(std::move(R), std::move(Q));
  }

  static MarkovMorphism identity(Index k, Index m) {
    std::vector<AStochasticMatrix<Scalar>> Q(static_cast<std::size_t>(k),
                                             AStochasticMatrix<Scalar>::uniform(Partition::identity(m)));
    return make(AStochasticMatrix<Scalar>::uniform(Partition::identity(k)), std::move(Q));
  }

  Index source_rows() const noexcept { return R_.rows(); }
  Index source_cols() const noexcept { return Q_.front().rows(); }
  Index target_rows() const noexcept { return R_.cols(); }
  Index target_cols() const noexcept { return Q_.front().cols(); }

  const AStochasticMatrix<Scalar>& R() const noexcept { return R_; }
  const AStochasticMatrix<Scalar>& Q(Index i) const { return Q_.at(static_cast<std::size_t>(i)); }
  const std::vector<AStochasticMatrix<Scalar>>& Qs() const noexcept { return Q_; }

  template <typename To>
  MarkovMorphism<To> cast() const {
    std::vector<AStochasticMatrix<To>> Q;
    Q.reserve(Q_.size());
    for (const auto& q : Q_) Q.push_back(q.template cast<To>());
    return MarkovMorphism<To>::make(R_.template cast<To>(), std::move(Q));
  }

 private:
  MarkovMorphism(AStochasticMatrix<Scalar> R, std::vector<AStochasticMatrix<Scalar>> Q)
      : R_(std::move(R)), Q_(std::move(Q)) {}

  AStochasticMatrix<Scalar> R_;
  std::vector<AStochasticMatrix<Scalar>> Q_;
};

/// Row i of the result is row i of M * Q[i].
template <typename Scalar>
MatrixX<Scalar> row_product(const MatrixX<Scalar>& M, std::span<const MatrixX<Scalar>> Q) {
  if (static_cast<Index>(Q.size()) != M.rows())
    throw Error(ErrorCode::ShapeMismatch, "need one Q matrix per row of M");
  if (Q.empty()) return MatrixX<Scalar>(0, 0);
  const Index n = Q.front().cols();
  MatrixX<Scalar> out(M.rows(), n);
  for (Index i = 0; i < M.rows(); ++i) {
    const auto& q = Q[static_cast<std::size_t>(i)];
    if (q.rows() != M.cols() || q.cols() != n)
      throw Error(ErrorCode::ShapeMismatch, "Q matrix shape does not chain with M", i);
    out.row(i) = M.row(i) * q;
  }
  return out;
}

/// R^T (X (x) Q) for any k x m matrix X. On models this is the embedding
/// itself; on tangent coefficients it is the push-forward (f is linear).
/// Every column of an A-stochastic matrix has a single nonzero, in the row
/// that owns it, so each output entry is one product R(a, i) X(a, b) Q(a)(b, j).
template <typename Scalar>
MatrixX<Scalar> apply_linear(const MarkovMorphism<Scalar>& f, const MatrixX<Scalar>& X) {
  if (X.rows() != f.source_rows() || X.cols() != f.source_cols())
    throw Error(ErrorCode::ShapeMismatch, "matrix shape does not match the morphism source");
  MatrixX<Scalar> out(f.target_rows(), f.target_cols());
  const Partition& rows = f.R().partition();
  for (Index i = 0; i < out.rows(); ++i) {
    const Index a = rows.owner(i);
    const auto& Q = f.Q(a);
    const Partition& cols = Q.partition();
    const Scalar weight = f.R()(a, i);
    for (Index j = 0; j < out.cols(); ++j) {
      const Index b = cols.owner(j);
      out(i, j) = weight * X(a, b) * Q(b, j);
    }
  }
  return out;
}

// The image of a normalized model is flagged normalized only when R is a
// permutation; otherwise its rows need not sum to one.
PositiveModel apply_morphism(const MarkovMorphism<double>& f, const PositiveModel& model);

TangentVector push_forward(const MarkovMorphism<double>& f, const TangentVector& v);

/// (f* g)_M(d_ab, d_cd) = g_{f(M)}(f_* d_ab, f_* d_cd). Uses the outer
/// product structure of f_* d_ab (R row a times Q(a) row b) so each call is
/// linear in the support sizes.
double pull_back_metric(const MarkovMorphism<double>& f, const MetricParams& params,
                        const PositiveModel& model, BasisIndex ab, BasisIndex cd);

// Permutations are given in one-line notation over 0-based indices:
// sigma[a] is the image of row a, pis[a][b] the image of column b in row a.
MarkovMorphism<double> permutation_morphism(std::span<const Index> sigma,
                                            const std::vector<std::vector<Index>>& pis);

/// A permutation morphism mapping d_{ab1} to d_{ab2} and d_{cd1} to d_{cd2}.
/// Requires ab1.row != cd1.row and ab2.row != cd2.row. Unforced images are
/// assigned in increasing order.
MarkovMorphism<double> solve_basis_transport(BasisIndex ab1, BasisIndex cd1, BasisIndex ab2,
                                             BasisIndex cd2, Index k, Index m);

/// Uniform replication R+^{k x m} -> R+^{kz x mw} with contiguous blocks.
template <typename Scalar>
MarkovMorphism<Scalar> uniform_replication(Index k, Index m, Index z, Index w) {
  if (k < 1 || m < 1 || z < 1 || w < 1)
    throw Error(ErrorCode::NonPositiveArgument, "k, m, z and w must be >= 1");
  const std::vector<Index> row_blocks(static_cast<std::size_t>(k), z);
  const std::vector<Index> col_blocks(static_cast<std::size_t>(m), w);
  const auto Q = AStochasticMatrix<Scalar>::uniform(Partition::contiguous(col_blocks));
  return MarkovMorphism<Scalar>::make(AStochasticMatrix<Scalar>::uniform(Partition::contiguous(row_blocks)),
                                      std::vector<AStochasticMatrix<Scalar>>(static_cast<std::size_t>(k), Q));
}

inline constexpr std::int64_t kDefaultSizeCap = 1'000'000;

/// The morphism that sends M = M~ / z to the constant matrix with entries
/// 1 / (z prod_s |M~_s|), of size |M~| x prod_s |M~_s|. Built exactly.
MarkovMorphism<Rational> rational_uniformizer(const RationalModel& model,
                                              std::int64_t size_cap = kDefaultSizeCap);

// Output shape (|M~|, prod_s |M~_s|) of rational_uniformizer; throws
// RationalOverflow when the product does not fit.
std::pair<std::int64_t, std::int64_t> uniformizer_shape(const RationalModel& model);

/// g after f. Defined when, for every source row a, the Q matrices of g
/// agree on all target rows that R_f assigns to a; otherwise the composite
/// is not a congruent embedding and NotComposable is thrown.
template <typename Scalar>
MarkovMorphism<Scalar> compose(const MarkovMorphism<Scalar>& f, const MarkovMorphism<Scalar>& g) {
  if (g.source_rows() != f.target_rows() || g.source_cols() != f.target_cols())
    throw Error(ErrorCode::ShapeMismatch, "target of f is not the source of g");
  constexpr double tol = kConstraintTol;

  const Partition& rows_f = f.R().partition();
  const Partition& rows_g = g.R().partition();
  std::vector<std::vector<Index>> row_blocks;
  for (Index a = 0; a < f.source_rows(); ++a) {
    std::vector<Index> block;
    for (Index mid : rows_f.block(a))
      for (Index out : rows_g.block(mid)) block.push_back(out);
    row_blocks.push_back(std::move(block));
  }
  MatrixX<Scalar> R = f.R().entries() * g.R().entries();
  auto R_out = AStochasticMatrix<Scalar>::make(
      std::move(R), Partition::make(std::move(row_blocks), g.target_rows()));

  std::vector<AStochasticMatrix<Scalar>> Q_out;
  for (Index a = 0; a < f.source_rows(); ++a) {
    const auto& mids = rows_f.block(a);
    const auto& q_g = g.Q(mids.front());
    for (Index mid : mids) {
      const auto& other = g.Q(mid).entries();
      for (Index i = 0; i < other.rows(); ++i)
        for (Index j = 0; j < other.cols(); ++j)
          if (!detail::nearly_equal<Scalar>(other(i, j), q_g(i, j), tol))
            throw Error(ErrorCode::NotComposable,
                        "second morphism's Q differs across one block of the first's R", a);
    }
    const Partition& cols_f = f.Q(a).partition();
    std::vector<std::vector<Index>> col_blocks;
    for (Index b = 0; b < f.source_cols(); ++b) {
      std::vector<Index> block;
      for (Index mid : cols_f.block(b))
        for (Index out : q_g.partition().block(mid)) block.push_back(out);
      col_blocks.push_back(std::move(block));
    }
    MatrixX<Scalar> Q = f.Q(a).entries() * q_g.entries();
    Q_out.push_back(AStochasticMatrix<Scalar>::make(
        std::move(Q), Partition::make(std::move(col_blocks), g.target_cols())));
  }
  return MarkovMorphism<Scalar>::make(std::move(R_out), std::move(Q_out));
}

struct IsometryReport {
  double max_abs_error = 0.0;
  // max over pairs of |g - f*g| / (1 + |g|)
  double max_scaled_error = 0.0;
  BasisIndex worst_ab;
  BasisIndex worst_cd;
  bool pass = true;
};

/// Compares the metric at M with its pull-back through f on every pair of
/// basis vectors. A pair passes when |g - f*g| <= tol * (1 + |g|).
IsometryReport check_isometry(const MarkovMorphism<double>& f, const MetricParams& params,
                              const PositiveModel& model, double tol);

}  // namespace cig
