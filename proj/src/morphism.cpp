#include "cig/morphism.hpp"

#include <limits>
#include <numeric>
#include <string>

namespace cig {

Partition Partition::make(std::vector<std::vector<Index>> blocks, Index ground_size) {
  if (ground_size < 1) throw Error(ErrorCode::BadShape, "partition of an empty set");
  std::vector<Index> owner(static_cast<std::size_t>(ground_size), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& block = blocks[b];
    if (block.empty()) throw Error(ErrorCode::EmptyBlock, "", static_cast<Index>(b));
    std::sort(block.begin(), block.end());
    for (Index e : block) {
      if (e < 0 || e >= ground_size)
        throw Error(ErrorCode::IndexOutOfRange, "element outside the ground set", e);
      auto& slot = owner[static_cast<std::size_t>(e)];
      if (slot != -1) throw Error(ErrorCode::Overlap, "element in two blocks", e);
      slot = static_cast<Index>(b);
    }
  }
  for (std::size_t e = 0; e < owner.size(); ++e)
    if (owner[e] == -1) throw Error(ErrorCode::Gap, "element not covered", static_cast<Index>(e));
  return Partition(std::move(blocks), std::move(owner), ground_size);
}

Partition Partition::identity(Index n) {
  std::vector<std::vector<Index>> blocks;
  for (Index i = 0; i < n; ++i) blocks.push_back({i});
  return make(std::move(blocks), n);
}

Partition Partition::contiguous(std::span<const Index> sizes) {
  std::vector<std::vector<Index>> blocks;
  Index next = 0;
  for (Index size : sizes) {
    std::vector<Index> block(static_cast<std::size_t>(std::max<Index>(size, 0)));
    std::iota(block.begin(), block.end(), next);
    next += static_cast<Index>(block.size());
    blocks.push_back(std::move(block));
  }
  return make(std::move(blocks), next);
}

PositiveModel apply_morphism(const MarkovMorphism<double>& f, const PositiveModel& model) {
  // Row sums survive only when R is a permutation (each block one column, weight 1).
  const bool keeps_rows = model.normalized() && f.target_rows() == f.source_rows();
  return PositiveModel::make(apply_linear<double>(f, model.entries()), keeps_rows);
}

TangentVector push_forward(const MarkovMorphism<double>& f, const TangentVector& v) {
  // f is linear in M, so f_* acts on coefficient matrices exactly as f does.
  return TangentVector::make(apply_linear<double>(f, v.coeffs()), v.normalized_context());
}

namespace {

struct WeightedIndex {
  Index index;
  double weight;
};

// f_* d_ab is the outer product of R's row a and Q(a)'s row b, each
// restricted to its block.
struct OuterSupport {
  std::vector<WeightedIndex> rows;
  std::vector<WeightedIndex> cols;
  double row_total = 0.0;
  double col_total = 0.0;
};

class PullBack {
 public:
  PullBack(const MarkovMorphism<double>& f, const MetricParams& params, const PositiveModel& model)
      : f_(f),
        image_(apply_linear<double>(f, model.entries())),
        total_(image_.sum()),
        row_sums_(image_.rowwise().sum()),
        a_(params.A(total_)),
        b_(params.B(total_)),
        c_(params.C(total_)) {}

  OuterSupport support(BasisIndex ab) const {
    if (ab.row < 0 || ab.row >= f_.source_rows() || ab.col < 0 || ab.col >= f_.source_cols())
      throw Error(ErrorCode::IndexOutOfRange, "basis index", ab.row, ab.col);
    OuterSupport s;
    for (Index i : f_.R().partition().block(ab.row)) {
      s.rows.push_back({i, f_.R()(ab.row, i)});
      s.row_total += f_.R()(ab.row, i);
    }
    const auto& q = f_.Q(ab.row);
    for (Index j : q.partition().block(ab.col)) {
      s.cols.push_back({j, q(ab.col, j)});
      s.col_total += q(ab.col, j);
    }
    return s;
  }

  // Target metric g_{f(M)} evaluated on two outer-product tangents.
  double inner(const OuterSupport& u, const OuterSupport& v) const {
    double value = a_ * (u.row_total * u.col_total) * (v.row_total * v.col_total);
    for_common(u.rows, v.rows, [&](Index i, double ru, double rv) {
      value += total_ / row_sums_(i) * (ru * u.col_total) * (rv * v.col_total) * b_;
      for_common(u.cols, v.cols, [&](Index j, double cu, double cv) {
        value += total_ / image_(i, j) * (ru * cu) * (rv * cv) * c_;
      });
    });
    return value;
  }

 private:
  template <typename Fn>
  static void for_common(const std::vector<WeightedIndex>& x, const std::vector<WeightedIndex>& y,
                         Fn&& fn) {
    auto xi = x.begin();
    auto yi = y.begin();
    while (xi != x.end() && yi != y.end()) {
      if (xi->index < yi->index) {
        ++xi;
      } else if (yi->index < xi->index) {
        ++yi;
      } else {
        fn(xi->index, xi->weight, yi->weight);
        ++xi;
        ++yi;
      }
    }
  }

  const MarkovMorphism<double>& f_;
  Matrix image_;
  double total_;
  Vector row_sums_;
  double a_, b_, c_;
};

void check_source_shape(const MarkovMorphism<double>& f, const PositiveModel& model) {
  if (model.rows() != f.source_rows() || model.cols() != f.source_cols())
    throw Error(ErrorCode::ShapeMismatch, "model shape does not match the morphism source");
}

std::vector<Index> validate_permutation(std::span<const Index> perm, const char* what) {
  std::vector<Index> seen(perm.size(), 0);
  for (Index p : perm) {
    if (p < 0 || p >= static_cast<Index>(perm.size()) || seen[static_cast<std::size_t>(p)]++)
      throw Error(ErrorCode::NotAPermutation, what);
  }
  return {perm.begin(), perm.end()};
}

// Permutation with the forced assignments; the remaining sources go to the
// remaining targets in increasing order.
std::vector<Index> extend_permutation(Index size,
                                      const std::vector<std::pair<Index, Index>>& forced) {
  std::vector<Index> perm(static_cast<std::size_t>(size), -1);
  std::vector<bool> used(static_cast<std::size_t>(size), false);
  for (auto [from, to] : forced) {
    perm[static_cast<std::size_t>(from)] = to;
    used[static_cast<std::size_t>(to)] = true;
  }
  Index next = 0;
  for (auto& p : perm) {
    if (p != -1) continue;
    while (used[static_cast<std::size_t>(next)]) ++next;
    p = next;
    used[static_cast<std::size_t>(next)] = true;
  }
  return perm;
}

AStochasticMatrix<double> permutation_matrix(std::span<const Index> perm) {
  const Index n = static_cast<Index>(perm.size());
  Matrix P = Matrix::Zero(n, n);
  std::vector<std::vector<Index>> blocks;
  for (Index i = 0; i < n; ++i) {
    P(i, perm[static_cast<std::size_t>(i)]) = 1.0;
    blocks.push_back({perm[static_cast<std::size_t>(i)]});
  }
  return AStochasticMatrix<double>::make(std::move(P), Partition::make(std::move(blocks), n));
}

std::int64_t checked_product(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out))
    throw Error(ErrorCode::RationalOverflow, "uniformizer dimensions overflow");
  return out;
}

}  // namespace

double pull_back_metric(const MarkovMorphism<double>& f, const MetricParams& params,
                        const PositiveModel& model, BasisIndex ab, BasisIndex cd) {
  check_source_shape(f, model);
  const PullBack pb(f, params, model);
  return pb.inner(pb.support(ab), pb.support(cd));
}

IsometryReport check_isometry(const MarkovMorphism<double>& f, const MetricParams& params,
                              const PositiveModel& model, double tol) {
  check_source_shape(f, model);
  const PullBack pb(f, params, model);
  const Index k = model.rows();
  const Index m = model.cols();
  std::vector<OuterSupport> supports;
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < m; ++b) supports.push_back(pb.support({a, b}));

  IsometryReport report;
  for (Index p = 0; p < k * m; ++p) {
    for (Index q = p; q < k * m; ++q) {
      const BasisIndex ab{p / m, p % m};
      const BasisIndex cd{q / m, q % m};
      const double g = metric_basis(params, model, ab, cd);
      const double pulled = pb.inner(supports[static_cast<std::size_t>(p)],
                                     supports[static_cast<std::size_t>(q)]);
      const double err = std::abs(g - pulled);
      const double scaled = err / (1.0 + std::abs(g));
      if (!(err <= tol * (1.0 + std::abs(g)))) report.pass = false;
      if (scaled > report.max_scaled_error || std::isnan(scaled)) {
        report.max_scaled_error = scaled;
        report.worst_ab = ab;
        report.worst_cd = cd;
      }
      report.max_abs_error = std::max(report.max_abs_error, err);
    }
  }
  return report;
}

MarkovMorphism<double> permutation_morphism(std::span<const Index> sigma,
                                            const std::vector<std::vector<Index>>& pis) {
  const auto rows = validate_permutation(sigma, "sigma is not a permutation");
  if (pis.size() != rows.size())
    throw Error(ErrorCode::ShapeMismatch, "need one column permutation per row");
  std::vector<AStochasticMatrix<double>> Q;
  for (const auto& pi : pis) {
    if (pi.size() != pis.front().size())
      throw Error(ErrorCode::ShapeMismatch, "column permutations differ in length");
    Q.push_back(permutation_matrix(validate_permutation(pi, "pi is not a permutation")));
  }
  return MarkovMorphism<double>::make(permutation_matrix(rows), std::move(Q));
}

MarkovMorphism<double> solve_basis_transport(BasisIndex ab1, BasisIndex cd1, BasisIndex ab2,
                                             BasisIndex cd2, Index k, Index m) {
  for (const auto& idx : {ab1, cd1, ab2, cd2})
    if (idx.row < 0 || idx.row >= k || idx.col < 0 || idx.col >= m)
      throw Error(ErrorCode::IndexOutOfRange, "basis index", idx.row, idx.col);
  if (ab1.row == cd1.row || ab2.row == cd2.row)
    throw Error(ErrorCode::PreconditionViolated, "both pairs need distinct rows");

  const auto sigma = extend_permutation(k, {{ab1.row, ab2.row}, {cd1.row, cd2.row}});
  std::vector<std::vector<Index>> pis;
  for (Index a = 0; a < k; ++a) {
    std::vector<std::pair<Index, Index>> forced;
    if (a == ab1.row) forced.emplace_back(ab1.col, ab2.col);
    if (a == cd1.row) forced.emplace_back(cd1.col, cd2.col);
    pis.push_back(extend_permutation(m, forced));
  }
  return permutation_morphism(sigma, pis);
}

std::pair<std::int64_t, std::int64_t> uniformizer_shape(const RationalModel& model) {
  std::int64_t rows = 0;
  std::int64_t cols = 1;
  for (Index i = 0; i < model.rows(); ++i) {
    rows += model.numerator_row_sum(i);
    cols = checked_product(cols, model.numerator_row_sum(i));
  }
  return {rows, cols};
}

MarkovMorphism<Rational> rational_uniformizer(const RationalModel& model, std::int64_t size_cap) {
  const auto [l, n] = uniformizer_shape(model);
  std::int64_t cells;
  if (__builtin_mul_overflow(l, n, &cells) || cells > size_cap)
    throw Error(ErrorCode::SizeCapExceeded,
                std::to_string(l) + " x " + std::to_string(n) + " exceeds the cap of " +
                    std::to_string(size_cap) + " cells");

  const Index k = model.rows();
  const Index m = model.cols();
  const IntMatrix& num = model.numerators();

  // R row i: |M~_i| consecutive columns of value 1/|M~_i|.
  std::vector<Index> row_sizes;
  for (Index i = 0; i < k; ++i) row_sizes.push_back(model.numerator_row_sum(i));
  auto R = AStochasticMatrix<Rational>::uniform(Partition::contiguous(row_sizes));

  // Q(i) row j: M~_ij prod_{s != i} |M~_s| consecutive columns of value
  // 1 / (M~_ij prod_{s != i} |M~_s|).
  std::vector<AStochasticMatrix<Rational>> Q;
  for (Index i = 0; i < k; ++i) {
    std::int64_t others = 1;
    for (Index s = 0; s < k; ++s)
      if (s != i) others = checked_product(others, model.numerator_row_sum(s));
    std::vector<Index> sizes;
    for (Index j = 0; j < m; ++j) sizes.push_back(checked_product(num(i, j), others));
    Q.push_back(AStochasticMatrix<Rational>::uniform(Partition::contiguous(sizes)));
  }
  return MarkovMorphism<Rational>::make(std::move(R), std::move(Q));
}

}  // namespace cig
