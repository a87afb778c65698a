#include "cig/random.hpp"

#include <algorithm>
#include <numeric>

namespace cig {

Partition random_partition(Rng& rng, Index n, Index blocks) {
  if (blocks < 1 || blocks > n) throw Error(ErrorCode::InvalidArgument, "need 1 <= blocks <= n");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (Index i = n - 1; i > 0; --i)
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(rng.integer(0, i))]);

  std::vector<std::vector<Index>> out(static_cast<std::size_t>(blocks));
  for (Index i = 0; i < n; ++i) {
    const Index b = i < blocks ? i : rng.integer(0, blocks - 1);
    out[static_cast<std::size_t>(b)].push_back(order[static_cast<std::size_t>(i)]);
  }
  return Partition::make(std::move(out), n);
}

AStochasticMatrix<double> random_a_stochastic(Rng& rng, Index rows, Index cols) {
  Partition partition = random_partition(rng, cols, rows);
  Matrix entries = Matrix::Zero(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    double total = 0.0;
    for (Index j : partition.block(i)) {
      // Keep weights away from zero so entries stay comfortably positive.
      entries(i, j) = rng.exponential() + 1e-3;
      total += entries(i, j);
    }
    entries.row(i) /= total;
  }
  return AStochasticMatrix<double>::make(std::move(entries), std::move(partition));
}

MarkovMorphism<double> random_morphism(Rng& rng, Index k, Index m, Index l, Index n) {
  auto R = random_a_stochastic(rng, k, l);
  std::vector<AStochasticMatrix<double>> Q;
  for (Index i = 0; i < k; ++i) Q.push_back(random_a_stochastic(rng, m, n));
  return MarkovMorphism<double>::make(std::move(R), std::move(Q));
}

MarkovMorphism<double> random_morphism(Rng& rng, const SizeBounds& bounds) {
  const Index k = rng.integer(1, bounds.kmax);
  const Index m = rng.integer(2, bounds.mmax);
  const Index l = rng.integer(k, std::max(k, bounds.lmax));
  const Index n = rng.integer(m, std::max(m, bounds.nmax));
  return random_morphism(rng, k, m, l, n);
}

PositiveModel random_model(Rng& rng, Index k, Index m, bool normalized) {
  Matrix entries(k, m);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < m; ++j) entries(i, j) = std::exp(rng.uniform(-1.0, 1.0));
  if (normalized) {
    for (Index i = 0; i < k; ++i) entries.row(i) /= entries.row(i).sum();
    return PositiveModel::make(std::move(entries), true);
  }
  return PositiveModel::make(std::move(entries));
}

TangentVector random_tangent(Rng& rng, Index k, Index m, bool normalized_context) {
  Matrix coeffs(k, m);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < m; ++j) coeffs(i, j) = rng.uniform(-1.0, 1.0);
  if (normalized_context) return project_to_normalized(coeffs);
  return TangentVector::make(std::move(coeffs));
}

ScalarField random_scalar_field(Rng& rng, bool positive) {
  const double coeff = positive ? rng.uniform(0.1, 2.0) : rng.uniform(-2.0, 2.0);
  switch (rng.integer(0, 2)) {
    case 0: return ScalarField::constant(coeff);
    case 1: return ScalarField::reciprocal(coeff);
    default: return ScalarField::power(coeff, rng.uniform(-2.0, 2.0));
  }
}

MetricParams random_metric(Rng& rng) {
  MetricParams p;
  p.A = random_scalar_field(rng, false);
  p.B = random_scalar_field(rng, false);
  p.C = random_scalar_field(rng, true);
  return p;
}

RationalModel random_rational_model(Rng& rng, Index k, Index m, std::int64_t entry_max,
                                    std::int64_t denominator) {
  IntMatrix num(k, m);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < m; ++j) num(i, j) = rng.integer(1, entry_max);
  return RationalModel::make(std::move(num), denominator);
}

}  // namespace cig
