#include "cig/morphism.hpp"
#include "cig/random.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace cig;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

Partition example_partition() { return Partition::make({{0, 2}, {1, 3}, {4}}, 5); }

MatrixX<Rational> example_matrix() {
  MatrixX<Rational> Q = MatrixX<Rational>::Zero(3, 5);
  Q(0, 0) = Rational(1, 3);
  Q(0, 2) = Rational(2, 3);
  Q(1, 1) = Rational(1, 2);
  Q(1, 3) = Rational(1, 2);
  Q(2, 4) = Rational(1);
  return Q;
}

MatrixX<Rational> rational_matrix(const IntMatrix& num, std::int64_t den) {
  MatrixX<Rational> out(num.rows(), num.cols());
  for (Index i = 0; i < num.rows(); ++i)
    for (Index j = 0; j < num.cols(); ++j) out(i, j) = Rational(num(i, j), den);
  return out;
}

}  // namespace

TEST_CASE("partitions") {
  const auto p = example_partition();
  CHECK(p.block_count() == 3);
  CHECK(p.owner(3) == 1);
  CHECK(p.block(0) == std::vector<Index>{0, 2});
  CHECK(code_of([] { Partition::make({{0}, {1}}, 3); }) == ErrorCode::Gap);
  CHECK(code_of([] { Partition::make({{0, 1}, {1, 2}}, 3); }) == ErrorCode::Overlap);
  CHECK(code_of([] { Partition::make({{0, 1}, {}}, 2); }) == ErrorCode::EmptyBlock);
  CHECK(code_of([] { Partition::make({{0, 5}}, 2); }) == ErrorCode::IndexOutOfRange);
  const std::vector<Index> sizes{2, 1, 3};
  const auto c = Partition::contiguous(sizes);
  CHECK(c.ground_size() == 6);
  CHECK(c.block(2) == std::vector<Index>{3, 4, 5});
}

TEST_CASE("A-stochastic matrices") {
  const auto Q = example_matrix();
  CHECK(is_a_stochastic<Rational>(Q, example_partition()));
  CHECK(is_a_stochastic<Rational>(MatrixX<Rational>::Identity(3, 3), Partition::identity(3)));
  MatrixX<Rational> scaled = Q;
  scaled.row(1) *= Rational(2);
  CHECK_FALSE(is_a_stochastic<Rational>(scaled, example_partition()));
  // Support must match the block exactly.
  MatrixX<Rational> moved = Q;
  moved(0, 0) = Rational(0);
  moved(0, 1) = Rational(1, 3);
  CHECK_FALSE(is_a_stochastic<Rational>(moved, example_partition()));
  CHECK(code_of([&] { AStochasticMatrix<Rational>::make(scaled, example_partition()); }) ==
        ErrorCode::NotAStochastic);
}

TEST_CASE("uniform A-stochastic matrices") {
  MatrixX<Rational> U = MatrixX<Rational>::Zero(3, 6);
  U(0, 0) = U(0, 2) = U(1, 1) = U(1, 3) = U(2, 4) = U(2, 5) = Rational(1, 2);
  CHECK(is_uniform_a_stochastic<Rational>(U, Partition::make({{0, 2}, {1, 3}, {4, 5}}, 6)));
  CHECK_FALSE(is_uniform_a_stochastic<Rational>(example_matrix(), example_partition()));
  CHECK(is_uniform_a_stochastic<double>(Matrix::Identity(4, 4), Partition::identity(4)));
}

TEST_CASE("row product") {
  const Matrix M = Matrix::Random(3, 2).cwiseAbs();
  std::vector<Matrix> I(3, Matrix::Identity(2, 2));
  CHECK(row_product<double>(M, I) == M);
  MatrixX<Rational> ones = MatrixX<Rational>::Constant(1, 3, Rational(1));
  std::vector<MatrixX<Rational>> Q{example_matrix()};
  const MatrixX<Rational> out = row_product<Rational>(ones, Q);
  CHECK(out(0, 0) == Rational(1, 3));
  CHECK(out(0, 1) == Rational(1, 2));
  CHECK(out(0, 2) == Rational(2, 3));
  CHECK(out(0, 3) == Rational(1, 2));
  CHECK(out(0, 4) == Rational(1));
  CHECK(out.sum() == Rational(3));
}

TEST_CASE("applying morphisms") {
  Rng rng(1);
  const auto M = random_model(rng, 2, 3);
  const auto id = MarkovMorphism<double>::identity(2, 3);
  CHECK(apply_morphism(id, M).entries() == M.entries());
  const auto rep = uniform_replication<double>(1, 2, 2, 2);
  Matrix ab(1, 2);
  ab << 3.0, 5.0;
  const Matrix out = apply_morphism(rep, PositiveModel::make(ab)).entries();
  REQUIRE(out.rows() == 2);
  REQUIRE(out.cols() == 4);
  for (Index i = 0; i < 2; ++i) {
    CHECK(out(i, 0) == 0.75);
    CHECK(out(i, 1) == 0.75);
    CHECK(out(i, 2) == 1.25);
    CHECK(out(i, 3) == 1.25);
  }
  CHECK(out.sum() == 8.0);
  CHECK(code_of([&] { apply_morphism(id, random_model(rng, 3, 3)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("normalized images") {
  Rng rng(3);
  const auto M = random_model(rng, 3, 2, true);
  SUBCASE("permutation R keeps the rows normalized") {
    const auto id = MarkovMorphism<double>::identity(3, 2);
    CHECK(apply_morphism(id, M).normalized());
    const auto tf = solve_basis_transport({0, 0}, {1, 1}, {2, 1}, {0, 0}, 3, 2);
    const auto out = apply_morphism(tf, M);
    CHECK(out.normalized());
    CHECK((out.entries().rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
  }
  SUBCASE("replicated rows are not") {
    const auto out = apply_morphism(uniform_replication<double>(3, 2, 2, 1), M);
    CHECK_FALSE(out.normalized());
    CHECK(out.entries().sum() == doctest::Approx(3.0));
  }
}

TEST_CASE("replication of a constant model stays constant") {
  for (Index z = 1; z <= 3; ++z)
    for (Index w = 1; w <= 3; ++w) {
      const auto f = uniform_replication<Rational>(2, 3, z, w);
      const MatrixX<Rational> U = MatrixX<Rational>::Constant(2, 3, Rational(1, 6));
      const MatrixX<Rational> out = apply_linear<Rational>(f, U);
      CHECK(out.rows() == 2 * z);
      CHECK(out.cols() == 3 * w);
      CHECK(out.sum() == Rational(1));
      for (Index i = 0; i < out.rows(); ++i)
        for (Index j = 0; j < out.cols(); ++j) CHECK(out(i, j) == Rational(1, 6 * z * w));
    }
  const auto id = uniform_replication<double>(2, 3, 1, 1);
  CHECK(id.R().entries() == Matrix::Identity(2, 2));
}

TEST_CASE("push-forward") {
  Rng rng(2);
  const auto v = random_tangent(rng, 2, 3, true);
  const auto same = push_forward(MarkovMorphism<double>::identity(2, 3), v);
  CHECK(same.coeffs() == v.coeffs());
  CHECK(same.normalized_context());
  const auto f = random_morphism(rng, 2, 3, 5, 7);
  for (Index a = 0; a < 2; ++a)
    for (Index b = 0; b < 3; ++b)
      CHECK(push_forward(f, TangentVector::basis(2, 3, a, b)).coeffs().isApprox(oracle::push_basis(f, a, b)));
  // Zero row sums survive.
  const auto w = push_forward(f, v);
  CHECK(w.coeffs().rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("pull-back agrees with the quadruple-sum oracle") {
  Rng rng(4);
  for (int t = 0; t < 30; ++t) {
    const auto f = random_morphism(rng, SizeBounds{3, 3, 6, 6});
    const auto params = random_metric(rng);
    const auto M = random_model(rng, f.source_rows(), f.source_cols());
    const Index a = rng.integer(0, f.source_rows() - 1), b = rng.integer(0, f.source_cols() - 1);
    const Index c = rng.integer(0, f.source_rows() - 1), d = rng.integer(0, f.source_cols() - 1);
    const double fast = pull_back_metric(f, params, M, {a, b}, {c, d});
    const double slow = oracle::pull_back(f, params, M.entries(), a, b, c, d);
    CAPTURE(format_metric_spec(params));
    CHECK(std::abs(fast - slow) <= 1e-10 * (1 + std::abs(slow)));
    // And both equal the source metric.
    CHECK(std::abs(slow - oracle::metric_entry(params, M.entries(), a, b, c, d)) <= 1e-9 * (1 + std::abs(slow)));
  }
}

TEST_CASE("pull-back through the identity is the metric itself") {
  Rng rng(6);
  const auto M = random_model(rng, 3, 2);
  const auto params = random_metric(rng);
  const auto rep = check_isometry(MarkovMorphism<double>::identity(3, 2), params, M, 1e-12);
  CHECK(rep.pass);
  CHECK(rep.max_abs_error <= 1e-14 * (1 + std::abs(metric_basis(params, M, {0, 0}, {0, 0}))));
}

TEST_CASE("permutation morphisms relabel the metric") {
  const std::vector<Index> sigma{2, 0, 1};
  const std::vector<std::vector<Index>> pis{{1, 0}, {0, 1}, {1, 0}};
  const auto f = permutation_morphism(sigma, pis);
  Rng rng(8);
  const auto M = random_model(rng, 3, 2);
  const auto params = random_metric(rng);
  const auto image = apply_morphism(f, M);
  for (Index a = 0; a < 3; ++a)
    for (Index b = 0; b < 2; ++b) {
      const auto sa = sigma[static_cast<std::size_t>(a)];
      const auto pb = pis[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      CHECK(image(sa, pb) == M(a, b));
      for (Index c = 0; c < 3; ++c)
        for (Index d = 0; d < 2; ++d) {
          const auto sc = sigma[static_cast<std::size_t>(c)];
          const auto pd = pis[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)];
          CHECK(metric_basis(params, M, {a, b}, {c, d}) ==
                doctest::Approx(metric_basis(params, image, {sa, pb}, {sc, pd})).epsilon(1e-13));
        }
    }
  const std::vector<Index> bad{0, 0, 1};
  CHECK(code_of([&] { permutation_morphism(bad, pis); }) == ErrorCode::NotAPermutation);
}

TEST_CASE("basis transport") {
  const auto f = solve_basis_transport({0, 0}, {1, 2}, {1, 1}, {0, 0}, 2, 3);
  CHECK(push_forward(f, TangentVector::basis(2, 3, 0, 0)).coeffs() == TangentVector::basis(2, 3, 1, 1).coeffs());
  CHECK(push_forward(f, TangentVector::basis(2, 3, 1, 2)).coeffs() == TangentVector::basis(2, 3, 0, 0).coeffs());
  const auto g = solve_basis_transport({0, 1}, {1, 0}, {0, 1}, {1, 0}, 2, 2);
  CHECK(g.R().entries() == Matrix::Identity(2, 2));
  CHECK(code_of([] { solve_basis_transport({0, 0}, {0, 1}, {1, 1}, {0, 0}, 2, 3); }) ==
        ErrorCode::PreconditionViolated);
  CHECK(code_of([] { solve_basis_transport({0, 0}, {1, 3}, {1, 1}, {0, 0}, 2, 3); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("rational uniformizer") {
  const auto check = [](IntMatrix num, std::int64_t z, std::int64_t rows, std::int64_t cols, Rational value) {
    const auto model = RationalModel::make(num, z);
    const auto f = rational_uniformizer(model);
    CHECK(f.target_rows() == rows);
    CHECK(f.target_cols() == cols);
    const MatrixX<Rational> out = apply_linear<Rational>(f, rational_matrix(num, z));
    for (Index i = 0; i < out.rows(); ++i)
      for (Index j = 0; j < out.cols(); ++j) CHECK(out(i, j) == value);
    // The double cast gives the same map up to rounding.
    const Matrix approx = apply_morphism(f.cast<double>(), model.to_model()).entries();
    CHECK((approx.array() - value.to_double()).abs().maxCoeff() < 1e-15);
  };
  check(IntMatrix::Ones(2, 2), 2, 4, 4, Rational(1, 8));
  IntMatrix one_two(1, 2);
  one_two << 1, 2;
  check(one_two, 3, 3, 3, Rational(1, 9));
  IntMatrix mixed(2, 3);
  mixed << 1, 2, 3, 2, 1, 1;
  check(mixed, 5, 10, 24, Rational(1, 5 * 6 * 4));

  const auto shape = uniformizer_shape(RationalModel::make(mixed, 1));
  CHECK(shape.first == 10);
  CHECK(shape.second == 24);
  CHECK(code_of([&] { rational_uniformizer(RationalModel::make(mixed, 1), 100); }) == ErrorCode::SizeCapExceeded);
}

TEST_CASE("uniformizer matrices are A-stochastic with the documented blocks") {
  IntMatrix num(2, 2);
  num << 1, 2, 3, 1;
  const auto f = rational_uniformizer(RationalModel::make(num, 1));
  CHECK(f.R().partition().block(0).size() == 3);
  CHECK(f.R().partition().block(1).size() == 4);
  // Row b of Q(i) covers M~_ib * prod_{s != i} |M~_s| columns.
  CHECK(f.Q(0).partition().block(1).size() == 2 * 4);
  CHECK(f.Q(1).partition().block(0).size() == 3 * 3);
  // Row i of R spreads evenly over its |M~_i| columns.
  CHECK(f.R()(0, f.R().partition().block(0).front()) == Rational(1, 3));
  CHECK(f.R()(1, f.R().partition().block(1).back()) == Rational(1, 4));
  CHECK_FALSE(is_uniform_a_stochastic<Rational>(f.R().entries(), f.R().partition()));
}

TEST_CASE("composition") {
  Rng rng(10);
  const auto f = random_morphism(rng, 2, 2, 3, 4);
  const auto id = MarkovMorphism<double>::identity(3, 4);
  const auto fi = compose(f, id);
  CHECK(fi.R().entries().isApprox(f.R().entries()));
  CHECK(compose(MarkovMorphism<double>::identity(2, 2), MarkovMorphism<double>::identity(2, 2)).R().entries() ==
        Matrix::Identity(2, 2));

  // A g whose Q matrices are shared across rows composes with any f.
  auto g_base = random_morphism(rng, 3, 4, 5, 6);
  std::vector<AStochasticMatrix<double>> shared(3, g_base.Q(0));
  const auto g = MarkovMorphism<double>::make(g_base.R(), shared);
  const auto h = compose(f, g);
  const auto M = random_model(rng, 2, 2);
  CHECK(apply_morphism(h, M).entries().isApprox(apply_morphism(g, apply_morphism(f, M)).entries(), 1e-13));

  // Exact arithmetic: composing replications is a replication.
  const auto r1 = uniform_replication<Rational>(1, 2, 2, 3);
  const auto r2 = uniform_replication<Rational>(2, 6, 2, 2);
  const auto r12 = compose(r1, r2);
  const auto direct = uniform_replication<Rational>(1, 2, 4, 6);
  CHECK(r12.R().entries() == direct.R().entries());
  CHECK(r12.Q(0).entries() == direct.Q(0).entries());

  if (f.R().partition().block(0).size() > 1 || f.R().partition().block(1).size() > 1) {
    CHECK(code_of([&] { compose(f, g_base); }) == ErrorCode::NotComposable);
  }
  CHECK(code_of([&] { compose(f, MarkovMorphism<double>::identity(2, 2)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("isometry report") {
  Rng rng(12);
  const auto f = random_morphism(rng, 3, 3, 7, 8);
  const auto M = random_model(rng, 3, 3);
  const auto params = random_metric(rng);
  CHECK(check_isometry(f, params, M, 1e-9).pass);
  Matrix broken = f.Q(1).entries();
  broken.row(0) *= 1.01;
  std::vector<AStochasticMatrix<double>> Q = f.Qs();
  Q[1] = AStochasticMatrix<double>::unchecked(broken, f.Q(1).partition());
  const auto bad = MarkovMorphism<double>::make(f.R(), Q);
  const auto rep = check_isometry(bad, MetricParams::fisher(), M, 1e-9);
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_scaled_error > 1e-4);
}
