#include "cig/suites.hpp"

#include "cig/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace cig {

std::optional<Suite> parse_suite(std::string_view name) {
  if (name == "isometry") return Suite::isometry;
  if (name == "norm") return Suite::norm;
  if (name == "prop3") return Suite::uniformizer;
  if (name == "corollary1") return Suite::reduction;
  if (name == "taylor") return Suite::taylor;
  if (name == "geodesic") return Suite::geodesic;
  if (name == "transport") return Suite::transport;
  return std::nullopt;
}

const char* to_string(Suite suite) {
  switch (suite) {
    case Suite::isometry: return "isometry";
    case Suite::norm: return "norm";
    case Suite::uniformizer: return "prop3";
    case Suite::reduction: return "corollary1";
    case Suite::taylor: return "taylor";
    case Suite::geodesic: return "geodesic";
    case Suite::transport: return "transport";
  }
  return "unknown";
}

double default_tolerance(Suite suite) {
  switch (suite) {
    case Suite::isometry: return 1e-9;
    case Suite::norm: return 1e-12;
    case Suite::uniformizer: return 0.0;
    case Suite::reduction: return 1e-10;
    case Suite::taylor: return 1e-12;
    case Suite::geodesic: return 1e-10;
    case Suite::transport: return 0.0;
  }
  return 0.0;
}

namespace {

// Spread allowed in |D - Q| / t^3 across the default Taylor steps.
constexpr double kTaylorSpread = 4.0;

std::string describe(const MetricParams& p) { return format_metric_spec(p); }

struct Context {
  const SuiteOptions& opts;
  double tol;
  SuiteReport& report;

  void fail(int trial, std::string what, double error) {
    report.failures.push_back({trial, std::move(what), error});
  }
  void observe(double error) {
    if (std::isnan(error) || error > report.max_error) report.max_error = error;
  }
};

void run_isometry(Context& ctx, Rng& rng) {
  std::vector<MetricParams> metrics;
  if (ctx.opts.metric)
    metrics.push_back(*ctx.opts.metric);
  else
    for (int i = 0; i < ctx.opts.metrics_per_trial; ++i) metrics.push_back(random_metric(rng));

  for (int t = 0; t < ctx.opts.trials; ++t) {
    const auto f = random_morphism(rng, ctx.opts.bounds);
    const auto M = random_model(rng, f.source_rows(), f.source_cols());
    for (const auto& params : metrics) {
      const auto rep = check_isometry(f, params, M, ctx.tol);
      ctx.observe(rep.max_scaled_error);
      if (!rep.pass) {
        std::ostringstream os;
        os << "pull-back differs at d" << rep.worst_ab.row + 1 << rep.worst_ab.col + 1 << ", d"
           << rep.worst_cd.row + 1 << rep.worst_cd.col + 1 << " under " << describe(params);
        ctx.fail(t, os.str(), rep.max_scaled_error);
      }
    }
  }
}

void run_norm(Context& ctx, Rng& rng) {
  for (int t = 0; t < ctx.opts.trials; ++t) {
    const auto f = random_morphism(rng, ctx.opts.bounds);
    const auto M = random_model(rng, f.source_rows(), f.source_cols());
    const double err = std::abs(l1_norm(apply_morphism(f, M)) - l1_norm(M));
    ctx.observe(err);
    if (!(err <= ctx.tol)) ctx.fail(t, "|f(M)| differs from |M|", err);
  }
}

RationalModel random_bounded_rational(Rng& rng, const SuiteOptions& opts) {
  const std::int64_t norm_max = std::max<std::int64_t>(opts.norm_max, 2);
  Index k, m;
  do {
    k = rng.integer(1, opts.bounds.kmax);
    m = rng.integer(2, std::max<Index>(2, opts.bounds.mmax));
  } while (k * m > norm_max);
  IntMatrix num = IntMatrix::Ones(k, m);
  const Index extra = rng.integer(0, norm_max - k * m);
  for (Index e = 0; e < extra; ++e) num(rng.integer(0, k - 1), rng.integer(0, m - 1)) += 1;
  return RationalModel::make(std::move(num), rng.integer(1, 5));
}

std::string describe(const RationalModel& model) {
  std::ostringstream os;
  os << "M~=[";
  for (Index i = 0; i < model.rows(); ++i) {
    if (i) os << ';';
    for (Index j = 0; j < model.cols(); ++j) os << (j ? "," : "") << model.numerators()(i, j);
  }
  os << "]/" << model.denominator();
  return os.str();
}

void check_one_uniformizer(Context& ctx, int trial, const RationalModel& model) {
  try {
    const auto check = check_uniformizer(model, ctx.opts.size_cap);
    ctx.observe(static_cast<double>(check.mismatches));
    if (!check.exact())
      ctx.fail(trial, describe(model) + ": " + std::to_string(check.mismatches) + " entries differ from " +
                          check.expected.str(),
               static_cast<double>(check.mismatches));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SizeCapExceeded && e.code() != ErrorCode::RationalOverflow) throw;
    ctx.fail(trial, describe(model) + ": " + e.what(), 0.0);
  }
}

void run_uniformizer(Context& ctx, Rng& rng) {
  for (int t = 0; t < ctx.opts.trials; ++t) check_one_uniformizer(ctx, t, random_bounded_rational(rng, ctx.opts));
}

void run_reduction(Context& ctx, Rng& rng) {
  for (int t = 0; t < ctx.opts.trials; ++t) {
    const Index k = rng.integer(1, ctx.opts.bounds.kmax);
    const Index m = rng.integer(2, std::max<Index>(2, ctx.opts.bounds.mmax));
    const auto M = random_model(rng, k, m, true);
    const auto u = random_tangent(rng, k, m, true);
    const auto v = random_tangent(rng, k, m, true);
    const ScalarField C = ctx.opts.metric ? ctx.opts.metric->C : random_scalar_field(rng, true);
    const double scale = static_cast<double>(k) * C(static_cast<double>(k));
    const double fisher = fisher_inner_product(M, u, v, scale);
    const double magnitude =
        scale * (u.coeffs().array().abs() * v.coeffs().array().abs() / M.entries().array()).sum();
    for (int c = 0; c < 5; ++c) {
      const MetricParams params{random_scalar_field(rng, false), random_scalar_field(rng, false), C};
      const double full = inner_product(params, M, u, v);
      const double err = std::abs(full - fisher) / std::max({std::abs(fisher), magnitude, 1e-300});
      ctx.observe(err);
      if (!(err <= ctx.tol))
        ctx.fail(t, "A/B-dependent inner product under " + describe(params), err);
    }
  }
}

void run_taylor(Context& ctx, Rng& rng) {
  for (int t = 0; t < ctx.opts.trials; ++t) {
    const Index k = rng.integer(1, ctx.opts.bounds.kmax);
    const Index m = rng.integer(2, std::max<Index>(2, ctx.opts.bounds.mmax));
    Vector w(k);
    for (Index i = 0; i < k; ++i) w(i) = rng.uniform(0.1, 1.0);
    const auto r = EmpiricalDistribution::make(w / w.sum());
    const auto p = random_model(rng, k, m, true);
    // One-signed directions keep the cubic coefficient sum r eps^3 / p^2
    // away from zero, so the remainder is genuinely third order.
    const double sign = t % 2 == 0 ? 1.0 : -1.0;
    Matrix e(k, m);
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < m; ++j) e(i, j) = sign * rng.uniform(0.2, 1.0) * p(i, j);
    const auto eps = TangentVector::make(e);

    // Exact identity: the quadratic form is the Fisher-choice squared length
    // of r eps at r p, i.e. half the product Fisher squared length.
    const auto rp = PositiveModel::make(weighted_model(r, p.entries()));
    const auto reps = TangentVector::make(weighted_model(r, e));
    const double quad = quadratic_form(r, p, eps);
    const double fisher_choice = inner_product(MetricParams::fisher(), rp, reps, reps);
    const double half_product = 0.5 * inner_product(MetricParams::cone(1.0), rp, reps, reps);
    const double id_err = std::max(std::abs(quad - fisher_choice), std::abs(quad - half_product)) / quad;
    ctx.observe(id_err);
    if (!(id_err <= ctx.tol)) ctx.fail(t, "quadratic form differs from the squared length", id_err);

    const auto reports = taylor_report(r, p, eps);
    double lo = INFINITY, hi = 0.0;
    for (const auto& rep : reports) {
      const double ratio = rep.abs_error / (rep.t * rep.t * rep.t);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    if (!(hi < kTaylorSpread * lo))
      ctx.fail(t, "|D - Q| / t^3 spread exceeds " + std::to_string(kTaylorSpread), hi / lo);
  }
}

void run_geodesic(Context& ctx, Rng& rng) {
  for (int t = 0; t < ctx.opts.trials; ++t) {
    const auto f = random_morphism(rng, ctx.opts.bounds);
    const auto M = random_model(rng, f.source_rows(), f.source_cols());
    const auto N = random_model(rng, f.source_rows(), f.source_cols());
    const double before = geodesic_distance_cone(M, N, 0.5);
    const double after = geodesic_distance_cone(apply_morphism(f, M), apply_morphism(f, N), 0.5);
    const double err = std::abs(before - after) / before;
    ctx.observe(err);
    if (!(err <= ctx.tol)) ctx.fail(t, "geodesic distance changed under f", err);
  }
}

void run_transport(Context& ctx, Rng& rng) {
  for (int t = 0; t < ctx.opts.trials; ++t) {
    const Index k = rng.integer(2, std::max<Index>(2, ctx.opts.bounds.kmax));
    const Index m = rng.integer(2, std::max<Index>(2, ctx.opts.bounds.mmax));
    auto pick = [&](BasisIndex& ab, BasisIndex& cd) {
      ab = {rng.integer(0, k - 1), rng.integer(0, m - 1)};
      do cd.row = rng.integer(0, k - 1); while (cd.row == ab.row);
      cd.col = rng.integer(0, m - 1);
    };
    BasisIndex ab1, cd1, ab2, cd2;
    pick(ab1, cd1);
    pick(ab2, cd2);
    const auto f = solve_basis_transport(ab1, cd1, ab2, cd2, k, m);
    const Matrix img_ab = push_forward(f, TangentVector::basis(k, m, ab1.row, ab1.col)).coeffs();
    const Matrix img_cd = push_forward(f, TangentVector::basis(k, m, cd1.row, cd1.col)).coeffs();
    const double err = std::max((img_ab - TangentVector::basis(k, m, ab2.row, ab2.col).coeffs()).cwiseAbs().maxCoeff(),
                                (img_cd - TangentVector::basis(k, m, cd2.row, cd2.col).coeffs()).cwiseAbs().maxCoeff());
    ctx.observe(err);
    if (!(err <= ctx.tol)) ctx.fail(t, "push-forward misses the requested basis vectors", err);
  }
}

}  // namespace

SuiteReport run_check_suite(const SuiteOptions& opts) {
  if (opts.trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  SuiteReport report;
  report.suite = to_string(opts.suite);
  report.trials = opts.trials;
  report.seed = opts.seed;
  Context ctx{opts, opts.tol.value_or(default_tolerance(opts.suite)), report};
  Rng rng(opts.seed);
  switch (opts.suite) {
    case Suite::isometry: run_isometry(ctx, rng); break;
    case Suite::norm: run_norm(ctx, rng); break;
    case Suite::uniformizer: run_uniformizer(ctx, rng); break;
    case Suite::reduction: run_reduction(ctx, rng); break;
    case Suite::taylor: run_taylor(ctx, rng); break;
    case Suite::geodesic: run_geodesic(ctx, rng); break;
    case Suite::transport: run_transport(ctx, rng); break;
  }
  report.pass = report.failures.empty();
  return report;
}

nlohmann::json to_json(const SuiteReport& report) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : report.failures)
    failures.push_back({{"trial", f.trial}, {"description", f.description}, {"error", f.error}});
  return {{"suite", report.suite},       {"trials", report.trials},
          {"seed", report.seed},         {"max_error", report.max_error},
          {"failures", std::move(failures)}, {"pass", report.pass}};
}

UniformizerCheck check_uniformizer(const RationalModel& model, std::int64_t size_cap) {
  const auto f = rational_uniformizer(model, size_cap);
  UniformizerCheck out;
  out.rows = f.target_rows();
  out.cols = f.target_cols();
  std::int64_t prod = 1;
  for (Index s = 0; s < model.rows(); ++s) prod *= model.numerator_row_sum(s);
  out.expected = Rational(1, model.denominator()) / Rational(prod);

  MatrixX<Rational> M(model.rows(), model.cols());
  for (Index i = 0; i < model.rows(); ++i)
    for (Index j = 0; j < model.cols(); ++j)
      M(i, j) = Rational(model.numerators()(i, j), model.denominator());
  const MatrixX<Rational> image = apply_linear<Rational>(f, M);
  for (Index i = 0; i < image.rows(); ++i)
    for (Index j = 0; j < image.cols(); ++j)
      if (!(image(i, j) == out.expected)) ++out.mismatches;
  return out;
}

SuiteReport certify_uniformizer_exhaustive(std::int64_t norm_max,
                                           const std::vector<std::int64_t>& denominators,
                                           std::int64_t size_cap) {
  SuiteReport report;
  report.suite = "uniformizer-exhaustive";
  SuiteOptions opts;
  opts.size_cap = size_cap;
  Context ctx{opts, 0.0, report};

  int trial = 0;
  for (Index k = 1; k <= norm_max; ++k) {
    for (Index m = 2; k * m <= norm_max; ++m) {
      const Index cells = k * m;
      std::vector<std::int64_t> entries(static_cast<std::size_t>(cells), 1);
      // All positive integer vectors of length k*m with sum <= norm_max.
      std::function<void(Index, std::int64_t)> fill = [&](Index pos, std::int64_t remaining) {
        if (pos == cells) {
          IntMatrix num(k, m);
          for (Index c = 0; c < cells; ++c) num(c / m, c % m) = entries[static_cast<std::size_t>(c)];
          for (std::int64_t z : denominators) check_one_uniformizer(ctx, trial++, RationalModel::make(num, z));
          return;
        }
        const Index left_after = cells - pos - 1;
        for (std::int64_t v = 1; v <= remaining - left_after; ++v) {
          entries[static_cast<std::size_t>(pos)] = v;
          fill(pos + 1, remaining - v);
        }
      };
      fill(0, norm_max);
    }
  }
  report.trials = trial;
  report.pass = report.failures.empty();
  return report;
}

MarkovMorphism<double> corrupt_q_row(const MarkovMorphism<double>& f, Index q_index, Index row,
                                     double factor) {
  std::vector<AStochasticMatrix<double>> Q = f.Qs();
  const auto& target = Q.at(static_cast<std::size_t>(q_index));
  Matrix entries = target.entries();
  entries.row(row) *= factor;
  Q[static_cast<std::size_t>(q_index)] = AStochasticMatrix<double>::unchecked(std::move(entries), target.partition());
  return MarkovMorphism<double>::make(f.R(), std::move(Q));
}

}  // namespace cig
