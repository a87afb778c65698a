// cig_cli: invariance suites, metric and divergence calculators, morphism
// builder/applier and model fitting.
//
// Exit status: 0 on success (or a passing check), 1 when a check fails,
// 2 on usage or input errors. Every result is computed in full before
// anything is written, so error paths produce no partial output.

#include "cig/divergence.hpp"
#include "cig/fitting.hpp"
#include "cig/io.hpp"
#include "cig/metric.hpp"
#include "cig/morphism.hpp"
#include "cig/random.hpp"
#include "cig/suites.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using cig::Index;
using cig::Matrix;
using cig::io::Json;

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Output {
  std::string path = "-";

  void write(const std::string& text) const {
    if (path == "-") {
      std::cout << text;
      std::cout.flush();
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cig::Error(cig::ErrorCode::InvalidArgument, "cannot open " + path + " for writing");
    out << text;
  }
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// Non-finite values have no JSON number form.
Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

Json vector_json(const cig::Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

std::string matrix_csv(const Matrix& m) {
  std::ostringstream os;
  cig::io::write_matrix_csv(os, m);
  return os.str();
}

cig::PositiveModel load_model(const std::string& path, bool normalized) {
  return cig::PositiveModel::make(cig::io::read_matrix_csv_file(path), normalized);
}

// "a,b" with 1-based indices.
cig::BasisIndex parse_pair(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw cig::Error(cig::ErrorCode::Parse, "expected a,b in '" + text + "'");
  try {
    std::size_t used = 0;
    const long a = std::stol(text.substr(0, comma), &used);
    const std::string rest = text.substr(comma + 1);
    std::size_t used_b = 0;
    const long b = std::stol(rest, &used_b);
    if (used_b != rest.size() || a < 1 || b < 1) throw std::invalid_argument("");
    return {a - 1, b - 1};
  } catch (const std::logic_error&) {
    throw cig::Error(cig::ErrorCode::Parse, "expected positive integers a,b in '" + text + "'");
  }
}

Json isometry_json(const cig::IsometryReport& rep) {
  return {{"max_abs_error", rep.max_abs_error},
          {"max_scaled_error", rep.max_scaled_error},
          {"worst_ab", {rep.worst_ab.row + 1, rep.worst_ab.col + 1}},
          {"worst_cd", {rep.worst_cd.row + 1, rep.worst_cd.col + 1}},
          {"pass", rep.pass}};
}

void add_bounds(CLI::App* cmd, cig::SizeBounds& bounds) {
  cmd->add_option("--kmax", bounds.kmax, "Largest source row count")->check(CLI::PositiveNumber);
  cmd->add_option("--mmax", bounds.mmax, "Largest source column count")->check(CLI::Range(2, 1 << 20));
  cmd->add_option("--lmax", bounds.lmax, "Largest target row count")->check(CLI::PositiveNumber);
  cmd->add_option("--nmax", bounds.nmax, "Largest target column count")->check(CLI::Range(2, 1 << 20));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional information geometry toolkit"};
  app.require_subcommand(1);
  Output output;
  app.add_option("--out", output.path, "Output path, - for standard output");

  // check
  auto* check = app.add_subcommand("check", "Run a randomized invariance suite");
  cig::SuiteOptions suite_opts;
  std::string suite_name, check_metric;
  double check_tol = 0.0;
  check->add_option("--suite", suite_name,
                    "isometry | norm | prop3 | corollary1 | taylor | geodesic | transport")
      ->required();
  check->add_option("--trials", suite_opts.trials)->check(CLI::PositiveNumber);
  check->add_option("--seed", suite_opts.seed);
  auto* check_tol_opt = check->add_option("--tol", check_tol)->check(CLI::NonNegativeNumber);
  check->add_option("--metric", check_metric, "Metric spec; random when absent");
  check->add_option("--norm-max", suite_opts.norm_max, "uniformizer suite: largest |M~|")->check(CLI::PositiveNumber);
  check->add_option("--size-cap", suite_opts.size_cap, "uniformizer suite: largest output in cells")
      ->check(CLI::PositiveNumber);
  check->add_option("--out", output.path);
  add_bounds(check, suite_opts.bounds);

  // metric
  auto* metric = app.add_subcommand("metric", "Evaluate the metric at a model");
  std::string metric_spec = "fisher", metric_model, metric_u, metric_v;
  std::vector<std::string> basis_pair;
  bool gram = false, metric_normalized = false;
  metric->add_option("--metric", metric_spec);
  metric->add_option("--model", metric_model, "Model CSV")->required();
  metric->add_flag("--normalized", metric_normalized, "Rows of the model sum to one");
  auto* u_opt = metric->add_option("--u", metric_u, "Tangent CSV");
  auto* v_opt = metric->add_option("--v", metric_v, "Tangent CSV");
  auto* gram_opt = metric->add_flag("--gram", gram, "Print the km x km Gram matrix");
  auto* basis_opt = metric->add_option("--basis", basis_pair, "Two 1-based pairs a,b c,d")->expected(2);
  u_opt->needs(v_opt);
  v_opt->needs(u_opt);
  gram_opt->excludes(u_opt)->excludes(basis_opt);
  basis_opt->excludes(u_opt);
  metric->add_option("--out", output.path);

  // morph
  auto* morph = app.add_subcommand("morph", "Build and apply congruent embeddings");
  morph->require_subcommand(1);
  auto* build = morph->add_subcommand("build", "Write a morphism as JSON");
  std::string build_kind = "random";
  Index bk = 2, bm = 2, bl = 0, bn = 0;
  std::uint64_t build_seed = 42;
  std::vector<std::string> transport_pairs;
  std::vector<Index> replicate;
  std::string uniformizer_model;
  std::int64_t denominator = 0, build_size_cap = cig::kDefaultSizeCap;
  build->add_option("--kind", build_kind, "random | transport | replicate | uniformizer")
      ->check(CLI::IsMember({"random", "transport", "replicate", "uniformizer"}));
  build->add_option("--k", bk)->check(CLI::PositiveNumber);
  build->add_option("--m", bm)->check(CLI::Range(Index{2}, Index{1} << 20));
  build->add_option("--l", bl, "Target rows (random)")->check(CLI::PositiveNumber);
  build->add_option("--n", bn, "Target columns (random)")->check(CLI::PositiveNumber);
  build->add_option("--seed", build_seed);
  build->add_option("--pairs", transport_pairs, "transport: a,b c,d a',b' c',d' (1-based)")->expected(4);
  build->add_option("--factors", replicate, "replicate: z w")->expected(2)->check(CLI::PositiveNumber);
  build->add_option("--model", uniformizer_model, "uniformizer: integer numerator CSV");
  build->add_option("--denominator", denominator, "uniformizer: z")->check(CLI::PositiveNumber);
  build->add_option("--size-cap", build_size_cap)->check(CLI::PositiveNumber);
  build->add_option("--out", output.path);

  std::string morphism_path, apply_model, push_tangent, morph_metric = "fisher";
  bool apply_normalized = false;
  double morph_tol = 1e-9;
  auto* apply = morph->add_subcommand("apply", "Apply a morphism to a model");
  apply->add_option("--morphism", morphism_path)->required();
  apply->add_option("--model", apply_model)->required();
  apply->add_option("--out", output.path);
  auto* push = morph->add_subcommand("pushforward", "Push a tangent vector forward");
  push->add_option("--morphism", morphism_path)->required();
  push->add_option("--tangent", push_tangent)->required();
  push->add_option("--out", output.path);
  auto* morph_check = morph->add_subcommand("check", "Compare the metric with its pull-back");
  morph_check->add_option("--morphism", morphism_path)->required();
  morph_check->add_option("--model", apply_model)->required();
  morph_check->add_flag("--normalized", apply_normalized);
  morph_check->add_option("--metric", morph_metric);
  morph_check->add_option("--tol", morph_tol)->check(CLI::NonNegativeNumber);
  morph_check->add_option("--out", output.path);

  // div
  auto* div = app.add_subcommand("div", "Conditional I-divergence");
  std::string div_r, div_p, div_q, div_eps;
  std::vector<double> div_steps;
  bool vs_geodesic = false;
  div->add_option("--r", div_r, "Weights over x (CSV)")->required();
  div->add_option("--p", div_p, "Model CSV")->required();
  auto* q_opt = div->add_option("--q", div_q, "Model CSV");
  auto* eps_opt = div->add_option("--eps", div_eps, "Perturbation CSV: Taylor report");
  auto* t_opt = div->add_option("--t", div_steps, "Taylor steps")->check(CLI::PositiveNumber);
  auto* vs_opt = div->add_flag("--vs-geodesic", vs_geodesic, "Compare with the half squared distance");
  q_opt->excludes(eps_opt);
  t_opt->needs(eps_opt);
  vs_opt->needs(q_opt);
  div->add_option("--out", output.path);

  // geodesic
  auto* geo = app.add_subcommand("geodesic", "Geodesic distance between two models");
  std::string geo_kind = "cone", geo_m, geo_n;
  double geo_c = 0.5, geo_lambda = 1.0;
  geo->add_option("--kind", geo_kind)->check(CLI::IsMember({"cone", "normalized"}));
  geo->add_option("--m", geo_m, "Model CSV")->required();
  geo->add_option("--n", geo_n, "Model CSV")->required();
  geo->add_option("--c", geo_c, "cone: C(t) = c/t")->check(CLI::PositiveNumber);
  geo->add_option("--lambda", geo_lambda, "normalized: metric scale")->check(CLI::PositiveNumber);
  geo->add_option("--out", output.path);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a logistic or boosting model");
  std::string fit_kind = "logistic", fit_data, fit_features;
  cig::LogisticOptions logistic_opts;
  cig::AdaBoostOptions boost_opts;
  fit->add_option("--kind", fit_kind)->check(CLI::IsMember({"logistic", "boost"}));
  fit->add_option("--data", fit_data, "Dataset CSV of 1-based x,y")->required();
  fit->add_option("--features", fit_features, "Features JSON")->required();
  fit->add_option("--tol", logistic_opts.tol)->check(CLI::PositiveNumber);
  fit->add_option("--max-iter", logistic_opts.max_iter)->check(CLI::PositiveNumber);
  fit->add_option("--rounds", boost_opts.rounds)->check(CLI::PositiveNumber);
  fit->add_option("--out", output.path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*check) {
      const auto suite = cig::parse_suite(suite_name);
      if (!suite) throw cig::Error(cig::ErrorCode::UnknownSuite, suite_name);
      suite_opts.suite = *suite;
      if (*check_tol_opt) suite_opts.tol = check_tol;
      if (!check_metric.empty()) suite_opts.metric = cig::parse_metric_spec(check_metric);
      const auto report = cig::run_check_suite(suite_opts);
      output.write(dump(cig::to_json(report)));
      return report.pass ? 0 : kExitFail;
    }

    if (*metric) {
      const auto params = cig::parse_metric_spec(metric_spec);
      const auto M = load_model(metric_model, metric_normalized);
      if (gram) {
        output.write(matrix_csv(cig::gram_matrix(params, M)));
      } else if (!basis_pair.empty()) {
        const auto ab = parse_pair(basis_pair[0]);
        const auto cd = parse_pair(basis_pair[1]);
        output.write(cig::io::format_double(cig::metric_basis(params, M, ab, cd)) + "\n");
      } else if (!metric_u.empty()) {
        const auto u = cig::TangentVector::make(cig::io::read_matrix_csv_file(metric_u), metric_normalized);
        const auto v = cig::TangentVector::make(cig::io::read_matrix_csv_file(metric_v), metric_normalized);
        output.write(cig::io::format_double(cig::inner_product(params, M, u, v)) + "\n");
      } else {
        throw CLI::RequiredError("one of --u/--v, --gram or --basis");
      }
      return 0;
    }

    if (*build) {
      Json j;
      if (build_kind == "random") {
        cig::Rng rng(build_seed);
        const Index l = bl ? bl : bk, n = bn ? bn : bm;
        if (l < bk || n < bm) throw cig::Error(cig::ErrorCode::InvalidArgument, "need l >= k and n >= m");
        j = cig::io::morphism_to_json(cig::random_morphism(rng, bk, bm, l, n));
      } else if (build_kind == "transport") {
        if (transport_pairs.size() != 4) throw CLI::RequiredError("--pairs");
        j = cig::io::morphism_to_json(cig::solve_basis_transport(
            parse_pair(transport_pairs[0]), parse_pair(transport_pairs[1]), parse_pair(transport_pairs[2]),
            parse_pair(transport_pairs[3]), bk, bm));
      } else if (build_kind == "replicate") {
        if (replicate.size() != 2) throw CLI::RequiredError("--factors");
        j = cig::io::morphism_to_json(cig::uniform_replication<cig::Rational>(bk, bm, replicate[0], replicate[1]));
      } else {
        if (uniformizer_model.empty() || denominator == 0) throw CLI::RequiredError("--model and --denominator");
        const Matrix raw = cig::io::read_matrix_csv_file(uniformizer_model);
        cig::IntMatrix num(raw.rows(), raw.cols());
        for (Index i = 0; i < raw.rows(); ++i)
          for (Index c = 0; c < raw.cols(); ++c) {
            if (raw(i, c) != std::round(raw(i, c)))
              throw cig::Error(cig::ErrorCode::Parse, "numerators must be integers", i, c);
            num(i, c) = static_cast<std::int64_t>(raw(i, c));
          }
        const auto model = cig::RationalModel::make(std::move(num), denominator);
        j = cig::io::morphism_to_json(cig::rational_uniformizer(model, build_size_cap));
      }
      output.write(dump(j));
      return 0;
    }

    if (*apply) {
      const auto f = cig::io::morphism_from_json(cig::io::read_json_file(morphism_path));
      const auto M = load_model(apply_model, false);
      output.write(matrix_csv(cig::apply_morphism(f, M).entries()));
      return 0;
    }

    if (*push) {
      const auto f = cig::io::morphism_from_json(cig::io::read_json_file(morphism_path));
      const auto v = cig::TangentVector::make(cig::io::read_matrix_csv_file(push_tangent));
      output.write(matrix_csv(cig::push_forward(f, v).coeffs()));
      return 0;
    }

    if (*morph_check) {
      const auto f = cig::io::morphism_from_json(cig::io::read_json_file(morphism_path));
      const auto params = cig::parse_metric_spec(morph_metric);
      const auto M = load_model(apply_model, apply_normalized);
      const auto rep = cig::check_isometry(f, params, M, morph_tol);
      output.write(dump(isometry_json(rep)));
      return rep.pass ? 0 : kExitFail;
    }

    if (*div) {
      const auto r = cig::EmpiricalDistribution::make(cig::io::read_vector_csv_file(div_r));
      if (!div_eps.empty()) {
        const auto p = load_model(div_p, false);
        const auto eps = cig::TangentVector::make(cig::io::read_matrix_csv_file(div_eps));
        const auto reports = div_steps.empty() ? cig::taylor_report(r, p, eps)
                                               : cig::taylor_report(r, p, eps, div_steps);
        Json rows = Json::array();
        for (const auto& rep : reports)
          rows.push_back({{"t", rep.t},
                          {"divergence", number(rep.divergence)},
                          {"quadratic", number(rep.quadratic)},
                          {"abs_error", number(rep.abs_error)},
                          {"cancellation_dominated", rep.cancellation_dominated}});
        output.write(dump(rows));
        return 0;
      }
      if (div_q.empty()) throw CLI::RequiredError("--q or --eps");
      if (vs_geodesic) {
        const auto p = load_model(div_p, true);
        const auto q = load_model(div_q, true);
        const auto g = cig::divergence_vs_geodesic(r, p, q);
        output.write(dump({{"divergence", number(g.divergence)},
                           {"half_sq_distance", number(g.half_sq_distance)},
                           {"ratio", number(g.ratio)}}));
        return 0;
      }
      const Matrix p = cig::io::read_matrix_csv_file(div_p);
      const Matrix q = cig::io::read_matrix_csv_file(div_q);
      output.write(cig::io::format_double(cig::i_divergence_closure(r, p, q)) + "\n");
      return 0;
    }

    if (*geo) {
      const bool normalized = geo_kind == "normalized";
      const auto M = load_model(geo_m, normalized);
      const auto N = load_model(geo_n, normalized);
      const double d = normalized ? cig::geodesic_distance_normalized(M, N, geo_lambda)
                                  : cig::geodesic_distance_cone(M, N, geo_c);
      output.write(cig::io::format_double(d) + "\n");
      return 0;
    }

    if (*fit) {
      const auto features = cig::io::features_from_json(cig::io::read_json_file(fit_features));
      const auto data = cig::io::read_dataset_csv_file(fit_data, features.k(), features.m());
      Json j;
      cig::FittedModel fitted;
      if (fit_kind == "logistic") {
        fitted = cig::fit_logistic(data, features, logistic_opts);
      } else {
        const auto result = cig::fit_adaboost(data, features, boost_opts);
        fitted = result.model;
        Json chosen = Json::array();
        for (Index c : result.chosen) chosen.push_back(c + 1);
        j["loss"] = result.loss;
        j["alphas"] = result.alphas;
        j["chosen"] = chosen;
        j["degenerate"] = result.degenerate;
      }
      const auto ll = cig::loglik_and_grad(fitted.theta, features, data);
      const auto diag = cig::fit_diagnostics(data, features, fitted);
      j["kind"] = cig::to_string(fitted.kind);
      j["theta"] = vector_json(fitted.theta);
      j["iterations"] = fitted.iterations;
      j["capped"] = fitted.capped;
      j["loglik"] = number(ll.value);
      j["moments"] = {{"empirical", vector_json(cig::empirical_moments(features, data))},
                      {"model", vector_json(cig::model_moments(fitted.theta, features, data))}};
      j["diagnostics"] = {{"divergence", number(diag.divergence)},
                          {"quadratic", number(diag.quadratic)},
                          {"geodesic_half_sq", number(diag.geodesic_half_sq)},
                          {"ratio_quadratic", number(diag.ratio_quadratic)},
                          {"ratio_geodesic", number(diag.ratio_geodesic)},
                          {"taylor_regime_violated", diag.taylor_regime_violated}};
      output.write(dump(j));
      return 0;
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: missing " << e.what() << "\n";
    return kExitUsage;
  } catch (const cig::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
