#pragma once

// Randomized certification suites for the invariants of the library:
// isometry of congruent embeddings, norm preservation, exact uniformization
// of rational models, the reduction to the product Fisher metric on
// normalized models, the second-order expansion of the I-divergence, and
// invariance of the cone geodesic distance.

#include "cig/core.hpp"
#include "cig/metric.hpp"
#include "cig/morphism.hpp"
#include "cig/random.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cig {

// Command-line names: isometry, norm, prop3 (uniformizer), corollary1 (reduction),
// taylor, geodesic, transport.
enum class Suite { isometry, norm, uniformizer, reduction, taylor, geodesic, transport };

std::optional<Suite> parse_suite(std::string_view name);
const char* to_string(Suite suite);
// Tolerance used when none is given.
double default_tolerance(Suite suite);

struct SuiteOptions {
  Suite suite = Suite::isometry;
  int trials = 100;
  std::uint64_t seed = 42;
  std::optional<double> tol;
  // Fixed metric; when absent each suite draws its own.
  std::optional<MetricParams> metric;
  SizeBounds bounds;
  // uniformizer: models satisfy |M~| <= norm_max; outputs above size_cap cells fail.
  std::int64_t norm_max = 12;
  std::int64_t size_cap = kDefaultSizeCap;
  // isometry: random metrics checked per trial when `metric` is absent.
  int metrics_per_trial = 5;
};

struct SuiteFailure {
  int trial = 0;
  std::string description;
  double error = 0.0;
};

struct SuiteReport {
  std::string suite;
  int trials = 0;
  std::uint64_t seed = 0;
  double max_error = 0.0;
  std::vector<SuiteFailure> failures;
  bool pass = true;
};

SuiteReport run_check_suite(const SuiteOptions& opts);

nlohmann::json to_json(const SuiteReport& report);

struct UniformizerCheck {
  Index rows = 0;           // |M~|
  Index cols = 0;           // prod_s |M~_s|
  Rational expected;        // 1 / (z prod_s |M~_s|)
  std::int64_t mismatches = 0;
  bool exact() const noexcept { return mismatches == 0; }
};

/// Builds the uniformizer of `model`, applies it in rational arithmetic to
/// M~ / z and compares every entry with the expected constant.
UniformizerCheck check_uniformizer(const RationalModel& model, std::int64_t size_cap = kDefaultSizeCap);

/// Every integer matrix M~ (k >= 1, m >= 2) with |M~| <= norm_max, each
/// under every denominator in `denominators`.
SuiteReport certify_uniformizer_exhaustive(std::int64_t norm_max,
                                           const std::vector<std::int64_t>& denominators,
                                           std::int64_t size_cap = kDefaultSizeCap);

/// Copy of f with row `row` of Q(q_index) multiplied by `factor`; no longer
/// a congruent embedding unless factor == 1.
MarkovMorphism<double> corrupt_q_row(const MarkovMorphism<double>& f, Index q_index, Index row,
                                     double factor);

}  // namespace cig
