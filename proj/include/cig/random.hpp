#pragma once

// Seeded generators for models, tangents, metrics and morphisms. All draws
// go through a 64-bit Mersenne Twister with hand-rolled uniform, integer and
// exponential transforms so a seed reproduces the same sample on every
// platform.

#include "cig/core.hpp"
#include "cig/metric.hpp"
#include "cig/morphism.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace cig {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [lo, hi].
  Index integer(Index lo, Index hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<Index>(engine_() % span);
  }
  double exponential() { return -std::log1p(-uniform()); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct SizeBounds {
  Index kmax = 4;
  Index mmax = 4;
  Index lmax = 12;
  Index nmax = 12;
};

// Random partition of {0..n-1} into `blocks` nonempty blocks: a shuffled
// prefix seeds one element per block, the rest are placed uniformly.
Partition random_partition(Rng& rng, Index n, Index blocks);

// Rows drawn from a symmetric Dirichlet(1) on their blocks.
AStochasticMatrix<double> random_a_stochastic(Rng& rng, Index rows, Index cols);

MarkovMorphism<double> random_morphism(Rng& rng, Index k, Index m, Index l, Index n);
// Source k in [1, kmax], m in [2, mmax]; target l in [k, lmax], n in [m, nmax].
MarkovMorphism<double> random_morphism(Rng& rng, const SizeBounds& bounds);

// Entries exp(U(-1, 1)); normalized rows when requested.
PositiveModel random_model(Rng& rng, Index k, Index m, bool normalized = false);

TangentVector random_tangent(Rng& rng, Index k, Index m, bool normalized_context = false);

ScalarField random_scalar_field(Rng& rng, bool positive);
// Random A and B, C with a positive coefficient.
MetricParams random_metric(Rng& rng);

RationalModel random_rational_model(Rng& rng, Index k, Index m, std::int64_t entry_max,
                                    std::int64_t denominator);

}  // namespace cig
