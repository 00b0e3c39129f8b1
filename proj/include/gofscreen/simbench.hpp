#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gofscreen/dataset.hpp"
#include "gofscreen/loss.hpp"
#include "gofscreen/marginal_fit.hpp"
#include "gofscreen/screening.hpp"

namespace gofscreen {

/// One of the eight simulation designs.
struct SimModel {
  int model_id = 1;
  std::size_t n = 400;
  std::size_t p = 1000;
  std::uint64_t seed = 0;
};

struct SimData {
  Dataset data;
  /// Active set used for minimum-model-size scoring (0-based).
  std::vector<std::size_t> truth;
  /// Models 7 and 8 only: the covariates that drive the error scale.
  std::vector<std::size_t> scale_truth;
};

/// The nine component functions f_1..f_9; throws InvalidConfiguration for
/// k outside 1..9.
double eval_f(int k, double x);

/// Draws covariates and response from Philox(model.seed, 0).
SimData gen_dataset(const SimModel& model);

/// The loss a model is normally screened with: gaussian (1-2), logistic
/// (3-4), poisson (5-6), quantile at 0.75 (7-8).
LossSpec default_loss(int model_id);

/// Smallest k such that the k top-ranked covariates cover `truth`.
std::size_t minimum_model_size(const ScreeningResult& result,
                               std::span<const std::size_t> truth);

/// Order-statistic summary with type-7 (linear interpolation) quantiles.
struct QuantileSummary {
  double median = 0.0;
  double iqr = 0.0;
  double q05 = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
};

/// Type-7 quantile of `values` (need not be sorted); level in [0,1].
double type7_quantile(std::vector<double> values, double level);

QuantileSummary summarize(std::span<const std::size_t> sizes);

struct ScreenMethod {
  LossSpec loss;
  int num_basis = 6;
  SolverOptions solver;
};

struct BenchmarkSummary {
  std::vector<std::size_t> sizes;
  /// Seed used for each replication, aligned with `sizes`.
  std::vector<std::uint64_t> seeds;
  QuantileSummary summary;
  /// Models 7-8: minimum model size for the scale-active set and for the
  /// union of both sets.
  std::vector<std::size_t> scale_sizes;
  std::vector<std::size_t> union_sizes;
  std::size_t failed = 0;
};

/// Seed of replication `rep`: mix_seed(master_seed) XOR rep.
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t rep);

/// Runs `reps` seeded screening replications in parallel; aggregation is
/// ordered by replication so the summary is independent of scheduling.
BenchmarkSummary run_benchmark(const SimModel& model, std::size_t reps,
                               const ScreenMethod& method, std::uint64_t master_seed,
                               const ParallelOptions& parallel = {});

}  // namespace gofscreen
