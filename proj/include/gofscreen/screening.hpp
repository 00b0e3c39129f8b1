#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gofscreen/dataset.hpp"
#include "gofscreen/loss.hpp"
#include "gofscreen/marginal_fit.hpp"

namespace gofscreen {

struct ParallelOptions {
  /// Worker threads for per-covariate kernels; 0 uses the OpenMP default.
  int threads = 0;
};

/// Per-covariate goodness-of-fit statistics and the model they select.
///
/// Covariate indices are 0-based throughout the library.  Degenerate
/// covariates (too few distinct values, failed fits) carry a statistic of
/// -infinity, rank last and are never selected.
struct ScreeningResult {
  std::vector<double> stats;
  /// Covariates by decreasing statistic; ties broken by ascending index.
  std::vector<std::size_t> ranking;
  std::optional<double> threshold;
  /// Sorted indices with stats[j] >= threshold.
  std::vector<std::size_t> selected;
  std::vector<std::uint8_t> converged;
  std::vector<std::uint8_t> degenerate;

  std::size_t p() const { return stats.size(); }
};

/// Null-model mean loss minus marginal-model mean loss.
double gof_statistic(const FitResult& null_fit, const FitResult& marginal_fit);

/// Argsort by decreasing value with ascending-index tie-break.
std::vector<std::size_t> rank_statistics(std::span<const double> stats);

/// Fits the null model and every marginal spline model in parallel.  The
/// result does not depend on the number of threads.
ScreeningResult screen_all(const Dataset& data, const LossSpec& spec, int num_basis,
                           const SolverOptions& opts = {},
                           const ParallelOptions& parallel = {});

/// Single-threaded reference with no shared precomputation; kept so tests
/// and benchmarks can check the parallel kernel against it.
ScreeningResult screen_all_serial(const Dataset& data, const LossSpec& spec,
                                  int num_basis, const SolverOptions& opts = {});

/// Applies one shared random row permutation to the covariates (keeping the
/// response in place) for each of `n_perm` rounds and pools the p statistics
/// of every round.  Round r draws its permutation from Philox stream r keyed
/// by `seed`.
std::vector<double> permuted_statistics(const Dataset& data, const LossSpec& spec,
                                        int num_basis, int n_perm, std::uint64_t seed,
                                        const SolverOptions& opts = {},
                                        const ParallelOptions& parallel = {});

/// q-quantile (inverse empirical CDF, ceil(q N)-th order statistic) of the
/// pooled permuted statistics; q = 1 is the pooled maximum.
double permutation_threshold(const Dataset& data, const LossSpec& spec, int num_basis,
                             int n_perm, double q, std::uint64_t seed,
                             const SolverOptions& opts = {},
                             const ParallelOptions& parallel = {});

/// Inverse-empirical-CDF quantile of finite values; -inf when none are finite.
double pooled_quantile(std::vector<double> values, double q);

/// {j : stats[j] >= threshold}, sorted.
std::vector<std::size_t> select(const ScreeningResult& result, double threshold);

/// The k best-ranked non-degenerate covariates, sorted by index.
std::vector<std::size_t> select_top_k(const ScreeningResult& result, std::size_t k);

/// Records `threshold` and the matching selection in `result`.
void apply_threshold(ScreeningResult& result, double threshold);

/// Copy of `data` with covariate rows reordered: row i of the copy is row
/// perm[i] of `data`.  The response is not moved.
Dataset permute_rows(const Dataset& data, std::span<const std::size_t> perm);

/// Random permutation of 0..n-1 drawn from Philox(seed, stream).
std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed,
                                            std::uint64_t stream);

}  // namespace gofscreen
