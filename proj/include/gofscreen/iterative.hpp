#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gofscreen/dataset.hpp"
#include "gofscreen/loss.hpp"
#include "gofscreen/marginal_fit.hpp"
#include "gofscreen/screening.hpp"

namespace gofscreen {

struct IterativeOptions {
  /// Stop once the model reaches this size; 0 means ceil(n / (d_n ln n)).
  std::size_t max_model_size = 0;
  /// Most covariates admitted per round; 0 means unlimited, 1 is the greedy variant.
  std::size_t greedy_cap = 0;
  int n_perm = 1;
  /// Permutation quantile level; 1 takes the pooled maximum.
  double perm_quantile = 1.0;
  /// Positive, decreasing penalties for the refit; empty uses the default grid.
  std::vector<double> penalty_grid;
  std::uint64_t seed = 0;
  int max_rounds = 10;
  SolverOptions solver;
  ParallelOptions parallel;

  void validate() const;
};

enum class StopReason { max_size, no_change, max_rounds };

std::string_view stop_reason_name(StopReason reason);

struct RoundRecord {
  /// Covariates admitted by the (conditional) screen, before the refit.
  std::vector<std::size_t> screened;
  /// Model after the penalized refit.
  std::vector<std::size_t> selected;
  double threshold = 0.0;
};

struct IterationTrace {
  std::vector<RoundRecord> rounds;
  StopReason stop = StopReason::max_rounds;
};

struct IterativeResult {
  std::vector<std::size_t> selected;
  IterationTrace trace;
};

/// Statistics of each covariate outside `selected`, conditional on an
/// additive fit of the selected ones: objective(selected) minus
/// objective(selected + j).  Entries for selected covariates are -inf.
ScreeningResult conditional_screen(const Dataset& data,
                                   std::span<const std::size_t> selected,
                                   const LossSpec& spec, int num_basis,
                                   const SolverOptions& opts = {},
                                   const ParallelOptions& parallel = {});

/// Permutation threshold for conditional_screen: the rows of every
/// unselected covariate are permuted jointly while the selected covariates
/// stay paired with the response.
double conditional_permutation_threshold(const Dataset& data,
                                         std::span<const std::size_t> selected,
                                         const LossSpec& spec, int num_basis, int n_perm,
                                         double q, std::uint64_t seed,
                                         const SolverOptions& opts = {},
                                         const ParallelOptions& parallel = {});

/// ceil(n / (d_n ln n))
std::size_t default_max_model_size(std::size_t n, int num_basis);

/// Alternates permutation-thresholded (conditional) screening with a
/// group-penalized additive refit until the model reaches the size cap,
/// stops changing, or max_rounds is hit.
IterativeResult run_iterative(const Dataset& data, const LossSpec& spec, int num_basis,
                              const IterativeOptions& options);

}  // namespace gofscreen
