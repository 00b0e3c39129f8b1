#include "gofscreen/iterative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "gofscreen/bspline.hpp"
#include "gofscreen/error.hpp"
#include "gofscreen/group_lasso.hpp"
#include "gofscreen/rng.hpp"

namespace gofscreen {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Outcome {
  double stat = kNegInf;
  bool converged = false;
  bool degenerate = false;
};

// Design [1 | B_1 | ... | B_k] of intercept-free blocks for `covariates`.
// Degenerate covariates contribute no columns.
MatrixXd base_design(const Dataset& data, std::span<const std::size_t> covariates,
                     int num_basis) {
  std::vector<MatrixXd> blocks;
  Index cols = 1;
  for (std::size_t j : covariates) {
    try {
      const SplineBasis basis = make_basis(data.column(j), num_basis);
      blocks.push_back(design_matrix(basis, data.column(j), j, true).values);
      cols += blocks.back().cols();
    } catch (const DegenerateCovariate&) {
    }
  }
  MatrixXd x(static_cast<Index>(data.n()), cols);
  x.col(0).setOnes();
  Index at = 1;
  for (const auto& b : blocks) {
    x.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return x;
}

std::uint64_t round_seed(std::uint64_t seed, int round) {
  return mix_seed(seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(round + 1)));
}

std::vector<std::size_t> sorted_union(std::vector<std::size_t> a,
                                      std::span<const std::size_t> b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

}  // namespace

void IterativeOptions::validate() const {
  if (n_perm < 1) throw InvalidConfiguration("need at least one permutation per round");
  if (!(perm_quantile > 0.0 && perm_quantile <= 1.0)) {
    throw InvalidConfiguration("permutation quantile must lie in (0,1]");
  }
  if (max_rounds < 1) throw InvalidConfiguration("need at least one round");
  for (double v : penalty_grid) {
    if (!(v > 0)) throw InvalidConfiguration("penalty grid values must be positive");
  }
  if (!std::is_sorted(penalty_grid.begin(), penalty_grid.end(), std::greater<>())) {
    throw InvalidConfiguration("penalty grid must be sorted in decreasing order");
  }
  solver.validate();
}

std::string_view stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::max_size: return "max_size";
    case StopReason::no_change: return "no_change";
    case StopReason::max_rounds: return "max_rounds";
  }
  return "unknown";
}

std::size_t default_max_model_size(std::size_t n, int num_basis) {
  const double nd = static_cast<double>(n);
  return static_cast<std::size_t>(
      std::max(1.0, std::ceil(nd / (static_cast<double>(num_basis) * std::log(nd)))));
}

ScreeningResult conditional_screen(const Dataset& data,
                                   std::span<const std::size_t> selected,
                                   const LossSpec& spec, int num_basis,
                                   const SolverOptions& opts,
                                   const ParallelOptions& parallel) {
  opts.validate();
  const std::size_t p = data.p();
  std::vector<std::uint8_t> in_model(p, 0);
  for (std::size_t j : selected) {
    if (j >= p) throw InvalidConfiguration("selected index out of range");
    in_model[j] = 1;
  }

  const auto y = data.response();
  const double c = null_minimizer(spec, y);
  check_responses(spec, y);
  const MatrixXd base = base_design(data, selected, num_basis);
  VectorXd start = VectorXd::Zero(base.cols());
  start[0] = c;
  const FitResult base_fit = fit_design(base, y, spec, opts, start);

  std::vector<Outcome> outcomes(p);
  const int threads = omp_in_parallel()       ? 1
                      : parallel.threads > 0 ? parallel.threads
                                             : omp_get_max_threads();
  const auto np = static_cast<std::ptrdiff_t>(p);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (std::ptrdiff_t jj = 0; jj < np; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    if (in_model[j]) continue;
    Outcome& out = outcomes[j];
    try {
      const SplineBasis basis = make_basis(data.column(j), num_basis);
      const MatrixXd block = design_matrix(basis, data.column(j), j, true).values;
      MatrixXd x(base.rows(), base.cols() + block.cols());
      x.leftCols(base.cols()) = base;
      x.rightCols(block.cols()) = block;
      VectorXd warm = VectorXd::Zero(x.cols());
      warm.head(base.cols()) = base_fit.coefficients;
      const FitResult fit = fit_design(x, y, spec, opts, std::move(warm));
      if (std::isfinite(fit.objective)) {
        out.stat = base_fit.objective - fit.objective;
        out.converged = fit.converged;
      } else {
        out.degenerate = true;
      }
    } catch (const DegenerateCovariate&) {
      out.degenerate = true;
    } catch (const NumericalError&) {
      out.degenerate = true;
    }
  }

  ScreeningResult result;
  result.stats.resize(p);
  result.converged.resize(p);
  result.degenerate.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    result.stats[j] = outcomes[j].stat;
    result.converged[j] = outcomes[j].converged;
    result.degenerate[j] = outcomes[j].degenerate;
  }
  result.ranking = rank_statistics(result.stats);
  return result;
}

double conditional_permutation_threshold(const Dataset& data,
                                         std::span<const std::size_t> selected,
                                         const LossSpec& spec, int num_basis, int n_perm,
                                         double q, std::uint64_t seed,
                                         const SolverOptions& opts,
                                         const ParallelOptions& parallel) {
  if (n_perm < 1) throw InvalidConfiguration("need at least one permutation");
  std::vector<std::uint8_t> in_model(data.p(), 0);
  for (std::size_t j : selected) in_model.at(j) = 1;

  std::vector<double> pooled;
  for (int r = 0; r < n_perm; ++r) {
    const auto perm = random_permutation(data.n(), seed, static_cast<std::uint64_t>(r));
    Dataset permuted = data;
    for (std::size_t j = 0; j < data.p(); ++j) {
      if (in_model[j]) continue;
      for (std::size_t i = 0; i < perm.size(); ++i) {
        permuted.x(static_cast<Index>(i), static_cast<Index>(j)) =
            data.x(static_cast<Index>(perm[i]), static_cast<Index>(j));
      }
    }
    const ScreeningResult screened =
        conditional_screen(permuted, selected, spec, num_basis, opts, parallel);
    for (std::size_t j = 0; j < data.p(); ++j) {
      if (!in_model[j]) pooled.push_back(screened.stats[j]);
    }
  }
  return pooled_quantile(std::move(pooled), q);
}

IterativeResult run_iterative(const Dataset& data, const LossSpec& spec, int num_basis,
                              const IterativeOptions& options) {
  options.validate();
  const std::size_t cap = options.max_model_size > 0
                              ? options.max_model_size
                              : default_max_model_size(data.n(), num_basis);

  IterativeResult result;
  std::vector<std::size_t> model;
  result.trace.stop = StopReason::max_rounds;
  for (int round = 0; round < options.max_rounds; ++round) {
    const std::uint64_t seed = round_seed(options.seed, round);
    ScreeningResult screened;
    double threshold;
    if (round == 0) {
      screened = screen_all(data, spec, num_basis, options.solver, options.parallel);
      threshold = permutation_threshold(data, spec, num_basis, options.n_perm,
                                        options.perm_quantile, seed, options.solver,
                                        options.parallel);
    } else {
      screened = conditional_screen(data, model, spec, num_basis, options.solver,
                                    options.parallel);
      threshold = conditional_permutation_threshold(data, model, spec, num_basis,
                                                    options.n_perm, options.perm_quantile,
                                                    seed, options.solver, options.parallel);
    }

    RoundRecord record;
    record.threshold = threshold;
    for (std::size_t j : screened.ranking) {
      if (options.greedy_cap > 0 && record.screened.size() >= options.greedy_cap) break;
      const double stat = screened.stats[j];
      if (stat == kNegInf || stat < threshold) break;
      if (std::binary_search(model.begin(), model.end(), j)) continue;
      record.screened.push_back(j);
    }
    std::sort(record.screened.begin(), record.screened.end());

    const auto candidates = sorted_union(model, record.screened);
    record.selected = penalized_refit(data, candidates, spec, num_basis,
                                      options.penalty_grid, options.solver);
    result.trace.rounds.push_back(record);

    const bool unchanged = record.selected == model;
    model = record.selected;
    if (model.size() >= cap) {
      result.trace.stop = StopReason::max_size;
      break;
    }
    if (unchanged) {
      result.trace.stop = StopReason::no_change;
      break;
    }
  }
  result.selected = model;
  return result;
}

}  // namespace gofscreen
