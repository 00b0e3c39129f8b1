#include "gofscreen/screening.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <omp.h>

#include "gofscreen/bspline.hpp"
#include "gofscreen/error.hpp"
#include "gofscreen/rng.hpp"

namespace gofscreen {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct CovariateOutcome {
  double stat = kNegInf;
  bool converged = false;
  bool degenerate = false;
};

CovariateOutcome covariate_kernel(const Dataset& data, std::size_t j, const LossSpec& spec,
                                  int num_basis, const SolverOptions& opts,
                                  const FitResult& null_fit) {
  CovariateOutcome out;
  try {
    const SplineBasis basis = make_basis(data.column(j), num_basis);
    const DesignMatrix design = design_matrix(basis, data.column(j), j);
    const FitResult fit =
        fit_marginal(design, data.response(), spec, opts, null_fit.intercept);
    if (!std::isfinite(fit.objective)) {
      out.degenerate = true;
      return out;
    }
    out.stat = gof_statistic(null_fit, fit);
    out.converged = fit.converged;
  } catch (const DegenerateCovariate&) {
    out.degenerate = true;
  } catch (const NumericalError&) {
    out.degenerate = true;
  }
  return out;
}

void check_inputs(const Dataset& data, int num_basis) {
  if (data.p() == 0) throw InvalidConfiguration("screening needs at least one covariate");
  if (data.y.size() != data.x.rows()) {
    throw DataError("response length does not match the number of covariate rows");
  }
  if (num_basis < kDefaultDegree + 1) {
    throw InvalidConfiguration("number of basis functions must be at least degree + 1");
  }
  if (data.n() < static_cast<std::size_t>(num_basis) + 1) {
    throw InvalidConfiguration("need at least num_basis + 1 observations");
  }
}

ScreeningResult assemble(std::vector<CovariateOutcome> outcomes) {
  ScreeningResult result;
  const std::size_t p = outcomes.size();
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

}  // namespace

double gof_statistic(const FitResult& null_fit, const FitResult& marginal_fit) {
  return null_fit.objective - marginal_fit.objective;
}

std::vector<std::size_t> rank_statistics(std::span<const double> stats) {
  std::vector<std::size_t> order(stats.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return stats[a] > stats[b]; });
  return order;
}

ScreeningResult screen_all(const Dataset& data, const LossSpec& spec, int num_basis,
                           const SolverOptions& opts, const ParallelOptions& parallel) {
  check_inputs(data, num_basis);
  opts.validate();
  const FitResult null_fit = fit_null(data.response(), spec);

  const auto p = static_cast<std::ptrdiff_t>(data.p());
  std::vector<CovariateOutcome> outcomes(data.p());
  // Nested calls (e.g. from parallel replications) run on the caller's thread.
  const int threads = omp_in_parallel()       ? 1
                      : parallel.threads > 0 ? parallel.threads
                                             : omp_get_max_threads();

  // Each covariate is an independent pure computation written to its own
  // slot, so the result is schedule-independent.
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (std::ptrdiff_t j = 0; j < p; ++j) {
    outcomes[j] = covariate_kernel(data, static_cast<std::size_t>(j), spec, num_basis,
                                   opts, null_fit);
  }
  return assemble(std::move(outcomes));
}

ScreeningResult screen_all_serial(const Dataset& data, const LossSpec& spec,
                                  int num_basis, const SolverOptions& opts) {
  check_inputs(data, num_basis);
  const FitResult null_fit = fit_null(data.response(), spec);
  std::vector<CovariateOutcome> outcomes(data.p());
  for (std::size_t j = 0; j < data.p(); ++j) {
    CovariateOutcome& out = outcomes[j];
    try {
      const SplineBasis basis = make_basis(data.column(j), num_basis);
      const DesignMatrix design = design_matrix(basis, data.column(j), j);
      const FitResult fit = fit_marginal(design, data.response(), spec, opts);
      if (std::isfinite(fit.objective)) {
        out.stat = gof_statistic(null_fit, fit);
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
  return assemble(std::move(outcomes));
}

std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed,
                                            std::uint64_t stream) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Philox rng(seed, stream);
  shuffle(std::span<std::size_t>(perm), rng);
  return perm;
}

Dataset permute_rows(const Dataset& data, std::span<const std::size_t> perm) {
  Dataset out;
  out.y = data.y;
  out.column_names = data.column_names;
  out.response_kind = data.response_kind;
  out.x.resize(data.x.rows(), data.x.cols());
  for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
    for (std::size_t i = 0; i < perm.size(); ++i) {
      out.x(static_cast<Eigen::Index>(i), j) = data.x(static_cast<Eigen::Index>(perm[i]), j);
    }
  }
  return out;
}

std::vector<double> permuted_statistics(const Dataset& data, const LossSpec& spec,
                                        int num_basis, int n_perm, std::uint64_t seed,
                                        const SolverOptions& opts,
                                        const ParallelOptions& parallel) {
  if (n_perm < 1) throw InvalidConfiguration("need at least one permutation");
  std::vector<double> pooled;
  pooled.reserve(static_cast<std::size_t>(n_perm) * data.p());
  for (int r = 0; r < n_perm; ++r) {
    const auto perm = random_permutation(data.n(), seed, static_cast<std::uint64_t>(r));
    const ScreeningResult permuted =
        screen_all(permute_rows(data, perm), spec, num_basis, opts, parallel);
    pooled.insert(pooled.end(), permuted.stats.begin(), permuted.stats.end());
  }
  return pooled;
}

double pooled_quantile(std::vector<double> values, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidConfiguration("quantile level must lie in (0,1]");
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return kNegInf;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

double permutation_threshold(const Dataset& data, const LossSpec& spec, int num_basis,
                             int n_perm, double q, std::uint64_t seed,
                             const SolverOptions& opts, const ParallelOptions& parallel) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidConfiguration("quantile level must lie in (0,1]");
  return pooled_quantile(
      permuted_statistics(data, spec, num_basis, n_perm, seed, opts, parallel), q);
}

std::vector<std::size_t> select(const ScreeningResult& result, double threshold) {
  std::vector<std::size_t> chosen;
  for (std::size_t j = 0; j < result.stats.size(); ++j) {
    if (!result.degenerate.empty() && result.degenerate[j]) continue;
    if (result.stats[j] >= threshold && result.stats[j] != kNegInf) chosen.push_back(j);
  }
  return chosen;
}

std::vector<std::size_t> select_top_k(const ScreeningResult& result, std::size_t k) {
  std::vector<std::size_t> chosen;
  for (std::size_t j : result.ranking) {
    if (chosen.size() >= k) break;
    if (result.stats[j] == kNegInf) break;
    chosen.push_back(j);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

void apply_threshold(ScreeningResult& result, double threshold) {
  result.threshold = threshold;
  result.selected = select(result, threshold);
}

}  // namespace gofscreen
