#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gofscreen/dataset.hpp"
#include "gofscreen/loss.hpp"
#include "gofscreen/marginal_fit.hpp"

namespace gofscreen {

/// Centered, orthonormalized spline blocks for a set of covariates.
///
/// Each block spans the intercept-free spline space of one covariate with
/// column means removed; columns satisfy Q'Q / n = I, so the Euclidean norm
/// of a block's coefficients equals the empirical L2 norm of the component
/// function it represents.
struct AdditiveBlocks {
  std::vector<std::size_t> covariates;
  std::vector<Eigen::MatrixXd> bases;
  std::size_t n = 0;
};

/// Degenerate covariates are silently left out of the result.
AdditiveBlocks build_additive_blocks(const Dataset& data,
                                     std::span<const std::size_t> candidates, int num_basis);

/// Solution of
///   min  mean_i l(b0 + sum_g Q_g theta_g, y_i) + lambda sum_g sqrt(d_g) ||theta_g||
/// (for the check loss the eps-smoothed loss replaces l).
struct GroupLassoFit {
  double lambda = 0.0;
  double intercept = 0.0;
  std::vector<Eigen::VectorXd> theta;
  /// Mean of the unsmoothed loss at the solution.
  double mean_loss = 0.0;
  /// 2 n mean_loss + ln(n) * (1 + active parameter count), at this
  /// (shrunken) fit.
  double criterion = 0.0;
  std::size_t parameters = 1;
  /// Covariate indices whose block is nonzero, sorted.
  std::vector<std::size_t> active;
  int iterations = 0;
  bool converged = false;
};

/// Smallest penalty at which every block is zero.
double group_lambda_max(const AdditiveBlocks& blocks, std::span<const double> y,
                        const LossSpec& spec);

/// `points` log-spaced values from lambda_max down to lambda_max * ratio.
std::vector<double> default_penalty_grid(double lambda_max, std::size_t points = 20,
                                         double ratio = 1e-3);

/// Proximal Newton with blockwise coordinate descent on the quadratic model
/// (majorize-minimize steps for the check loss).  `warm` seeds the iterate.
GroupLassoFit fit_group_lasso(const AdditiveBlocks& blocks, std::span<const double> y,
                              const LossSpec& spec, double lambda,
                              const SolverOptions& opts = {},
                              const GroupLassoFit* warm = nullptr);

/// Warm-started fits along `grid` (which must be nonincreasing).
std::vector<GroupLassoFit> group_lasso_path(const AdditiveBlocks& blocks,
                                            std::span<const double> y, const LossSpec& spec,
                                            std::span<const double> grid,
                                            const SolverOptions& opts = {});

/// Group-penalized additive refit over `candidates`.  The path supplies the
/// candidate active sets; each is refit without penalty and scored by
/// 2 n mean_loss + ln(n) * (1 + parameters), and the best-scoring set is
/// returned (ties go to the larger penalty).  An empty grid means
/// default_penalty_grid(group_lambda_max(...)).
std::vector<std::size_t> penalized_refit(const Dataset& data,
                                         std::span<const std::size_t> candidates,
                                         const LossSpec& spec, int num_basis,
                                         std::span<const double> penalty_grid = {},
                                         const SolverOptions& opts = {});

}  // namespace gofscreen
