#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gofscreen/bspline.hpp"
#include "gofscreen/loss.hpp"

namespace gofscreen {

struct SolverOptions {
  double tol_grad = 1e-8;
  int max_iter = 100;
  double smoothing_eps = 1e-6;
  double ridge_floor = 1e-10;
  /// Linear predictors beyond +-omega_cap stop logistic, poisson and
  /// exponential-classification fits (separation / overflow guard).
  double omega_cap = 30.0;
  /// Keep the objective after every accepted iterate in FitResult::history.
  bool record_history = false;

  /// Throws InvalidConfiguration unless every field is strictly positive.
  void validate() const;
};

struct FitResult {
  /// Spline coefficients.  For marginal fits on a full basis the intercept is
  /// folded in and `intercept` is 0; joint fits report it separately.
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  /// Mean empirical loss at the returned coefficients.
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  /// Set when |linear predictor| exceeds omega_cap at the returned fit.
  bool clamped = false;
  /// Objective at the start and after each iterate (record_history only).
  /// For the check loss these are the smoothed-objective values the MM
  /// steps decrease.
  std::vector<double> history;
};

/// Minimizes (1/n) sum_i l(design_i' beta, y_i) over beta.
///
/// Smooth losses use damped Newton with Armijo backtracking on the exact
/// objective.  The check loss uses the Hunter-Lange MM iteration on the
/// eps-smoothed objective followed by an exact-interpolation polish.
/// `null_intercept` skips recomputing the intercept-only start.
FitResult fit_marginal(const DesignMatrix& design, std::span<const double> y,
                       const LossSpec& spec, const SolverOptions& opts = {},
                       std::optional<double> null_intercept = std::nullopt);

/// Intercept-only fit.
FitResult fit_null(std::span<const double> y, const LossSpec& spec);

/// Additive fit with a free intercept and one intercept-free spline block per
/// design.  With no blocks this reduces to fit_null.
FitResult fit_joint(std::span<const DesignMatrix> blocks, std::span<const double> y,
                    const LossSpec& spec, const SolverOptions& opts = {},
                    std::optional<double> null_intercept = std::nullopt);

/// The shared solver over an arbitrary dense design, started at `start`.
/// Responses must already be valid for `spec`.
FitResult fit_design(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const double> y,
                     const LossSpec& spec, const SolverOptions& opts,
                     Eigen::VectorXd start);

/// Mean loss of the linear predictor `eta`.
double mean_loss(const LossSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& eta,
                 std::span<const double> y);

}  // namespace gofscreen
