#include "gofscreen/marginal_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "gofscreen/error.hpp"

namespace gofscreen {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

bool capped_kind(LossKind kind) {
  return kind == LossKind::logistic || kind == LossKind::poisson ||
         kind == LossKind::exp_class;
}

// Mean loss without the omega-free ln(y!) term of the poisson loss.
double core_objective(const LossSpec& spec, const VectorXd& eta, std::span<const double> y) {
  const Index n = eta.size();
  double sum = 0.0;
  switch (spec.kind) {
    case LossKind::poisson:
      for (Index i = 0; i < n; ++i) sum += std::exp(eta[i]) - y[i] * eta[i];
      break;
    default:
      for (Index i = 0; i < n; ++i) sum += detail::value(spec, eta[i], y[i]);
      break;
  }
  return sum / static_cast<double>(n);
}

double constant_term(const LossSpec& spec, std::span<const double> y) {
  if (spec.kind != LossKind::poisson) return 0.0;
  double sum = 0.0;
  for (double v : y) sum += std::lgamma(v + 1.0);
  return sum / static_cast<double>(y.size());
}

FitResult newton(const Eigen::Ref<const MatrixXd>& x, std::span<const double> y,
                 const LossSpec& spec, const SolverOptions& opts, VectorXd beta) {
  const Index n = x.rows();
  const Index d = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double offset = constant_term(spec, y);
  constexpr double kArmijo = 1e-4;

  VectorXd eta = x * beta;
  double obj = core_objective(spec, eta, y);
  VectorXd deriv(n), curv(n), grad(d), step(d), trial(d), trial_eta(n);
  MatrixXd hess(d, d);

  FitResult fit;
  const auto gradient = [&](const VectorXd& at, VectorXd& out) {
    for (Index i = 0; i < n; ++i) deriv[i] = detail::deriv(spec, at[i], y[i]);
    out.noalias() = x.transpose() * deriv;
    out *= inv_n;
  };
  gradient(eta, grad);
  double gnorm = grad.norm();
  if (opts.record_history) fit.history.push_back(obj + offset);

  // Once the gradient test passes, one more Newton step is taken unless the
  // last one was already negligible: on poorly conditioned spline designs a
  // gradient of tol_grad can still leave coefficient error near tol_grad.
  bool polished = false;
  bool small_step = true;
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    if (gnorm <= opts.tol_grad) {
      if (polished || small_step) break;
      polished = true;
    }
    for (Index i = 0; i < n; ++i) curv[i] = detail::curvature(spec, eta[i], y[i]);
    hess.noalias() = x.transpose() * curv.asDiagonal() * x;
    hess *= inv_n;
    hess.diagonal().array() += opts.ridge_floor;
    const Eigen::LDLT<MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw SingularFit("Hessian is not positive definite after ridge stabilization");
    }
    step = -ldlt.solve(grad);
    if (!step.allFinite()) throw SingularFit("Newton step is not finite");

    double t = 1.0;
    const double slope = grad.dot(step);
    bool accepted = false;
    double trial_obj = obj;
    for (int k = 0; k < 50; ++k, t *= 0.5) {
      trial = beta + t * step;
      trial_eta.noalias() = x * trial;
      trial_obj = core_objective(spec, trial_eta, y);
      if (std::isfinite(trial_obj) && trial_obj <= obj + kArmijo * t * slope) {
        accepted = true;
        break;
      }
      // Near the optimum the decrease drowns in rounding; a full Newton step
      // that does not raise the objective beyond that noise is kept.
      if (k == 0 && std::isfinite(trial_obj) &&
          trial_obj - obj <= 64 * std::numeric_limits<double>::epsilon() *
                                 std::max(1.0, std::fabs(obj))) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    small_step = t * step.norm() <= 1e-10 * (1.0 + beta.norm());
    beta.swap(trial);
    eta.swap(trial_eta);
    obj = trial_obj;
    if (opts.record_history) fit.history.push_back(obj + offset);
    gradient(eta, grad);
    gnorm = grad.norm();
  }

  // Overflow is already excluded by the finite-objective test in the line
  // search; the cap only flags fits that ran far out (separation).
  fit.clamped = capped_kind(spec.kind) && eta.cwiseAbs().maxCoeff() > opts.omega_cap;
  fit.coefficients = std::move(beta);
  fit.objective = obj + offset;
  fit.iterations = iter;
  fit.gradient_norm = gnorm;
  fit.converged = gnorm <= opts.tol_grad;
  return fit;
}

double check_objective(double alpha, const VectorXd& resid) {
  double sum = 0.0;
  for (Index i = 0; i < resid.size(); ++i) {
    const double r = resid[i];
    sum += r * (alpha - (r < 0 ? 1.0 : 0.0));
  }
  return sum / static_cast<double>(resid.size());
}

// Hunter-Lange perturbed check loss, the objective the MM steps decrease.
double smoothed_check_objective(double alpha, double eps, const VectorXd& resid) {
  double sum = 0.0;
  for (Index i = 0; i < resid.size(); ++i) {
    const double r = resid[i];
    sum += r * (alpha - (r < 0 ? 1.0 : 0.0)) - 0.5 * eps * std::log(eps + std::fabs(r));
  }
  return sum / static_cast<double>(resid.size());
}

// Check-loss minima sit at vertices: coefficient vectors that interpolate d
// observations (the basis).  Starting from the basis of smallest residuals at
// `beta`, each pass releases one basis observation in either direction, finds
// the exact minimizer along that edge (where the directional slope turns
// nonnegative) and moves along the edge with the lowest objective.  When no
// edge descends the vertex is a global minimum.  Returns false if no
// well-conditioned starting basis exists.
bool edge_walk(const Eigen::Ref<const MatrixXd>& x, const Eigen::Map<const VectorXd>& yv,
               double alpha, VectorXd& beta, int max_pivots, bool& optimal) {
  const Index n = x.rows();
  const Index d = x.cols();
  optimal = false;
  VectorXd resid = yv - x * beta;
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::fabs(resid[a]) < std::fabs(resid[b]);
  });

  // Greedy basis: smallest residuals first, skipping rows that add no rank.
  std::vector<Index> basis;
  MatrixXd rows(d, d);
  for (Index i : order) {
    if (static_cast<Index>(basis.size()) == d) break;
    const auto k = static_cast<Index>(basis.size());
    rows.row(k) = x.row(i);
    Eigen::FullPivLU<MatrixXd> lu(rows.topRows(k + 1));
    lu.setThreshold(1e-10);
    if (lu.rank() == k + 1) basis.push_back(i);
  }
  if (static_cast<Index>(basis.size()) < d) return false;

  std::vector<std::uint8_t> in_basis(static_cast<std::size_t>(n), 0);
  for (Index i : basis) in_basis[static_cast<std::size_t>(i)] = 1;
  VectorXd basis_y(d);
  for (Index k = 0; k < d; ++k) basis_y[k] = yv[basis[static_cast<std::size_t>(k)]];
  Eigen::PartialPivLU<MatrixXd> lu(rows);
  beta = lu.solve(basis_y);
  if (!beta.allFinite()) return false;

  VectorXd a(n);
  std::vector<std::pair<double, double>> breaks;
  double obj = check_objective(alpha, yv - x * beta);
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    resid = yv - x * beta;
    const MatrixXd inv = lu.inverse();
    double best_obj = obj;
    Index best_k = -1, best_enter = -1;
    VectorXd best_beta;
    for (Index k = 0; k < d; ++k) {
      for (const double sign : {1.0, -1.0}) {
        // Along beta + t * delta the k-th basis residual becomes -sign * t
        // and the other basis residuals stay zero.
        const VectorXd delta = sign * inv.col(k);
        a.noalias() = x * delta;
        double slope = sign > 0 ? -(alpha - 1.0) * sign : -alpha * sign;
        breaks.clear();
        for (Index i = 0; i < n; ++i) {
          if (in_basis[static_cast<std::size_t>(i)] || a[i] == 0.0) continue;
          const double r = resid[i];
          const double psi = r > 0 || (r == 0 && a[i] < 0) ? alpha : alpha - 1.0;
          slope -= a[i] * psi;
          const double t = r / a[i];
          if (t > 0) breaks.emplace_back(t, std::fabs(a[i]));
        }
        if (slope >= -1e-14) continue;
        std::sort(breaks.begin(), breaks.end());
        double step = -1;
        Index enter = -1;
        for (const auto& [t, w] : breaks) {
          slope += w;
          if (slope >= 0) {
            step = t;
            break;
          }
        }
        if (step <= 0) continue;
        // Identify the observation whose residual reaches zero at `step`.
        double closest = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < n; ++i) {
          if (in_basis[static_cast<std::size_t>(i)] || a[i] == 0.0) continue;
          const double gap = std::fabs(resid[i] / a[i] - step);
          if (gap < closest) {
            closest = gap;
            enter = i;
          }
        }
        VectorXd trial = beta + step * delta;
        const double trial_obj = check_objective(alpha, yv - x * trial);
        if (trial_obj < best_obj - 1e-15 * std::max(1.0, std::fabs(best_obj))) {
          best_obj = trial_obj;
          best_k = k;
          best_enter = enter;
          best_beta = std::move(trial);
        }
      }
    }
    if (best_k < 0) {
      optimal = true;
      return true;
    }
    in_basis[static_cast<std::size_t>(basis[static_cast<std::size_t>(best_k)])] = 0;
    in_basis[static_cast<std::size_t>(best_enter)] = 1;
    basis[static_cast<std::size_t>(best_k)] = best_enter;
    rows.row(best_k) = x.row(best_enter);
    lu.compute(rows);
    for (Index k = 0; k < d; ++k) basis_y[k] = yv[basis[static_cast<std::size_t>(k)]];
    // Re-solve on the new basis rather than accumulating the edge step.
    VectorXd solved = lu.solve(basis_y);
    if (!solved.allFinite()) {
      beta = std::move(best_beta);
      return true;
    }
    beta = std::move(solved);
    obj = check_objective(alpha, yv - x * beta);
  }
  return true;
}

FitResult quantile_mm(const Eigen::Ref<const MatrixXd>& x, std::span<const double> y,
                      const LossSpec& spec, const SolverOptions& opts, VectorXd beta) {
  const Index n = x.rows();
  const Index d = x.cols();
  const double alpha = spec.alpha;
  const double eps = opts.smoothing_eps;
  const Eigen::Map<const VectorXd> yv(y.data(), n);

  VectorXd resid = yv - x * beta;
  double obj = check_objective(alpha, resid);
  double smooth_obj = smoothed_check_objective(alpha, eps, resid);
  VectorXd best = beta;
  double best_obj = obj;

  const VectorXd col_sums = x.colwise().sum().transpose();
  VectorXd weights(n), rhs(d);
  MatrixXd normal(d, d);

  FitResult fit;
  if (opts.record_history) fit.history.push_back(smooth_obj);
  int iter = 0;
  bool converged = false;
  for (; iter < opts.max_iter; ++iter) {
    for (Index i = 0; i < n; ++i) weights[i] = 1.0 / (eps + std::fabs(resid[i]));
    normal.noalias() = x.transpose() * weights.asDiagonal() * x;
    normal.diagonal().array() += opts.ridge_floor * static_cast<double>(n);
    rhs.noalias() = x.transpose() * weights.cwiseProduct(yv);
    rhs += (2.0 * alpha - 1.0) * col_sums;
    const Eigen::LDLT<MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) throw SingularFit("MM normal equations are singular");
    beta = ldlt.solve(rhs);
    if (!beta.allFinite()) throw SingularFit("MM step is not finite");

    resid = yv - x * beta;
    obj = check_objective(alpha, resid);
    if (obj < best_obj) {
      best_obj = obj;
      best = beta;
    }
    const double next_smooth = smoothed_check_objective(alpha, eps, resid);
    const double change = std::fabs(smooth_obj - next_smooth);
    smooth_obj = next_smooth;
    if (opts.record_history) fit.history.push_back(smooth_obj);
    if (change < opts.tol_grad) {
      converged = true;
      ++iter;
      break;
    }
  }

  bool optimal = false;
  if (n >= d) {
    VectorXd vertex = best;
    if (edge_walk(x, yv, alpha, vertex, 50 * static_cast<int>(d), optimal)) {
      const double vertex_obj = check_objective(alpha, yv - x * vertex);
      if (vertex_obj <= best_obj) {
        best_obj = vertex_obj;
        best = std::move(vertex);
      } else {
        optimal = false;
      }
    }
  }

  resid = yv - x * best;
  VectorXd sub_grad = VectorXd::Zero(d);
  for (Index i = 0; i < n; ++i) {
    if (resid[i] != 0.0) sub_grad += ((resid[i] < 0 ? 1.0 : 0.0) - alpha) * x.row(i).transpose();
  }
  fit.coefficients = std::move(best);
  fit.objective = best_obj;
  fit.iterations = iter;
  fit.converged = converged || optimal;
  fit.gradient_norm = sub_grad.norm() / static_cast<double>(n);
  return fit;
}

}  // namespace

void SolverOptions::validate() const {
  if (!(tol_grad > 0 && max_iter > 0 && smoothing_eps > 0 && ridge_floor > 0 &&
        omega_cap > 0)) {
    throw InvalidConfiguration("solver options must all be strictly positive");
  }
}

double mean_loss(const LossSpec& spec, const Eigen::Ref<const VectorXd>& eta,
                 std::span<const double> y) {
  double sum = 0.0;
  for (Index i = 0; i < eta.size(); ++i) sum += detail::value(spec, eta[i], y[i]);
  return sum / static_cast<double>(eta.size());
}

FitResult fit_design(const Eigen::Ref<const MatrixXd>& x, std::span<const double> y,
                     const LossSpec& spec, const SolverOptions& opts, VectorXd start) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw InvalidConfiguration("design rows do not match the response length");
  }
  if (start.size() != x.cols()) throw InvalidConfiguration("start vector has wrong length");
  if (spec.smooth()) return newton(x, y, spec, opts, std::move(start));
  return quantile_mm(x, y, spec, opts, std::move(start));
}

FitResult fit_null(std::span<const double> y, const LossSpec& spec) {
  const double c = null_minimizer(spec, y);
  FitResult fit;
  fit.intercept = c;
  fit.coefficients = VectorXd::Constant(1, c);
  double sum = 0.0;
  for (double v : y) sum += detail::value(spec, c, v);
  fit.objective = sum / static_cast<double>(y.size());
  fit.converged = true;
  return fit;
}

FitResult fit_marginal(const DesignMatrix& design, std::span<const double> y,
                       const LossSpec& spec, const SolverOptions& opts,
                       std::optional<double> null_intercept) {
  opts.validate();
  const double c = null_intercept ? *null_intercept : null_minimizer(spec, y);
  if (!null_intercept) check_responses(spec, y);
  // Partition of unity: equal coefficients reproduce the constant c.
  return fit_design(design.values, y, spec, opts,
                    VectorXd::Constant(design.values.cols(), c));
}

FitResult fit_joint(std::span<const DesignMatrix> blocks, std::span<const double> y,
                    const LossSpec& spec, const SolverOptions& opts,
                    std::optional<double> null_intercept) {
  opts.validate();
  if (blocks.empty()) return fit_null(y, spec);
  const double c = null_intercept ? *null_intercept : null_minimizer(spec, y);
  if (!null_intercept) check_responses(spec, y);

  const auto n = static_cast<Index>(y.size());
  Index cols = 1;
  for (const auto& block : blocks) {
    if (block.values.rows() != n) {
      throw InvalidConfiguration("design block rows do not match the response length");
    }
    cols += block.values.cols();
  }
  MatrixXd x(n, cols);
  x.col(0).setOnes();
  Index at = 1;
  for (const auto& block : blocks) {
    x.middleCols(at, block.values.cols()) = block.values;
    at += block.values.cols();
  }
  VectorXd start = VectorXd::Zero(cols);
  start[0] = c;
  FitResult fit = fit_design(x, y, spec, opts, std::move(start));
  fit.intercept = fit.coefficients[0];
  fit.coefficients = fit.coefficients.tail(cols - 1).eval();
  return fit;
}

}  // namespace gofscreen
