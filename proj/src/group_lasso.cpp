#include "gofscreen/group_lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>

#include "gofscreen/bspline.hpp"
#include "gofscreen/error.hpp"

namespace gofscreen {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Per-observation derivative and curvature of the (smoothed) loss.  For the
// check loss these come from the Hunter-Lange quadratic majorizer, which is
// tangent to the eps-perturbed loss at the current residual.
void local_quadratic(const LossSpec& spec, double eps, const VectorXd& eta,
                     std::span<const double> y, VectorXd& grad, VectorXd& curv) {
  for (Index i = 0; i < eta.size(); ++i) {
    if (spec.smooth()) {
      grad[i] = detail::deriv(spec, eta[i], y[i]);
      curv[i] = std::max(detail::curvature(spec, eta[i], y[i]), 1e-12);
    } else {
      const double r = y[i] - eta[i];
      const double denom = eps + std::fabs(r);
      grad[i] = -r / (2.0 * denom) - spec.alpha + 0.5;
      curv[i] = 1.0 / (2.0 * denom);
    }
  }
}

double working_loss(const LossSpec& spec, double eps, const VectorXd& eta,
                    std::span<const double> y) {
  double sum = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    sum += detail::value(spec, eta[i], y[i]);
    if (!spec.smooth()) sum -= 0.5 * eps * std::log(eps + std::fabs(y[i] - eta[i]));
  }
  return sum / static_cast<double>(eta.size());
}

double penalty(const AdditiveBlocks& blocks, const std::vector<VectorXd>& theta,
               double lambda) {
  double sum = 0.0;
  for (std::size_t g = 0; g < theta.size(); ++g) {
    sum += std::sqrt(static_cast<double>(blocks.bases[g].cols())) * theta[g].norm();
  }
  return sum == 0.0 ? 0.0 : lambda * sum;
}

// v * max(0, 1 - tau / ||v||)
VectorXd group_shrink(const VectorXd& v, double tau) {
  const double norm = v.norm();
  // The relative slack keeps blocks exactly zero at lambda_max, where the
  // test is a tie up to rounding.
  if (norm <= tau * (1.0 + 1e-12)) return VectorXd::Zero(v.size());
  return v * (1.0 - tau / norm);
}

}  // namespace

AdditiveBlocks build_additive_blocks(const Dataset& data,
                                     std::span<const std::size_t> candidates,
                                     int num_basis) {
  AdditiveBlocks blocks;
  blocks.n = data.n();
  const double n = static_cast<double>(data.n());
  for (std::size_t j : candidates) {
    if (j >= data.p()) throw InvalidConfiguration("candidate index out of range");
    MatrixXd b;
    try {
      const SplineBasis basis = make_basis(data.column(j), num_basis);
      b = design_matrix(basis, data.column(j), j, /*drop_first=*/true).values;
    } catch (const DegenerateCovariate&) {
      continue;
    }
    b.rowwise() -= b.colwise().mean();
    const MatrixXd gram = b.transpose() * b / n;
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
    const VectorXd& values = eig.eigenvalues();
    const double cutoff = 1e-10 * values.maxCoeff();
    Index keep = 0;
    for (Index k = 0; k < values.size(); ++k) keep += values[k] > cutoff ? 1 : 0;
    if (keep == 0) continue;
    // Eigenvalues ascend, so the retained directions are the rightmost.
    const MatrixXd transform =
        eig.eigenvectors().rightCols(keep) *
        values.tail(keep).cwiseSqrt().cwiseInverse().asDiagonal();
    blocks.covariates.push_back(j);
    blocks.bases.push_back(b * transform);
  }
  return blocks;
}

double group_lambda_max(const AdditiveBlocks& blocks, std::span<const double> y,
                        const LossSpec& spec) {
  const double c = null_minimizer(spec, y);
  const auto n = static_cast<Index>(y.size());
  VectorXd grad(n);
  for (Index i = 0; i < n; ++i) grad[i] = detail::deriv(spec, c, y[i]);
  double lambda = 0.0;
  for (const auto& q : blocks.bases) {
    const double score = (q.transpose() * grad).norm() / static_cast<double>(n);
    lambda = std::max(lambda, score / std::sqrt(static_cast<double>(q.cols())));
  }
  return lambda;
}

std::vector<double> default_penalty_grid(double lambda_max, std::size_t points,
                                         double ratio) {
  std::vector<double> grid;
  if (points == 0 || !(lambda_max > 0)) return grid;
  if (points == 1) return {lambda_max};
  const double step = std::log(ratio) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) {
    grid.push_back(lambda_max * std::exp(step * static_cast<double>(k)));
  }
  return grid;
}

GroupLassoFit fit_group_lasso(const AdditiveBlocks& blocks, std::span<const double> y,
                              const LossSpec& spec, double lambda, const SolverOptions& opts,
                              const GroupLassoFit* warm) {
  if (!(lambda >= 0)) throw InvalidConfiguration("penalty must be nonnegative");
  const auto n = static_cast<Index>(y.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  const std::size_t groups = blocks.bases.size();
  const double eps = opts.smoothing_eps;

  GroupLassoFit fit;
  fit.lambda = lambda;
  if (warm != nullptr && warm->theta.size() == groups) {
    fit.intercept = warm->intercept;
    fit.theta = warm->theta;
  } else {
    fit.intercept = null_minimizer(spec, y);
    fit.theta.resize(groups);
    for (std::size_t g = 0; g < groups; ++g) {
      fit.theta[g] = VectorXd::Zero(blocks.bases[g].cols());
    }
  }
  std::vector<double> weight(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    weight[g] = std::sqrt(static_cast<double>(blocks.bases[g].cols()));
  }

  const auto predictor = [&](double b0, const std::vector<VectorXd>& theta) {
    VectorXd eta = VectorXd::Constant(n, b0);
    for (std::size_t g = 0; g < groups; ++g) eta.noalias() += blocks.bases[g] * theta[g];
    return eta;
  };

  VectorXd eta = predictor(fit.intercept, fit.theta);
  double objective = working_loss(spec, eps, eta, y) + penalty(blocks, fit.theta, lambda);
  VectorXd grad(n), curv(n), u(n), delta_eta(n);
  std::vector<VectorXd> trial_theta(groups);
  std::vector<double> lipschitz(groups);

  constexpr int kMaxOuter = 200;
  constexpr int kMaxSweeps = 5000;
  int outer = 0;
  for (; outer < kMaxOuter; ++outer) {
    local_quadratic(spec, eps, eta, y, grad, curv);
    for (std::size_t g = 0; g < groups; ++g) {
      const MatrixXd& q = blocks.bases[g];
      const MatrixXd a = q.transpose() * curv.asDiagonal() * q * inv_n;
      lipschitz[g] = Eigen::SelfAdjointEigenSolver<MatrixXd>(a, Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .maxCoeff();
    }
    const double curv_mean = curv.mean();

    // Blockwise coordinate descent on the penalized quadratic model.
    // u holds the model's derivative in eta at the current trial point.
    double b0 = fit.intercept;
    trial_theta = fit.theta;
    u = grad;
    delta_eta.setZero();
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      double max_change = 0.0;
      const double shift = -u.mean() / curv_mean;
      b0 += shift;
      delta_eta.array() += shift;
      u += shift * curv;
      max_change = std::max(max_change, std::fabs(shift));
      for (std::size_t g = 0; g < groups; ++g) {
        const MatrixXd& q = blocks.bases[g];
        const double lip = lipschitz[g];
        if (!(lip > 0)) continue;
        for (int inner = 0; inner < 4; ++inner) {
          const VectorXd block_grad = q.transpose() * u * inv_n;
          const VectorXd next =
              group_shrink(trial_theta[g] - block_grad / lip, lambda * weight[g] / lip);
          const VectorXd change = next - trial_theta[g];
          const double size = change.lpNorm<Eigen::Infinity>();
          if (size == 0.0) break;
          const VectorXd eta_change = q * change;
          delta_eta += eta_change;
          u.array() += curv.array() * eta_change.array();
          trial_theta[g] = next;
          max_change = std::max(max_change, size);
          if (size < 1e-14) break;
        }
      }
      if (max_change < 1e-13) break;
    }

    // Backtracking on the true penalized objective along the model step.
    const double model_decrease = grad.dot(delta_eta) * inv_n +
                                  penalty(blocks, trial_theta, lambda) -
                                  penalty(blocks, fit.theta, lambda);
    double t = 1.0;
    bool accepted = false;
    double next_objective = objective;
    double next_b0 = b0;
    std::vector<VectorXd> next_theta = trial_theta;
    VectorXd next_eta;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      next_b0 = fit.intercept + t * (b0 - fit.intercept);
      for (std::size_t g = 0; g < groups; ++g) {
        next_theta[g] = fit.theta[g] + t * (trial_theta[g] - fit.theta[g]);
      }
      next_eta = eta + t * delta_eta;
      next_objective =
          working_loss(spec, eps, next_eta, y) + penalty(blocks, next_theta, lambda);
      if (std::isfinite(next_objective) &&
          next_objective <= objective + 1e-4 * t * std::min(model_decrease, 0.0) +
                                8 * std::numeric_limits<double>::epsilon() *
                                    std::max(1.0, std::fabs(objective))) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    const double improvement = objective - next_objective;
    double step = std::fabs(next_b0 - fit.intercept);
    for (std::size_t g = 0; g < groups; ++g) {
      step = std::max(step, (next_theta[g] - fit.theta[g]).lpNorm<Eigen::Infinity>());
    }
    fit.intercept = next_b0;
    fit.theta = next_theta;
    eta = std::move(next_eta);
    objective = next_objective;
    if (improvement <= 1e-15 * std::max(1.0, std::fabs(objective)) && step < 1e-10) {
      fit.converged = true;
      ++outer;
      break;
    }
  }

  fit.iterations = outer;
  fit.mean_loss = mean_loss(spec, eta, y);
  fit.parameters = 1;
  for (std::size_t g = 0; g < groups; ++g) {
    if (fit.theta[g].squaredNorm() > 0.0) {
      fit.active.push_back(blocks.covariates[g]);
      fit.parameters += static_cast<std::size_t>(fit.theta[g].size());
    }
  }
  std::sort(fit.active.begin(), fit.active.end());
  const double nd = static_cast<double>(n);
  fit.criterion = 2.0 * nd * fit.mean_loss + std::log(nd) * static_cast<double>(fit.parameters);
  return fit;
}

std::vector<GroupLassoFit> group_lasso_path(const AdditiveBlocks& blocks,
                                            std::span<const double> y, const LossSpec& spec,
                                            std::span<const double> grid,
                                            const SolverOptions& opts) {
  if (!std::is_sorted(grid.begin(), grid.end(), std::greater<>())) {
    throw InvalidConfiguration("penalty grid must be sorted in decreasing order");
  }
  std::vector<GroupLassoFit> path;
  path.reserve(grid.size());
  for (double lambda : grid) {
    path.push_back(fit_group_lasso(blocks, y, spec, lambda, opts,
                                   path.empty() ? nullptr : &path.back()));
  }
  return path;
}

std::vector<std::size_t> penalized_refit(const Dataset& data,
                                         std::span<const std::size_t> candidates,
                                         const LossSpec& spec, int num_basis,
                                         std::span<const double> penalty_grid,
                                         const SolverOptions& opts) {
  if (candidates.empty()) return {};
  const AdditiveBlocks blocks = build_additive_blocks(data, candidates, num_basis);
  if (blocks.bases.empty()) return {};
  std::vector<double> grid(penalty_grid.begin(), penalty_grid.end());
  if (grid.empty()) {
    grid = default_penalty_grid(group_lambda_max(blocks, data.response(), spec));
    if (grid.empty()) grid = {0.0};
  }
  const auto path = group_lasso_path(blocks, data.response(), spec, grid, opts);

  // Each distinct active set on the path is scored by the criterion of its
  // unpenalized refit; scoring the shrunken fits themselves would favor the
  // smallest penalty because shrinkage inflates their loss.
  const auto y = data.response();
  const double nd = static_cast<double>(data.n());
  std::map<std::vector<std::size_t>, double> scored;
  const std::vector<std::size_t>* best = nullptr;
  double best_criterion = std::numeric_limits<double>::infinity();
  for (const auto& fit : path) {
    auto [it, fresh] = scored.try_emplace(fit.active, 0.0);
    if (fresh) {
      std::vector<DesignMatrix> active;
      double parameters = 1.0;
      for (std::size_t g = 0; g < blocks.bases.size(); ++g) {
        if (fit.theta[g].squaredNorm() == 0.0) continue;
        active.push_back({blocks.bases[g], blocks.covariates[g]});
        parameters += static_cast<double>(blocks.bases[g].cols());
      }
      const FitResult refit = fit_joint(active, y, spec, opts);
      it->second = 2.0 * nd * refit.objective + std::log(nd) * parameters;
    }
    if (it->second < best_criterion) {
      best_criterion = it->second;
      best = &it->first;
    }
  }
  return *best;
}

}  // namespace gofscreen
