#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace gofscreen {

enum class LossKind { gaussian, logistic, poisson, exp_class, quantile };

enum class Smoothness { twice_differentiable, piecewise_linear_derivative };

/// A conditional strictly convex loss l(omega, y).
///
/// Response codings: logistic uses y in {0,1}, exp_class uses y in {-1,+1},
/// poisson uses nonnegative integers.  `alpha` is meaningful only for the
/// quantile (check) loss.
struct LossSpec {
  LossKind kind = LossKind::gaussian;
  double alpha = 0.5;

  static LossSpec gaussian() { return {LossKind::gaussian, 0.5}; }
  static LossSpec logistic() { return {LossKind::logistic, 0.5}; }
  static LossSpec poisson() { return {LossKind::poisson, 0.5}; }
  static LossSpec exp_class() { return {LossKind::exp_class, 0.5}; }
  /// Throws InvalidConfiguration unless 0 < alpha < 1.
  static LossSpec quantile(double alpha);

  Smoothness smoothness() const {
    return kind == LossKind::quantile ? Smoothness::piecewise_linear_derivative
                                      : Smoothness::twice_differentiable;
  }
  bool smooth() const { return smoothness() == Smoothness::twice_differentiable; }

  friend bool operator==(const LossSpec& a, const LossSpec& b) {
    return a.kind == b.kind && (a.kind != LossKind::quantile || a.alpha == b.alpha);
  }
};

std::string_view loss_name(LossKind kind);
/// Inverse of loss_name; returns nullopt for unknown names.
std::optional<LossKind> parse_loss_kind(std::string_view name);

/// Throws DomainError if `y` is not a valid response for the loss.
void check_response(const LossSpec& spec, double y);
void check_responses(const LossSpec& spec, std::span<const double> y);

double loss_value(const LossSpec& spec, double omega, double y);
/// Derivative in omega.  For the check loss this is 1{y - omega < 0} - alpha
/// with the indicator taken as 0 at y == omega.
double loss_deriv(const LossSpec& spec, double omega, double y);
/// Second derivative in omega; throws UnsupportedOperation for the check loss.
double loss_curvature(const LossSpec& spec, double omega, double y);

/// argmin over a constant c of the mean loss of (c, y_i).
///
/// Closed forms: mean, logit of the mean, log of the mean, half the log odds
/// of the class counts, and the ceil(n alpha)-th order statistic.
double null_minimizer(const LossSpec& spec, std::span<const double> y);

namespace detail {

// Unchecked kernels shared by the solvers; callers validate responses once.

inline double log1p_exp(double w) {
  return w > 0 ? w + std::log1p(std::exp(-w)) : std::log1p(std::exp(w));
}

inline double sigmoid(double w) {
  if (w >= 0) return 1.0 / (1.0 + std::exp(-w));
  const double e = std::exp(w);
  return e / (1.0 + e);
}

inline double value(const LossSpec& spec, double w, double y) {
  switch (spec.kind) {
    case LossKind::gaussian: {
      const double r = y - w;
      return 0.5 * r * r;
    }
    case LossKind::logistic:
      return -w * y + log1p_exp(w);
    case LossKind::poisson:
      return -y * w + std::exp(w) + std::lgamma(y + 1.0);
    case LossKind::exp_class:
      return std::exp(-y * w);
    case LossKind::quantile: {
      const double r = y - w;
      return r * (spec.alpha - (r < 0 ? 1.0 : 0.0));
    }
  }
  return 0.0;
}

inline double deriv(const LossSpec& spec, double w, double y) {
  switch (spec.kind) {
    case LossKind::gaussian:
      return w - y;
    case LossKind::logistic:
      return -y + sigmoid(w);
    case LossKind::poisson:
      return -y + std::exp(w);
    case LossKind::exp_class:
      return -y * std::exp(-y * w);
    case LossKind::quantile:
      return (y - w < 0 ? 1.0 : 0.0) - spec.alpha;
  }
  return 0.0;
}

inline double curvature(const LossSpec& spec, double w, double y) {
  switch (spec.kind) {
    case LossKind::gaussian:
      return 1.0;
    case LossKind::logistic: {
      const double s = sigmoid(w);
      return s * (1.0 - s);
    }
    case LossKind::poisson:
      return std::exp(w);
    case LossKind::exp_class:
      return std::exp(-y * w);
    case LossKind::quantile:
      return 0.0;
  }
  return 0.0;
}

}  // namespace detail

}  // namespace gofscreen
