#include "gofscreen/loss.hpp"

#include <algorithm>
#include <vector>

#include "gofscreen/error.hpp"

namespace gofscreen {

LossSpec LossSpec::quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidConfiguration("quantile level alpha must lie in (0,1)");
  }
  return {LossKind::quantile, alpha};
}

std::string_view loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::gaussian: return "gaussian";
    case LossKind::logistic: return "logistic";
    case LossKind::poisson: return "poisson";
    case LossKind::exp_class: return "expclass";
    case LossKind::quantile: return "quantile";
  }
  return "unknown";
}

std::optional<LossKind> parse_loss_kind(std::string_view name) {
  for (auto kind : {LossKind::gaussian, LossKind::logistic, LossKind::poisson,
                    LossKind::exp_class, LossKind::quantile}) {
    if (loss_name(kind) == name) return kind;
  }
  return std::nullopt;
}

void check_response(const LossSpec& spec, double y) {
  if (!std::isfinite(y)) throw DomainError("response is not finite");
  switch (spec.kind) {
    case LossKind::logistic:
      if (y != 0.0 && y != 1.0) {
        throw DomainError("logistic loss needs responses coded 0/1");
      }
      break;
    case LossKind::exp_class:
      if (y != -1.0 && y != 1.0) {
        throw DomainError("exponential classification loss needs responses coded -1/+1");
      }
      break;
    case LossKind::poisson:
      if (y < 0.0 || y != std::floor(y)) {
        throw DomainError("poisson loss needs nonnegative integer responses");
      }
      break;
    case LossKind::gaussian:
    case LossKind::quantile:
      break;
  }
}

void check_responses(const LossSpec& spec, std::span<const double> y) {
  for (double v : y) check_response(spec, v);
}

double loss_value(const LossSpec& spec, double omega, double y) {
  check_response(spec, y);
  return detail::value(spec, omega, y);
}

double loss_deriv(const LossSpec& spec, double omega, double y) {
  check_response(spec, y);
  return detail::deriv(spec, omega, y);
}

double loss_curvature(const LossSpec& spec, double omega, double y) {
  if (!spec.smooth()) {
    throw UnsupportedOperation("the check loss has no second derivative");
  }
  check_response(spec, y);
  return detail::curvature(spec, omega, y);
}

double null_minimizer(const LossSpec& spec, std::span<const double> y) {
  if (y.empty()) throw InvalidConfiguration("null fit needs at least one response");
  check_responses(spec, y);
  const auto n = static_cast<double>(y.size());
  double sum = 0.0;
  for (double v : y) sum += v;
  const double mean = sum / n;

  switch (spec.kind) {
    case LossKind::gaussian:
      return mean;
    case LossKind::logistic:
      if (mean <= 0.0 || mean >= 1.0) {
        throw SeparationError("logistic null fit needs both classes present");
      }
      return std::log(mean / (1.0 - mean));
    case LossKind::poisson:
      if (mean <= 0.0) throw BoundaryError("poisson null fit with all-zero counts");
      return std::log(mean);
    case LossKind::exp_class: {
      const auto pos = static_cast<double>(std::count(y.begin(), y.end(), 1.0));
      const double neg = n - pos;
      if (pos == 0.0 || neg == 0.0) {
        throw SeparationError("exponential classification null fit needs both classes");
      }
      return 0.5 * std::log(pos / neg);
    }
    case LossKind::quantile: {
      std::vector<double> sorted(y.begin(), y.end());
      // The small offset keeps products like 3 * 0.7 from rounding up a rank.
      auto rank = static_cast<std::size_t>(std::ceil(n * spec.alpha - 1e-9));
      rank = std::clamp<std::size_t>(rank, 1, sorted.size());
      std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
      return sorted[rank - 1];
    }
  }
  return 0.0;
}

}  // namespace gofscreen
