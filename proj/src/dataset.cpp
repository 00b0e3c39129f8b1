#include "gofscreen/dataset.hpp"

#include <cmath>

#include "gofscreen/error.hpp"

namespace gofscreen {

std::string_view response_kind_name(ResponseKind kind) {
  switch (kind) {
    case ResponseKind::continuous: return "continuous";
    case ResponseKind::binary01: return "binary01";
    case ResponseKind::binary_pm1: return "binaryPM1";
    case ResponseKind::count: return "count";
  }
  return "unknown";
}

void Dataset::validate() const {
  if (y.size() != x.rows()) {
    throw DataError("response length does not match the number of covariate rows");
  }
  if (!column_names.empty() && column_names.size() != p()) {
    throw DataError("column name count does not match the number of covariates");
  }
  if (!x.allFinite()) throw DataError("covariates contain non-finite values");
  if (!y.allFinite()) throw DataError("response contains non-finite values");
}

ResponseKind infer_response_kind(std::span<const double> y) {
  bool zero_one = true, plus_minus = true, counts = true;
  for (double v : y) {
    zero_one = zero_one && (v == 0.0 || v == 1.0);
    plus_minus = plus_minus && (v == -1.0 || v == 1.0);
    counts = counts && v >= 0.0 && v == std::floor(v);
  }
  if (y.empty()) return ResponseKind::continuous;
  if (zero_one) return ResponseKind::binary01;
  if (plus_minus) return ResponseKind::binary_pm1;
  if (counts) return ResponseKind::count;
  return ResponseKind::continuous;
}

Dataset prepare_for_loss(Dataset data, const LossSpec& spec) {
  data.response_kind = infer_response_kind(data.response());
  const auto kind = data.response_kind;
  const auto incompatible = [&] {
    return UsageError(std::string("response of kind ") +
                      std::string(response_kind_name(kind)) +
                      " cannot be used with the " + std::string(loss_name(spec.kind)) +
                      " loss");
  };
  switch (spec.kind) {
    case LossKind::gaussian:
    case LossKind::quantile:
      break;
    case LossKind::logistic:
      if (kind == ResponseKind::binary_pm1) {
        data.y = (data.y.array() + 1.0) / 2.0;
        data.response_kind = ResponseKind::binary01;
      } else if (kind != ResponseKind::binary01) {
        throw incompatible();
      }
      break;
    case LossKind::exp_class:
      if (kind == ResponseKind::binary01) {
        data.y = 2.0 * data.y.array() - 1.0;
        data.response_kind = ResponseKind::binary_pm1;
      } else if (kind != ResponseKind::binary_pm1) {
        throw incompatible();
      }
      break;
    case LossKind::poisson:
      if (kind != ResponseKind::count && kind != ResponseKind::binary01) throw incompatible();
      break;
  }
  return data;
}

std::vector<std::string> default_column_names(std::size_t p) {
  std::vector<std::string> names;
  names.reserve(p);
  for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

}  // namespace gofscreen
