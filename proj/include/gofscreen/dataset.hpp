#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "gofscreen/loss.hpp"

namespace gofscreen {

enum class ResponseKind { continuous, binary01, binary_pm1, count };

std::string_view response_kind_name(ResponseKind kind);

/// n observations of p covariates plus a response.  `x` is column-major so
/// each covariate is a contiguous span.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> column_names;
  ResponseKind response_kind = ResponseKind::continuous;

  std::size_t n() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(x.cols()); }

  std::span<const double> column(std::size_t j) const {
    return {x.col(static_cast<Eigen::Index>(j)).data(), n()};
  }
  std::span<const double> response() const { return {y.data(), n()}; }

  /// Throws DataError on inconsistent dimensions or non-finite entries.
  void validate() const;
};

/// Most specific kind consistent with the values: binary01 before count.
ResponseKind infer_response_kind(std::span<const double> y);

/// Returns a copy of `data` whose response is coded for `spec`, recoding
/// between the 0/1 and -1/+1 binary conventions when needed.  Throws
/// UsageError when the response cannot be used with the loss.
Dataset prepare_for_loss(Dataset data, const LossSpec& spec);

/// Default column names x1..xp.
std::vector<std::string> default_column_names(std::size_t p);

}  // namespace gofscreen
