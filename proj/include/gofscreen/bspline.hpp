#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gofscreen {

/// Clamped, normalized B-spline basis on a bounded support [lower, upper].
///
/// The basis has `num_basis` functions of polynomial degree `degree` built on
/// a knot vector of length num_basis + degree + 1 whose first and last
/// degree + 1 entries equal the support endpoints.  Every function lies in
/// [0,1] and the functions sum to one everywhere on the support.  Objects are
/// immutable after construction and safe to share between threads.
class SplineBasis {
 public:
  /// Throws InvalidConfiguration unless the knots form a valid clamped
  /// sequence for the given degree.
  SplineBasis(std::vector<double> knots, int degree);

  int degree() const noexcept { return degree_; }
  int num_basis() const noexcept { return num_basis_; }
  const std::vector<double>& knots() const noexcept { return knots_; }
  double lower() const noexcept { return knots_.front(); }
  double upper() const noexcept { return knots_.back(); }

  /// Evaluates the degree + 1 functions that can be nonzero at `x` into
  /// `local` (size >= degree + 1) and returns the index of the first one.
  /// Values outside the support are clamped to the nearest endpoint.
  int evaluate_local(double x, std::span<double> local) const;

  /// Writes all num_basis() values at `x` into `out`.
  void evaluate(double x, std::span<double> out) const;

  std::vector<double> evaluate(double x) const;

 private:
  std::vector<double> knots_;
  int degree_;
  int num_basis_;
};

/// Per-covariate design: row i holds the basis evaluated at the i-th sample.
struct DesignMatrix {
  Eigen::MatrixXd values;
  std::size_t column_index = 0;
};

inline constexpr int kDefaultDegree = 3;

/// Builds a basis for one covariate.  The support is the sample range padded
/// by 1e-9 of its width and the num_basis - degree - 1 interior knots sit at
/// the empirical quantiles k / (num_basis - degree) of the sample.
SplineBasis make_basis(std::span<const double> x, int num_basis,
                       int degree = kDefaultDegree);

/// Evaluates `basis` on every entry of `x`.  With `drop_first` the first
/// basis function is omitted, leaving a basis whose span excludes constants.
DesignMatrix design_matrix(const SplineBasis& basis, std::span<const double> x,
                           std::size_t column_index = 0, bool drop_first = false);

/// Default number of basis functions for sample size n: ceil(n^(1/5)) + 2.
int default_num_basis(std::size_t n);

}  // namespace gofscreen
