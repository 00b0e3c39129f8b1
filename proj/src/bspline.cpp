#include "gofscreen/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gofscreen/error.hpp"

namespace gofscreen {

namespace {

constexpr int kMaxDegree = 15;

// Type-7 empirical quantile of sorted data.
double sorted_quantile(std::span<const double> sorted, double level) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

SplineBasis::SplineBasis(std::vector<double> knots, int degree)
    : knots_(std::move(knots)), degree_(degree) {
  if (degree_ < 1 || degree_ > kMaxDegree) {
    throw InvalidConfiguration("spline degree must be in [1, " +
                               std::to_string(kMaxDegree) + "]");
  }
  num_basis_ = static_cast<int>(knots_.size()) - degree_ - 1;
  if (num_basis_ < degree_ + 1) {
    throw InvalidConfiguration("knot vector too short for the requested degree");
  }
  if (!std::is_sorted(knots_.begin(), knots_.end())) {
    throw InvalidConfiguration("knots must be nondecreasing");
  }
  const double lo = knots_.front();
  const double hi = knots_.back();
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidConfiguration("knot support must be a finite nonempty interval");
  }
  for (int k = 0; k <= degree_; ++k) {
    if (knots_[k] != lo || knots_[knots_.size() - 1 - k] != hi) {
      throw InvalidConfiguration("knot vector must be clamped at both ends");
    }
  }
  // Interior knots of multiplicity > degree would split the basis.
  for (std::size_t k = degree_ + 1; k + degree_ + 1 < knots_.size(); ++k) {
    if (knots_[k] == lo || knots_[k] == hi) {
      throw InvalidConfiguration("interior knots must lie strictly inside the support");
    }
    if (k + degree_ < knots_.size() - degree_ - 1 && knots_[k] == knots_[k + degree_]) {
      throw InvalidConfiguration("interior knot multiplicity exceeds the degree");
    }
  }
}

int SplineBasis::evaluate_local(double x, std::span<double> local) const {
  const double lo = lower();
  const double hi = upper();
  x = std::clamp(x, lo, hi);

  // Knot span: largest s in [degree, num_basis - 1] with knots[s] <= x.
  int span;
  if (x >= hi) {
    span = num_basis_ - 1;
  } else {
    const auto it = std::upper_bound(knots_.begin() + degree_,
                                     knots_.begin() + num_basis_ + 1, x);
    span = static_cast<int>(it - knots_.begin()) - 1;
  }

  // Cox-de Boor triangle (de Boor's BSPLVB).
  double left[kMaxDegree + 1];
  double right[kMaxDegree + 1];
  local[0] = 1.0;
  for (int j = 1; j <= degree_; ++j) {
    left[j] = x - knots_[span + 1 - j];
    right[j] = knots_[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = local[r] / (right[r + 1] + left[j - r]);
      local[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    local[j] = saved;
  }
  return span - degree_;
}

void SplineBasis::evaluate(double x, std::span<double> out) const {
  double local[kMaxDegree + 1];
  const int first = evaluate_local(x, local);
  std::fill(out.begin(), out.begin() + num_basis_, 0.0);
  for (int k = 0; k <= degree_; ++k) out[first + k] = local[k];
}

std::vector<double> SplineBasis::evaluate(double x) const {
  std::vector<double> out(num_basis_);
  evaluate(x, out);
  return out;
}

SplineBasis make_basis(std::span<const double> x, int num_basis, int degree) {
  if (degree < 1) throw InvalidConfiguration("spline degree must be >= 1");
  if (num_basis < degree + 1) {
    throw InvalidConfiguration("number of basis functions must be at least degree + 1");
  }
  if (x.size() < static_cast<std::size_t>(num_basis) + 1) {
    throw InvalidConfiguration("need at least num_basis + 1 observations");
  }

  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  if (!std::isfinite(sorted.front()) || !std::isfinite(sorted.back())) {
    throw DomainError("covariate contains non-finite values");
  }
  const auto distinct = static_cast<int>(
      std::unique(sorted.begin(), sorted.end()) - sorted.begin());
  if (distinct < num_basis - degree || distinct < 2) {
    throw DegenerateCovariate("covariate has " + std::to_string(distinct) +
                              " distinct values; need at least " +
                              std::to_string(std::max(2, num_basis - degree)));
  }
  // unique() scrambled the tail; rebuild the full sorted sample.
  sorted.assign(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());

  const double min = sorted.front();
  const double max = sorted.back();
  const double pad = 1e-9 * (max - min);
  const int interior = num_basis - degree - 1;

  std::vector<double> knots;
  knots.reserve(num_basis + degree + 1);
  knots.insert(knots.end(), degree + 1, min - pad);
  for (int k = 1; k <= interior; ++k) {
    knots.push_back(sorted_quantile(sorted, static_cast<double>(k) / (interior + 1)));
  }
  knots.insert(knots.end(), degree + 1, max + pad);

  try {
    return SplineBasis(std::move(knots), degree);
  } catch (const InvalidConfiguration& e) {
    // Heavy ties put several quantile knots on one value.
    throw DegenerateCovariate(std::string("quantile knots collapse: ") + e.what());
  }
}

DesignMatrix design_matrix(const SplineBasis& basis, std::span<const double> x,
                           std::size_t column_index, bool drop_first) {
  const int offset = drop_first ? 1 : 0;
  DesignMatrix design;
  design.column_index = column_index;
  design.values.setZero(static_cast<Eigen::Index>(x.size()), basis.num_basis() - offset);
  double local[kMaxDegree + 1];
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int first = basis.evaluate_local(x[i], local);
    for (int k = 0; k <= basis.degree(); ++k) {
      const int col = first + k - offset;
      if (col >= 0) design.values(static_cast<Eigen::Index>(i), col) = local[k];
    }
  }
  return design;
}

int default_num_basis(std::size_t n) {
  // Integer search avoids pow() rounding at exact fifth powers.
  int root = 1;
  while (std::pow(static_cast<double>(root), 5.0) < static_cast<double>(n)) ++root;
  return root + 2;
}

}  // namespace gofscreen
