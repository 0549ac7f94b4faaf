#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

namespace spex::smooth {

enum class SplineKind { cubic, cyclic_cubic, tensor };

// Cubic regression spline bases parameterised by function values at the
// knots. The natural cubic kind extrapolates linearly beyond the outer
// knots; the cyclic kind is periodic with the given period. A tensor basis
// is the row-wise Kronecker product of two marginal bases.
class SplineBasis {
 public:
  static SplineBasis cubic(std::vector<double> knots);
  static SplineBasis cyclic(std::vector<double> knots, double period);
  static SplineBasis tensor(SplineBasis first, SplineBasis second);

  SplineKind kind() const { return kind_; }
  Eigen::Index size() const;
  const std::vector<double>& knots() const { return knots_; }
  double period() const { return period_; }
  const SplineBasis& marginal(int i) const { return i == 0 ? *first_ : *second_; }

  // One row per x. Only for cubic and cyclic kinds.
  Eigen::MatrixXd eval(std::span<const double> x) const;
  // Tensor evaluation on paired coordinates.
  Eigen::MatrixXd eval(std::span<const double> x1, std::span<const double> x2) const;
  // Second derivative of each basis function at x (cubic and cyclic only).
  Eigen::RowVectorXd second_derivative_row(double x) const;

  // Penalty S with c'Sc equal to the integrated squared second derivative
  // (sum of marginal penalties for the tensor kind).
  Eigen::MatrixXd penalty() const;

 private:
  SplineBasis() = default;
  void build_cardinal();
  void row_into(double x, double* out) const;
  // Reduces x into [knots.front(), knots.front() + period) for cyclic bases.
  double wrap(double x) const;

  SplineKind kind_ = SplineKind::cubic;
  std::vector<double> knots_;
  double period_ = 0.0;
  Eigen::MatrixXd curvature_;  // knot second derivatives as a linear map of knot values
  Eigen::MatrixXd penalty_;
  std::shared_ptr<const SplineBasis> first_, second_;
};

// Knots at evenly spaced sample quantiles of x (duplicates removed).
std::vector<double> quantile_knots(std::span<const double> x, int count);

}  // namespace spex::smooth
