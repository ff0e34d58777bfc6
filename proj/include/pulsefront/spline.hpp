#pragma once

#include <span>
#include <vector>

#include "pulsefront/grid.hpp"

namespace pulsefront {

/// Tensor-product cubic B-spline interpolant of a field on a uniform grid.
/// Open axes use natural end conditions, periodic axes wrap. The interpolant is C2
/// and reproduces the nodal values.
class TensorSpline {
 public:
  TensorSpline() = default;
  explicit TensorSpline(const Field& f);

  int dim() const { return static_cast<int>(axes_.size()); }
  const std::vector<Axis>& axes() const { return axes_; }

  /// Value at x. Open axes are clamped to their node range.
  double operator()(std::span<const double> x) const;
  /// Value and derivative along axis 0.
  double eval_d0(std::span<const double> x, double& d0) const;

 private:
  double eval_impl(std::span<const double> x, double* d0) const;

  std::vector<Axis> axes_;
  std::vector<int> ext_;  // coefficient count per axis
  std::vector<std::size_t> stride_;
  std::vector<double> coef_;
};

/// C2 interpolant of a strip field: quintic Hermite along the open axis 0, with nodal
/// derivatives from seven-point differences, and trigonometric interpolation along the
/// periodic axes.
class StripInterpolant {
 public:
  StripInterpolant() = default;
  explicit StripInterpolant(const Field& f);

  double operator()(std::span<const double> x) const { return eval_impl(x, nullptr); }
  double eval_d0(std::span<const double> x, double& d0) const { return eval_impl(x, &d0); }

  /// Cardinal weights of the trigonometric interpolant on n nodes of spacing L/n at x.
  static void trig_weights(int n, double L, double x, double* w);

 private:
  double eval_impl(std::span<const double> x, double* d0) const;
  double transverse(const std::vector<double>& data, std::size_t row, double* const* w) const;

  std::vector<Axis> axes_;
  std::size_t row_ = 0;  // values per s-row
  std::vector<double> values_, d1_, d2_;  // nodal values and s-derivatives
};

/// Natural cubic spline through (a_k, y_k) written as y(a) = sum_k w_k(a) y_k.
class CardinalSpline {
 public:
  CardinalSpline() = default;
  explicit CardinalSpline(std::vector<double> knots);

  const std::vector<double>& knots() const { return knots_; }
  bool contains(double a) const;
  /// Weights at `a`; throws out_of_range outside [knots.front(), knots.back()].
  std::vector<double> weights(double a) const;

 private:
  std::vector<double> knots_;
  std::vector<double> second_;  // m x m, row j gives M_j as a combination of the y_k
};

}  // namespace pulsefront
