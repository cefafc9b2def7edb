#pragma once

#include <string>

#include "beals/common.hpp"

namespace beals {

/// Tensor-product window g(x) = prod_a g1(x_a) with sum_k g1(t - k)^2 = 1.
///
/// g1 = h / sqrt(sum_k h(. - k)^2) for the bump h(t) = exp(-1 / (1 - (t/r)^2)).
class Window {
 public:
  explicit Window(int dim = 1, double half_width = 1.0);

  int dim() const { return dim_; }
  double support_half_width() const { return r_; }

  double bump(double t) const;
  double value1d(double t) const;
  double operator()(const Point& x) const;
  /// sum_k g1(t - k)^2 on one axis.
  double partition_sum1d(double t) const;
  /// sum_gamma g(x - gamma)^2.
  double partition_sum(const Point& x) const;
  /// Central-difference derivative of g1; order <= 4.
  double derivative1d(double t, int order) const;
  /// ||g||^2 by composite Gauss-Legendre (exactly 1 in theory).
  double norm_squared() const;

 private:
  int dim_;
  double r_;
};

/// Built-in profiles: "bump" (default support 1) or "bump:<r>".
Window build_window(const std::string& kind, int dim);

}  // namespace beals
