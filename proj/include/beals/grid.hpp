#pragma once

#include <Eigen/Dense>
#include <functional>

#include "beals/common.hpp"

namespace beals {

/// Uniform box grid x_k = -L + k h, h = 2L/N, on [-L, L)^d.
///
/// Flat indices are lexicographic with the last axis running fastest.
struct Grid {
  int dim = 1;
  double L = 8.0;
  int N = 512;

  Grid() = default;
  Grid(int dim, double L, int N);

  /// Grid whose spacing is exactly 2 pi / (2M + 1), with half width >= min_half_width.
  static Grid commensurate(int dim, double min_half_width, int M);

  double h() const { return 2.0 * L / N; }
  double weight() const { return std::pow(h(), dim); }
  std::size_t size() const { return static_cast<std::size_t>(ipow(N, dim)); }
  double coord(int k) const { return -L + k * h(); }
  std::array<int, kMaxDim> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::array<int, kMaxDim>& idx) const;
  Point point(std::size_t flat) const;
  /// Index of the grid coordinate nearest to x on one axis.
  int nearest(double x) const { return static_cast<int>(std::lround((x + L) / h())); }
  /// True when (2M+1) h = 2 pi up to rounding.
  bool commensurate_with(int M) const;

  bool operator==(const Grid& o) const { return dim == o.dim && L == o.L && N == o.N; }
};

/// Complex samples on a Grid.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(Grid grid);
  GridFunction(Grid grid, Eigen::VectorXcd values);

  static GridFunction from_function(const Grid& grid, const std::function<Complex(const Point&)>& f);

  const Grid& grid() const { return grid_; }
  Eigen::VectorXcd& values() { return values_; }
  const Eigen::VectorXcd& values() const { return values_; }
  Complex& operator[](std::size_t i) { return values_[static_cast<Eigen::Index>(i)]; }
  Complex operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  double norm() const;
  /// h^d sum conj(this) * other
  Complex inner(const GridFunction& other) const;
  /// Largest |f| over points on the box boundary layer.
  double edge_magnitude() const;

 private:
  Grid grid_;
  Eigen::VectorXcd values_;
};

}  // namespace beals
