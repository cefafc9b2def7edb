#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "beals/grid.hpp"

namespace beals {

/// Tensor phase-space grid: t in t_axis^d, xi in xi_axis^d.
struct PhaseSpaceGrid {
  int dim = 1;
  std::vector<double> t_axis;
  std::vector<double> xi_axis;

  std::size_t t_count() const { return static_cast<std::size_t>(ipow(static_cast<int>(t_axis.size()), dim)); }
  std::size_t xi_count() const { return static_cast<std::size_t>(ipow(static_cast<int>(xi_axis.size()), dim)); }
  Point t_point(std::size_t flat) const;
  Point xi_point(std::size_t flat) const;

  bool operator==(const PhaseSpaceGrid& o) const {
    return dim == o.dim && t_axis == o.t_axis && xi_axis == o.xi_axis;
  }
};

/// Row-major so that values.data() is the lexicographic 2d-axis tensor (t axes, then xi axes).
using SymbolMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct SeminormReport {
  std::vector<std::pair<std::string, double>> entries;  // "a=(..),b=(..)" -> sup |D_t^a D_xi^b a|
  double max = 0.0;
  bool finite = true;
};

/// Samples a(t, xi); rows enumerate t, columns enumerate xi.
struct Symbol {
  PhaseSpaceGrid grid;
  SymbolMatrix values;

  /// Finite-difference sup norms for |alpha|, |beta| <= max_order.
  SeminormReport seminorms(int max_order = 2) const;
};

using SymbolFunction = std::function<Complex(const Point& t, const Point& xi)>;

/// Built-in symbols.
///   one             1
///   xi              xi_j
///   x               t_j
///   sign            sign(t_j), a non-smooth control
///   gauss           exp(-|t|^2 / st^2 - |xi|^2 / sx^2)
///   gauss_modulated gauss * (1 + amplitude cos(omega t_1))
struct SymbolSpec {
  std::string kind = "gauss";
  int j = 0;
  double sigma_t = 1.0;
  double sigma_xi = 1.0;
  double amplitude = 0.5;
  double omega = 1.0;
};

SymbolFunction make_symbol(const SymbolSpec& spec, int dim);
Symbol sample_symbol(const SymbolFunction& a, const PhaseSpaceGrid& grid);

/// Phase-space grid matched to quantize: t on the half grid (2N-1 points per axis),
/// xi on N+1 points spanning [-pi/(2h), pi/(2h)].
PhaseSpaceGrid quantization_grid(const Grid& grid);

/// Uniform axis of `count` points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int count);

}  // namespace beals
