#pragma once

#include <optional>

#include <Eigen/Dense>

#include "beals/grid.hpp"
#include "beals/magnetic_geometry.hpp"
#include "beals/symbol.hpp"

namespace beals {

/// Discrete kernel K(x, x'); (T f)(x) = h^d sum_x' K(x, x') f(x').
struct OperatorKernel {
  Grid grid;
  Eigen::MatrixXcd K;
  bool magnetic = false;
  std::optional<PhaseFn> phase;

  OperatorKernel() = default;
  OperatorKernel(Grid grid, Eigen::MatrixXcd K, std::optional<PhaseFn> phase = std::nullopt);

  double weight() const { return grid.weight(); }
};

/// K(x,x') = (2pi)^{-d} [e^{i phi(x,x')}] int e^{i xi.(x-x')} a((x+x')/2, xi) dxi,
/// with the xi integral on the grid of quantization_grid (trapezoid weights, one FFT per midpoint).
OperatorKernel quantize(const SymbolFunction& a, const Grid& grid, const std::optional<PhaseFn>& phase = std::nullopt,
                        int workers = 1);
/// Same for sampled symbols; the symbol grid must equal quantization_grid(grid).
OperatorKernel quantize(const Symbol& a, const Grid& grid, const std::optional<PhaseFn>& phase = std::nullopt,
                        int workers = 1);

/// Multiplication by v(x): K = diag(v) / h^d.
OperatorKernel multiplication_kernel(const Grid& grid, const std::function<Complex(const Point&)>& v);

GridFunction apply(const OperatorKernel& K, const GridFunction& f);

/// (x_j - x'_j) K(x, x').
OperatorKernel commutator_position(const OperatorKernel& K, int j);

struct CommutatorOptions {
  int order = 2;            // accuracy order of the centered stencil: 2, 4, 6 or 8
  int width = 1;            // stencil step in grid cells
  double tolerance = 0.25;  // allowed relative change between widths w and 2w
};

struct CommutatorResult {
  OperatorKernel kernel;
  double stencil_discrepancy = 0.0;  // ||C_w - C_2w|| / ||C_w|| away from the box edge
};

/// Kernel of [Pi_j, T] (or [D_j, T] without a phase evaluator):
/// -i (d_{x_j} + d_{x'_j}) K - (A_j(x, base) - A_j(x', base)) K, by centered differences.
/// Throws GridError when widths w and 2w disagree beyond tolerance.
CommutatorResult commutator_momentum(const OperatorKernel& K, int j, const PhaseEvaluator* pe = nullptr,
                                     const CommutatorOptions& opt = {});

/// Centered-difference -i d_j f (same stencil as commutator_momentum), minus A_j f when pe is given.
GridFunction momentum_apply(const GridFunction& f, int j, const PhaseEvaluator* pe = nullptr,
                            const CommutatorOptions& opt = {});

struct NormOptions {
  double tolerance = 1e-8;
  int max_iterations = 10000;
  unsigned long long seed = 1;
};

struct NormEstimate {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Largest singular value of h^d K by power iteration on (h^d K)^* (h^d K).
NormEstimate operator_norm_estimate(const OperatorKernel& K, const NormOptions& opt = {});

}  // namespace beals
