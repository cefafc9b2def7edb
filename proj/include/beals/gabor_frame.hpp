#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "beals/decay.hpp"
#include "beals/grid.hpp"
#include "beals/window.hpp"

namespace beals {

using MultiIndex = std::array<int, kMaxDim>;

/// gamma in Z^d with |gamma|_inf <= Gamma, m in Z^d with |m|_inf <= M.
/// Both enumerations are lexicographic, last axis fastest, starting at -Gamma / -M.
struct FrameIndexSet {
  int dim = 1;
  int Gamma = 7;
  int M = 16;

  FrameIndexSet() = default;
  FrameIndexSet(int dim, int Gamma, int M);

  int gamma_side() const { return 2 * Gamma + 1; }
  int modulation_side() const { return 2 * M + 1; }
  std::size_t gamma_count() const { return static_cast<std::size_t>(ipow(gamma_side(), dim)); }
  std::size_t modulation_count() const { return static_cast<std::size_t>(ipow(modulation_side(), dim)); }
  MultiIndex gamma(std::size_t flat) const;
  MultiIndex modulation(std::size_t flat) const;
  Point gamma_point(std::size_t flat) const;
  Point modulation_point(std::size_t flat) const;
  std::size_t gamma_flat(const MultiIndex& g) const;
  std::size_t modulation_flat(const MultiIndex& m) const;

  bool operator==(const FrameIndexSet& o) const { return dim == o.dim && Gamma == o.Gamma && M == o.M; }
};

/// c_{gamma, m}: rows enumerate gamma, columns enumerate m.
struct FrameCoefficients {
  FrameIndexSet index;
  Eigen::MatrixXcd values;
  double uncovered_fraction = 0.0;  // share of ||f||^2 outside the covered cubes
  double edge_magnitude = 0.0;
  std::vector<std::string> warnings;

  double energy() const { return values.squaredNorm(); }
};

struct CoefficientDecayReport {
  std::vector<double> modulation_shell_max;  // index |m|_inf
  std::vector<double> gamma_shell_max;       // index |gamma|_inf
  ShellFit modulation_fit;
  ShellFit gamma_fit;
  std::vector<double> modulation_constants;  // C_{f,N}, N = 0..4
  bool slow_decay = false;
};

struct CoefficientDecayOptions {
  int fit_lo = 4;
  int fit_hi = 16;
  double floor_rel = 1e-12;
  double slow_threshold = 1.5;
};

/// Magnetic Gabor frame G_{gamma,m}(x) = (2pi)^{-d/2} e^{i phi(x,gamma)} g(x-gamma) e^{i m.(x-gamma)} on a grid.
class GaborFrame {
 public:
  /// Samples of one support cube gamma + (-r, r)^d.
  struct Cube {
    MultiIndex lo{};                     // first grid index per axis
    MultiIndex n{};                      // points per axis
    std::vector<std::size_t> points;     // grid flat indices, lexicographic
    Eigen::VectorXd window;              // g(x - gamma)
    Eigen::VectorXcd weight;             // (2pi)^{-d/2} g(x - gamma) e^{i phi(x, gamma)}
    std::array<Eigen::MatrixXcd, kMaxDim> modulation;  // (m, k) -> e^{i m (x_k - gamma_a)}
  };

  GaborFrame(Grid grid, Window window, FrameIndexSet index, std::optional<PhaseFn> phase = std::nullopt,
             int workers = 1);

  const Grid& grid() const { return grid_; }
  const Window& window() const { return window_; }
  const FrameIndexSet& index() const { return index_; }
  bool magnetic() const { return phase_.has_value(); }
  const std::optional<PhaseFn>& phase() const { return phase_; }
  int workers() const { return workers_; }
  const Cube& cube(std::size_t gamma) const { return cubes_[gamma]; }

  /// True when the truncated modulation range is a full period of the grid torus.
  bool exactly_tight() const { return grid_.commensurate_with(index_.M); }

  GridFunction frame_vector(std::size_t gamma, std::size_t m) const;
  /// Throws TruncationError when more than `truncation_tol` of ||f||^2 lies outside the covered cubes.
  FrameCoefficients analyze(const GridFunction& f, double truncation_tol = 1e-8) const;
  GridFunction synthesize(const FrameCoefficients& c) const;

  /// Cube samples x all modulations: (points x modulation_count), includes weight.
  Eigen::MatrixXcd synthesis_block(std::size_t gamma) const;
  /// Same without window and phase: e^{i m.(x - gamma)}.
  Eigen::MatrixXcd modulation_block(std::size_t gamma) const;
  /// sum over covered gamma of g(x - gamma)^2 at every grid point.
  Eigen::VectorXd coverage() const;

 private:
  Grid grid_;
  Window window_;
  FrameIndexSet index_;
  std::optional<PhaseFn> phase_;
  int workers_;
  std::vector<Cube> cubes_;
};

/// Applies per-axis matrices to a tensor with lexicographic layout.
Eigen::VectorXcd apply_separable(const Eigen::VectorXcd& in, const MultiIndex& shape, int dim,
                                 const std::array<const Eigen::MatrixXcd*, kMaxDim>& mats);

CoefficientDecayReport coefficient_decay_report(const FrameCoefficients& c, const CoefficientDecayOptions& opt = {});

}  // namespace beals
