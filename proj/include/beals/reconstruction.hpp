#pragma once

#include <map>
#include <optional>
#include <tuple>
#include <string>
#include <vector>

#include "beals/magnetic_geometry.hpp"
#include "beals/matrix_elements.hpp"
#include "beals/symbol.hpp"

namespace beals {

struct RegularizationSchedule {
  enum class Extrapolation { None, Last, Richardson };

  std::vector<double> eps{0.2, 0.1, 0.05, 0.025, 0.0};
  Extrapolation policy = Extrapolation::Richardson;

  static Extrapolation parse_policy(const std::string& name);
  static std::string policy_name(Extrapolation p);
  /// Strictly positive entries, in schedule order.
  std::vector<double> positive() const;
  bool includes_zero() const;
};

/// (2pi)^{-d} int e^{-i zeta.s} g(tau + (s - kappa')/2) g(tau - (s - kappa')/2) ds,
/// trapezoid on the support with `nodes` points per axis.
Complex window_cross_spectrum(const Window& w, const Point& tau, const Point& zeta, const Point& kappa_prime,
                              int nodes = 1024);

/// One axis of the same integral with s restricted to the lattice 2h Z (weight 2h).
/// This is the form the grid reconstruction uses when t is a grid point.
Complex window_cross_spectrum_lattice(const Window& w, double tau, double zeta, double kappa_prime, double h);

/// Pointwise T_eps(t + s/2, t - s/2) summed directly over the stored blocks; eps must be > 0.
Complex regularized_kernel(const MatrixElements& M, const GaborFrame& frame, double eps, const Point& t,
                           const Point& s);

struct ExtractOptions {
  double tail_tolerance = 1e-2;  // realized n-tail bound above this raises TruncationError
  bool check_tail = true;
};

struct ReconstructionResult {
  std::vector<double> eps;     // grid-path regularizations (0 allowed when forced)
  std::vector<Symbol> a_eps;   // same order as eps
  std::optional<Symbol> a0;    // reorganized eps = 0 series
  double tail_bound = 0.0;     // sup of the outermost n-shell contribution to a0
  std::string zero_path;       // "cross-spectrum" or "flux"
};

/// Accumulates blocks into every requested reconstruction at once, so large tensors can be streamed.
class SymbolReconstructor {
 public:
  /// `out.t_axis` must consist of grid coordinates. `pe` is required iff the frame is magnetic.
  SymbolReconstructor(const GaborFrame& frame, PhaseSpaceGrid out, const PhaseEvaluator* pe,
                      std::vector<double> grid_eps, bool zero_path, ExtractOptions opt = {});

  /// Pairs that can contribute at the output t values.
  PairSelection needed_pairs(int band = -1) const;
  void add_block(std::size_t g, std::size_t gp, const Eigen::MatrixXcd& T);
  ReconstructionResult finish() const;

 private:
  void add_grid_path(std::size_t slot, double eps, std::size_t g, std::size_t gp, const Eigen::MatrixXcd& T);
  void add_flux_path(std::size_t g, std::size_t gp, const Eigen::MatrixXcd& T);
  void add_cross_spectrum_path(std::size_t g, std::size_t gp, const Eigen::MatrixXcd& T);
  Symbol extract_from_kernel(const Eigen::MatrixXcd& kernel, bool strip_phase) const;
  int output_t_index(std::size_t row, std::size_t col) const;

  const GaborFrame& frame_;
  PhaseSpaceGrid out_;
  const PhaseEvaluator* pe_;
  std::vector<double> grid_eps_;
  bool zero_path_;
  ExtractOptions opt_;
  std::vector<int> axis_map_;  // grid index -> output t axis index, or -1
  std::vector<Eigen::MatrixXcd> kernels_;
  Eigen::MatrixXcd stripped_;  // flux path
  SymbolMatrix a0_;            // cross-spectrum path
  SymbolMatrix a0_tail_;
  Eigen::MatrixXcd stripped_tail_;  // flux path, outermost n shell only
  std::map<std::tuple<int, int, int>, Eigen::MatrixXcd> fcache_;
};

/// Single-regularization convenience wrapper over SymbolReconstructor.
/// eps > 0 uses the regularized kernel; eps = 0 the reorganized series (or the grid path when forced).
Symbol extract_symbol(const MatrixElements& M, const GaborFrame& frame, double eps, const PhaseSpaceGrid& out,
                      const PhaseEvaluator* pe = nullptr, const ExtractOptions& opt = {}, bool force_grid_path = false,
                      double* tail_bound = nullptr);

struct RoundtripError {
  double sup = 0.0;
  double sup_dt = 0.0;   // first differences along t axes
  double sup_dxi = 0.0;  // first differences along xi axes
  std::size_t points = 0;
};

/// Sup of |a_out - a_in| (and of their first differences) over t in t_box, xi in xi_box.
RoundtripError roundtrip_error(const Symbol& a_in, const Symbol& a_out, const Box& t_box, const Box& xi_box);

/// Richardson value on the two smallest positive eps, assuming a_eps = a_0 + c eps + ...
Symbol richardson(const Symbol& a_small, double eps_small, const Symbol& a_large, double eps_large);

}  // namespace beals
