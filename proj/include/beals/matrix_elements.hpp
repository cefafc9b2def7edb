#pragma once

#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "beals/decay.hpp"
#include "beals/gabor_frame.hpp"
#include "beals/weyl.hpp"

namespace beals {

/// Which (gamma, gamma') blocks to compute.
struct PairSelection {
  int band = -1;            // keep |gamma - gamma'|_inf <= band; negative keeps all
  double kappa_max = -1.0;  // keep |(gamma + gamma')/2|_inf < kappa_max; negative keeps all

  bool accepts(const Point& g, const Point& gp) const;
};

/// Blocks T_{gamma,gamma'}(m, m') = <G_{gamma,m}, T G_{gamma',m'}>; rows m, columns m'.
class MatrixElements {
 public:
  MatrixElements() = default;
  MatrixElements(FrameIndexSet index, bool magnetic);

  const FrameIndexSet& index() const { return index_; }
  bool magnetic() const { return magnetic_; }

  void set_block(std::size_t g, std::size_t gp, Eigen::MatrixXcd block);
  /// nullptr when the pair was not computed (treated as zero).
  const Eigen::MatrixXcd* block(std::size_t g, std::size_t gp) const;
  Complex at(std::size_t g, std::size_t gp, std::size_t m, std::size_t mp) const;
  std::vector<std::pair<std::size_t, std::size_t>> pairs() const;
  std::size_t block_count() const { return blocks_.size(); }
  double max_abs() const;

  template <class F>
  void for_each_block(F&& f) const {
    for (const auto& [key, b] : blocks_) f(key.first, key.second, b);
  }

  /// Share of sum |K|^2 outside the covered cubes, filled by matrix_elements.
  double truncation_mass = 0.0;

 private:
  FrameIndexSet index_;
  bool magnetic_ = false;
  std::map<std::pair<std::size_t, std::size_t>, Eigen::MatrixXcd> blocks_;
};

using BlockSink = std::function<void(std::size_t g, std::size_t gp, const Eigen::MatrixXcd& block)>;

/// Streams every selected block to `sink`, gamma' outer, gamma inner, in index order.
void for_each_matrix_block(const OperatorKernel& K, const GaborFrame& frame, const PairSelection& sel,
                           const BlockSink& sink);

/// sum |K(x,x')|^2 (1 - c(x) c(x')) / sum |K|^2 with c the frame coverage.
double kernel_truncation_mass(const OperatorKernel& K, const GaborFrame& frame);

struct MatrixElementOptions {
  double truncation_tol = 1e-6;
  bool strict = true;  // throw TruncationError when the mass exceeds the tolerance
};

MatrixElements matrix_elements(const OperatorKernel& K, const GaborFrame& frame, const PairSelection& sel = {},
                               const MatrixElementOptions& opt = {});

/// Shell statistics of a tensor: j = |gamma - gamma'|_inf, k = |m - m'|_inf.
struct DecayReport {
  std::vector<double> gamma_shell_max;
  std::vector<double> modulation_shell_max;
  std::vector<std::vector<double>> joint_shell_max;  // [j][k]
  ShellFit gamma_fit;
  ShellFit modulation_fit;
  std::vector<std::vector<double>> constants;  // C_{N,M}, N, M = 0..4
  bool outside_hypotheses = false;             // modulation exponent below threshold
  double peak = 0.0;

  /// shell k max over shell 0 max.
  double modulation_ratio(int k) const;
};

struct DecayOptions {
  int fit_lo = 2;
  int fit_hi = 12;
  double floor_rel = 1e-13;
  double flag_threshold = 1.5;
};

/// Incremental version for streamed blocks.
class DecayAccumulator {
 public:
  explicit DecayAccumulator(const FrameIndexSet& index);
  void add_block(std::size_t g, std::size_t gp, const Eigen::MatrixXcd& block);
  DecayReport finish(const DecayOptions& opt = {}) const;

 private:
  FrameIndexSet index_;
  std::vector<std::vector<double>> joint_;
  std::vector<std::vector<int>> mod_shell_;  // |m - m'|_inf per (m, m')
};

DecayReport decay_report(const MatrixElements& M, const DecayOptions& opt = {});

/// Counts entries above (2pi)^{-d} ||g||^2 ||T|| (1 + margin).
class BoundChecker {
 public:
  BoundChecker(double bound, double margin = 1e-6) : bound_(bound), margin_(margin) {}
  void add_block(std::size_t g, std::size_t gp, const Eigen::MatrixXcd& block);
  double bound() const { return bound_; }
  std::size_t violations() const { return violations_; }
  std::size_t checked() const { return checked_; }
  double max_ratio() const { return max_ratio_; }

 private:
  double bound_;
  double margin_;
  std::size_t violations_ = 0;
  std::size_t checked_ = 0;
  double max_ratio_ = 0.0;
};

/// (2pi)^{-d} ||g||^2 ||T||.
double matrix_element_bound(const GaborFrame& frame, double operator_norm);

}  // namespace beals
