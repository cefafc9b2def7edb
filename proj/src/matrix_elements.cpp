#include "beals/matrix_elements.hpp"

#include <sstream>

#include "beals/parallel.hpp"

namespace beals {

bool PairSelection::accepts(const Point& g, const Point& gp) const {
  if (band >= 0 && (g - gp).norm_inf() > band + 1e-12) return false;
  if (kappa_max >= 0.0 && (0.5 * (g + gp)).norm_inf() >= kappa_max - 1e-12) return false;
  return true;
}

MatrixElements::MatrixElements(FrameIndexSet index, bool magnetic) : index_(index), magnetic_(magnetic) {}

void MatrixElements::set_block(std::size_t g, std::size_t gp, Eigen::MatrixXcd block) {
  const auto nm = static_cast<Eigen::Index>(index_.modulation_count());
  if (block.rows() != nm || block.cols() != nm) throw DimensionError("matrix element block has the wrong shape");
  if (g >= index_.gamma_count() || gp >= index_.gamma_count()) throw DomainError("matrix element pair out of range");
  blocks_[{g, gp}] = std::move(block);
}

const Eigen::MatrixXcd* MatrixElements::block(std::size_t g, std::size_t gp) const {
  const auto it = blocks_.find({g, gp});
  return it == blocks_.end() ? nullptr : &it->second;
}

Complex MatrixElements::at(std::size_t g, std::size_t gp, std::size_t m, std::size_t mp) const {
  const auto* b = block(g, gp);
  return b ? (*b)(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(mp)) : Complex(0.0);
}

std::vector<std::pair<std::size_t, std::size_t>> MatrixElements::pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& kv : blocks_) out.push_back(kv.first);
  return out;
}

double MatrixElements::max_abs() const {
  double m = 0.0;
  for (const auto& kv : blocks_) m = std::max(m, kv.second.cwiseAbs().maxCoeff());
  return m;
}

void for_each_matrix_block(const OperatorKernel& K, const GaborFrame& frame, const PairSelection& sel,
                           const BlockSink& sink) {
  if (!(K.grid == frame.grid())) throw DimensionError("matrix_elements: kernel and frame grids differ");
  const auto& idx = frame.index();
  const std::size_t G = idx.gamma_count();
  const double w = K.weight();
  std::vector<Eigen::MatrixXcd> synth(G);
  for (std::size_t g = 0; g < G; ++g) synth[g] = frame.synthesis_block(g);
  for (std::size_t gp = 0; gp < G; ++gp) {
    std::vector<std::size_t> rows;
    for (std::size_t g = 0; g < G; ++g)
      if (sel.accepts(idx.gamma_point(g), idx.gamma_point(gp))) rows.push_back(g);
    if (rows.empty()) continue;
    const auto& cols = frame.cube(gp).points;
    std::vector<Eigen::Index> ci(cols.begin(), cols.end());
    // h^d K G_{gamma', m'} for every m'.
    const Eigen::MatrixXcd Y = w * (K.K(Eigen::all, ci) * synth[gp]);
    std::vector<Eigen::MatrixXcd> blocks(rows.size());
    parallel_for(rows.size(), frame.workers(), [&](std::size_t r) {
      const auto& pts = frame.cube(rows[r]).points;
      std::vector<Eigen::Index> ri(pts.begin(), pts.end());
      blocks[r] = w * (synth[rows[r]].adjoint() * Y(ri, Eigen::all));
    });
    for (std::size_t r = 0; r < rows.size(); ++r) sink(rows[r], gp, blocks[r]);
  }
}

double kernel_truncation_mass(const OperatorKernel& K, const GaborFrame& frame) {
  const Eigen::VectorXd c = frame.coverage();
  double total = 0.0, missing = 0.0;
  for (Eigen::Index col = 0; col < K.K.cols(); ++col)
    for (Eigen::Index row = 0; row < K.K.rows(); ++row) {
      const double v = std::norm(K.K(row, col));
      total += v;
      missing += v * std::max(0.0, 1.0 - c[row] * c[col]);
    }
  return total > 0.0 ? missing / total : 0.0;
}

MatrixElements matrix_elements(const OperatorKernel& K, const GaborFrame& frame, const PairSelection& sel,
                               const MatrixElementOptions& opt) {
  MatrixElements out(frame.index(), frame.magnetic());
  out.truncation_mass = kernel_truncation_mass(K, frame);
  if (opt.strict && out.truncation_mass > opt.truncation_tol) {
    std::ostringstream msg;
    msg << "matrix_elements: kernel mass outside the covered cubes is " << out.truncation_mass << " (tolerance "
        << opt.truncation_tol << ")";
    throw TruncationError(msg.str());
  }
  for_each_matrix_block(K, frame, sel, [&](std::size_t g, std::size_t gp, const Eigen::MatrixXcd& b) {
    out.set_block(g, gp, b);
  });
  return out;
}

double DecayReport::modulation_ratio(int k) const {
  if (k < 0 || k >= static_cast<int>(modulation_shell_max.size()) || modulation_shell_max[0] == 0.0) return 0.0;
  return modulation_shell_max[k] / modulation_shell_max[0];
}

DecayAccumulator::DecayAccumulator(const FrameIndexSet& index) : index_(index) {
  joint_.assign(4 * index.Gamma + 1, std::vector<double>(4 * index.M + 1, 0.0));
  const std::size_t nm = index.modulation_count();
  mod_shell_.assign(nm, std::vector<int>(nm, 0));
  for (std::size_t a = 0; a < nm; ++a)
    for (std::size_t b = 0; b < nm; ++b)
      mod_shell_[a][b] = static_cast<int>((index.modulation_point(a) - index.modulation_point(b)).norm_inf());
}

void DecayAccumulator::add_block(std::size_t g, std::size_t gp, const Eigen::MatrixXcd& block) {
  const int j = static_cast<int>((index_.gamma_point(g) - index_.gamma_point(gp)).norm_inf());
  auto& row = joint_[j];
  for (Eigen::Index b = 0; b < block.cols(); ++b)
    for (Eigen::Index a = 0; a < block.rows(); ++a) {
      const int k = mod_shell_[a][b];
      row[k] = std::max(row[k], std::abs(block(a, b)));
    }
}

DecayReport DecayAccumulator::finish(const DecayOptions& opt) const {
  DecayReport rep;
  rep.joint_shell_max = joint_;
  const std::size_t nj = joint_.size(), nk = joint_[0].size();
  rep.gamma_shell_max.assign(nj, 0.0);
  rep.modulation_shell_max.assign(nk, 0.0);
  for (std::size_t j = 0; j < nj; ++j)
    for (std::size_t k = 0; k < nk; ++k) {
      rep.gamma_shell_max[j] = std::max(rep.gamma_shell_max[j], joint_[j][k]);
      rep.modulation_shell_max[k] = std::max(rep.modulation_shell_max[k], joint_[j][k]);
      rep.peak = std::max(rep.peak, joint_[j][k]);
    }
  if (!(rep.peak > 0.0)) throw DomainError("decay_report: all matrix elements are zero");
  const double floor = opt.floor_rel * rep.peak;
  rep.modulation_fit = fit_shell_decay(rep.modulation_shell_max, opt.fit_lo, opt.fit_hi, floor);
  rep.gamma_fit = fit_shell_decay(rep.gamma_shell_max, opt.fit_lo, opt.fit_hi, floor);
  rep.constants.assign(5, std::vector<double>(5, 0.0));
  for (int N = 0; N <= 4; ++N)
    for (int Mx = 0; Mx <= 4; ++Mx)
      for (std::size_t j = 0; j < nj; ++j)
        for (std::size_t k = 0; k < nk; ++k)
          rep.constants[N][Mx] = std::max(rep.constants[N][Mx], joint_[j][k] * std::pow(bracket(double(j)), N) *
                                                                   std::pow(bracket(double(k)), Mx));
  rep.outside_hypotheses = !rep.modulation_fit.floor_reached && !(rep.modulation_fit.exponent >= opt.flag_threshold);
  return rep;
}

DecayReport decay_report(const MatrixElements& M, const DecayOptions& opt) {
  DecayAccumulator acc(M.index());
  M.for_each_block([&](std::size_t g, std::size_t gp, const Eigen::MatrixXcd& b) { acc.add_block(g, gp, b); });
  return acc.finish(opt);
}

void BoundChecker::add_block(std::size_t, std::size_t, const Eigen::MatrixXcd& block) {
  const double limit = bound_ * (1.0 + margin_);
  for (Eigen::Index b = 0; b < block.cols(); ++b)
    for (Eigen::Index a = 0; a < block.rows(); ++a) {
      const double v = std::abs(block(a, b));
      ++checked_;
      if (v > limit) ++violations_;
      if (bound_ > 0.0) max_ratio_ = std::max(max_ratio_, v / bound_);
    }
}

double matrix_element_bound(const GaborFrame& frame, double operator_norm) {
  // Grid norm of the window, so Cauchy-Schwarz holds exactly at the discrete level.
  double g2 = 0.0;
  for (std::size_t g = 0; g < frame.index().gamma_count(); ++g)
    g2 = std::max(g2, frame.grid().weight() * frame.cube(g).window.squaredNorm());
  return std::pow(kTwoPi, -frame.grid().dim) * g2 * operator_norm;
}

}  // namespace beals
