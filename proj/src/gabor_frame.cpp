#include "beals/gabor_frame.hpp"

#include <cmath>
#include <sstream>

#include "beals/parallel.hpp"

namespace beals {

FrameIndexSet::FrameIndexSet(int dim_, int Gamma_, int M_) : dim(dim_), Gamma(Gamma_), M(M_) {
  if (dim < 1 || dim > kMaxDim) throw DimensionError("frame dimension must be in [1, 3]");
  if (Gamma < 0 || M < 0) throw DomainError("frame truncations must be non-negative");
}

namespace {

MultiIndex unflatten_centered(std::size_t flat, int dim, int half) {
  MultiIndex idx{};
  const int side = 2 * half + 1;
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % side) - half;
    flat /= side;
  }
  return idx;
}

std::size_t flatten_centered(const MultiIndex& idx, int dim, int half) {
  std::size_t flat = 0;
  for (int a = 0; a < dim; ++a) flat = flat * (2 * half + 1) + (idx[a] + half);
  return flat;
}

}  // namespace

MultiIndex FrameIndexSet::gamma(std::size_t flat) const { return unflatten_centered(flat, dim, Gamma); }
MultiIndex FrameIndexSet::modulation(std::size_t flat) const { return unflatten_centered(flat, dim, M); }
std::size_t FrameIndexSet::gamma_flat(const MultiIndex& g) const { return flatten_centered(g, dim, Gamma); }
std::size_t FrameIndexSet::modulation_flat(const MultiIndex& m) const { return flatten_centered(m, dim, M); }

Point FrameIndexSet::gamma_point(std::size_t flat) const {
  const auto g = gamma(flat);
  Point p(dim);
  for (int a = 0; a < dim; ++a) p[a] = g[a];
  return p;
}

Point FrameIndexSet::modulation_point(std::size_t flat) const {
  const auto m = modulation(flat);
  Point p(dim);
  for (int a = 0; a < dim; ++a) p[a] = m[a];
  return p;
}

Eigen::VectorXcd apply_separable(const Eigen::VectorXcd& in, const MultiIndex& shape, int dim,
                                 const std::array<const Eigen::MatrixXcd*, kMaxDim>& mats) {
  using RowMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::VectorXcd cur = in;
  MultiIndex sh = shape;
  for (int a = 0; a < dim; ++a) {
    const Eigen::MatrixXcd& A = *mats[a];
    if (A.cols() != sh[a]) throw DimensionError("separable transform: axis length mismatch");
    Eigen::Index outer = 1, inner = 1;
    for (int b = 0; b < a; ++b) outer *= sh[b];
    for (int b = a + 1; b < dim; ++b) inner *= sh[b];
    Eigen::VectorXcd next(outer * A.rows() * inner);
    for (Eigen::Index o = 0; o < outer; ++o) {
      Eigen::Map<const RowMat> src(cur.data() + o * sh[a] * inner, sh[a], inner);
      Eigen::Map<RowMat> dst(next.data() + o * A.rows() * inner, A.rows(), inner);
      dst.noalias() = A * src;
    }
    sh[a] = static_cast<int>(A.rows());
    cur.swap(next);
  }
  return cur;
}

GaborFrame::GaborFrame(Grid grid, Window window, FrameIndexSet index, std::optional<PhaseFn> phase, int workers)
    : grid_(grid), window_(window), index_(index), phase_(std::move(phase)), workers_(std::max(1, workers)) {
  const int d = grid_.dim;
  if (window_.dim() != d || index_.dim != d) throw DimensionError("frame: grid, window and index dimensions differ");
  const double h = grid_.h();
  if (index_.M > kPi / h)
    throw GridError("modulation truncation M exceeds the grid Nyquist limit pi/h");
  const double r = window_.support_half_width();
  if (index_.Gamma + r > grid_.L + 1e-12) {
    std::ostringstream msg;
    msg << "frame support exceeds grid box: Gamma + " << r << " > L = " << grid_.L;
    throw GridError(msg.str());
  }
  const double norm = std::pow(kTwoPi, -0.5 * d);
  cubes_.resize(index_.gamma_count());
  parallel_for(cubes_.size(), workers_, [&](std::size_t gi) {
    Cube& c = cubes_[gi];
    const auto g = index_.gamma(gi);
    std::size_t count = 1;
    for (int a = 0; a < d; ++a) {
      int lo = std::max(0, static_cast<int>(std::floor((g[a] - r + grid_.L) / h)));
      while (lo < grid_.N && grid_.coord(lo) - g[a] <= -r) ++lo;
      int hi = lo;
      while (hi < grid_.N && grid_.coord(hi) - g[a] < r) ++hi;
      c.lo[a] = lo;
      c.n[a] = hi - lo;
      count *= c.n[a];
      c.modulation[a].resize(index_.modulation_side(), c.n[a]);
      for (int mi = 0; mi < index_.modulation_side(); ++mi)
        for (int k = 0; k < c.n[a]; ++k)
          c.modulation[a](mi, k) = std::polar(1.0, (mi - index_.M) * (grid_.coord(lo + k) - g[a]));
    }
    c.points.resize(count);
    c.window.resize(static_cast<Eigen::Index>(count));
    c.weight.resize(static_cast<Eigen::Index>(count));
    const Point gp = index_.gamma_point(gi);
    for (std::size_t p = 0; p < count; ++p) {
      MultiIndex idx{};
      std::size_t rem = p;
      for (int a = d - 1; a >= 0; --a) {
        idx[a] = c.lo[a] + static_cast<int>(rem % c.n[a]);
        rem /= c.n[a];
      }
      c.points[p] = grid_.flatten(idx);
      const Point x = grid_.point(c.points[p]);
      const double gv = window_(x - gp);
      c.window[static_cast<Eigen::Index>(p)] = gv;
      const double ph = phase_ ? (*phase_)(x, gp) : 0.0;
      c.weight[static_cast<Eigen::Index>(p)] = norm * gv * std::polar(1.0, ph);
    }
  });
}

Eigen::MatrixXcd GaborFrame::modulation_block(std::size_t gamma) const {
  const Cube& c = cubes_[gamma];
  const int d = grid_.dim;
  const auto nm = static_cast<Eigen::Index>(index_.modulation_count());
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(c.points.size()), nm);
  const int side = index_.modulation_side();
  for (Eigen::Index p = 0; p < out.rows(); ++p) {
    MultiIndex k{};
    std::size_t rem = static_cast<std::size_t>(p);
    for (int a = d - 1; a >= 0; --a) {
      k[a] = static_cast<int>(rem % c.n[a]);
      rem /= c.n[a];
    }
    for (Eigen::Index q = 0; q < nm; ++q) {
      std::size_t mr = static_cast<std::size_t>(q);
      Complex v = 1.0;
      for (int a = d - 1; a >= 0; --a) {
        v *= c.modulation[a](static_cast<Eigen::Index>(mr % side), k[a]);
        mr /= side;
      }
      out(p, q) = v;
    }
  }
  return out;
}

Eigen::MatrixXcd GaborFrame::synthesis_block(std::size_t gamma) const {
  return cubes_[gamma].weight.asDiagonal() * modulation_block(gamma);
}

GridFunction GaborFrame::frame_vector(std::size_t gamma, std::size_t m) const {
  if (gamma >= index_.gamma_count() || m >= index_.modulation_count())
    throw DomainError("frame_vector: index out of range");
  const Cube& c = cubes_[gamma];
  const auto mi = index_.modulation(m);
  GridFunction out(grid_);
  for (std::size_t p = 0; p < c.points.size(); ++p) {
    const auto idx = grid_.unflatten(c.points[p]);
    Complex v = c.weight[static_cast<Eigen::Index>(p)];
    for (int a = 0; a < grid_.dim; ++a) v *= c.modulation[a](mi[a] + index_.M, idx[a] - c.lo[a]);
    out[c.points[p]] = v;
  }
  return out;
}

Eigen::VectorXd GaborFrame::coverage() const {
  Eigen::VectorXd cov = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_.size()));
  for (const Cube& c : cubes_)
    for (std::size_t p = 0; p < c.points.size(); ++p) {
      const double g = c.window[static_cast<Eigen::Index>(p)];
      cov[static_cast<Eigen::Index>(c.points[p])] += g * g;
    }
  return cov;
}

FrameCoefficients GaborFrame::analyze(const GridFunction& f, double truncation_tol) const {
  if (!(f.grid() == grid_)) throw DimensionError("analyze: function grid does not match frame grid");
  FrameCoefficients out;
  out.index = index_;
  const double total = f.values().squaredNorm();
  if (total > 0.0) {
    const Eigen::VectorXd cov = coverage();
    double missing = 0.0;
    for (Eigen::Index i = 0; i < cov.size(); ++i) missing += std::norm(f.values()[i]) * std::max(0.0, 1.0 - cov[i]);
    out.uncovered_fraction = missing / total;
  }
  out.edge_magnitude = f.edge_magnitude();
  if (out.edge_magnitude > 1e-8) {
    std::ostringstream msg;
    msg << "function magnitude " << out.edge_magnitude << " at the box edge exceeds 1e-8";
    out.warnings.push_back(msg.str());
  }
  if (out.uncovered_fraction > truncation_tol) {
    std::ostringstream msg;
    msg << "frame truncation Gamma = " << index_.Gamma << " leaves a fraction " << out.uncovered_fraction
        << " of ||f||^2 uncovered (tolerance " << truncation_tol << ")";
    throw TruncationError(msg.str());
  }
  const auto nm = static_cast<Eigen::Index>(index_.modulation_count());
  out.values.resize(static_cast<Eigen::Index>(index_.gamma_count()), nm);
  const double w = grid_.weight();
  parallel_for(cubes_.size(), workers_, [&](std::size_t gi) {
    const Cube& c = cubes_[gi];
    Eigen::VectorXcd u(static_cast<Eigen::Index>(c.points.size()));
    for (std::size_t p = 0; p < c.points.size(); ++p)
      u[static_cast<Eigen::Index>(p)] = std::conj(c.weight[static_cast<Eigen::Index>(p)]) * f[c.points[p]];
    std::array<Eigen::MatrixXcd, kMaxDim> conj_mod;
    std::array<const Eigen::MatrixXcd*, kMaxDim> mats{};
    for (int a = 0; a < grid_.dim; ++a) {
      conj_mod[a] = c.modulation[a].conjugate();
      mats[a] = &conj_mod[a];
    }
    out.values.row(static_cast<Eigen::Index>(gi)) = w * apply_separable(u, c.n, grid_.dim, mats).transpose();
  });
  return out;
}

GridFunction GaborFrame::synthesize(const FrameCoefficients& c) const {
  if (!(c.index == index_) || c.values.rows() != static_cast<Eigen::Index>(index_.gamma_count()) ||
      c.values.cols() != static_cast<Eigen::Index>(index_.modulation_count()))
    throw DimensionError("synthesize: coefficient shape does not match frame index set");
  std::vector<Eigen::VectorXcd> parts(cubes_.size());
  MultiIndex mshape{};
  for (int a = 0; a < grid_.dim; ++a) mshape[a] = index_.modulation_side();
  parallel_for(cubes_.size(), workers_, [&](std::size_t gi) {
    const Cube& cube = cubes_[gi];
    std::array<Eigen::MatrixXcd, kMaxDim> trans;
    std::array<const Eigen::MatrixXcd*, kMaxDim> mats{};
    for (int a = 0; a < grid_.dim; ++a) {
      trans[a] = cube.modulation[a].transpose();
      mats[a] = &trans[a];
    }
    const Eigen::VectorXcd row = c.values.row(static_cast<Eigen::Index>(gi)).transpose();
    parts[gi] = cube.weight.cwiseProduct(apply_separable(row, mshape, grid_.dim, mats));
  });
  // Deterministic accumulation order.
  GridFunction out(grid_);
  for (std::size_t gi = 0; gi < cubes_.size(); ++gi)
    for (std::size_t p = 0; p < cubes_[gi].points.size(); ++p)
      out[cubes_[gi].points[p]] += parts[gi][static_cast<Eigen::Index>(p)];
  return out;
}

CoefficientDecayReport coefficient_decay_report(const FrameCoefficients& c, const CoefficientDecayOptions& opt) {
  const double peak = c.values.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) throw DomainError("coefficient_decay_report: all coefficients are zero");
  const auto& idx = c.index;
  CoefficientDecayReport rep;
  rep.modulation_shell_max.assign(idx.M + 1, 0.0);
  rep.gamma_shell_max.assign(idx.Gamma + 1, 0.0);
  for (Eigen::Index gi = 0; gi < c.values.rows(); ++gi) {
    const int gs = static_cast<int>(idx.gamma_point(static_cast<std::size_t>(gi)).norm_inf());
    for (Eigen::Index mi = 0; mi < c.values.cols(); ++mi) {
      const int ms = static_cast<int>(idx.modulation_point(static_cast<std::size_t>(mi)).norm_inf());
      const double v = std::abs(c.values(gi, mi));
      rep.modulation_shell_max[ms] = std::max(rep.modulation_shell_max[ms], v);
      rep.gamma_shell_max[gs] = std::max(rep.gamma_shell_max[gs], v);
    }
  }
  const double floor = opt.floor_rel * peak;
  rep.modulation_fit = fit_shell_decay(rep.modulation_shell_max, opt.fit_lo, opt.fit_hi, floor);
  rep.gamma_fit = fit_shell_decay(rep.gamma_shell_max, 1, idx.Gamma, floor);
  rep.modulation_constants = envelope_constants(rep.modulation_shell_max, 4);
  rep.slow_decay = !rep.modulation_fit.floor_reached && rep.modulation_fit.exponent < opt.slow_threshold;
  return rep;
}

}  // namespace beals
