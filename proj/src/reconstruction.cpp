#include "beals/reconstruction.hpp"

#include <map>
#include <sstream>
#include <tuple>

namespace beals {

namespace {

double rounded_index(double x, double L, double h) { return (x + L) / h; }

// Flat index over per-axis lists with lexicographic order.
template <class F>
void for_each_combo(int d, const std::array<std::vector<int>, kMaxDim>& lists, F&& f) {
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= lists[a].size();
  std::array<int, kMaxDim> pick{};
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t r = c;
    for (int a = d - 1; a >= 0; --a) {
      pick[a] = lists[a][r % lists[a].size()];
      r /= lists[a].size();
    }
    f(pick);
  }
}

}  // namespace

RegularizationSchedule::Extrapolation RegularizationSchedule::parse_policy(const std::string& name) {
  if (name == "none") return Extrapolation::None;
  if (name == "last") return Extrapolation::Last;
  if (name == "richardson") return Extrapolation::Richardson;
  throw DomainError("unknown extrapolation policy '" + name + "'");
}

std::string RegularizationSchedule::policy_name(Extrapolation p) {
  switch (p) {
    case Extrapolation::None: return "none";
    case Extrapolation::Last: return "last";
    case Extrapolation::Richardson: return "richardson";
  }
  return "none";
}

std::vector<double> RegularizationSchedule::positive() const {
  std::vector<double> out;
  for (double e : eps) {
    if (e < 0.0 || !std::isfinite(e)) throw DomainError("regularization parameters must be finite and >= 0");
    if (e > 0.0) out.push_back(e);
  }
  return out;
}

bool RegularizationSchedule::includes_zero() const {
  return std::find(eps.begin(), eps.end(), 0.0) != eps.end();
}

Complex window_cross_spectrum(const Window& w, const Point& tau, const Point& zeta, const Point& kappa_prime,
                              int nodes) {
  const int d = w.dim();
  if (tau.dim() != d || zeta.dim() != d || kappa_prime.dim() != d)
    throw DimensionError("window_cross_spectrum: dimension mismatch");
  if (!tau.is_finite() || !zeta.is_finite() || !kappa_prime.is_finite())
    throw DomainError("window_cross_spectrum: non-finite argument");
  const double r = w.support_half_width();
  Complex total = 1.0;
  for (int a = 0; a < d; ++a) {
    // u = s - kappa'; the product is supported in |u| < 2 (r - |tau|).
    const double half = 2.0 * (r - std::abs(tau[a]));
    if (half <= 0.0) return 0.0;
    const double du = 2.0 * half / (nodes - 1);
    Complex acc = 0.0;
    for (int i = 1; i < nodes - 1; ++i) {
      const double u = -half + i * du;
      acc += std::polar(w.value1d(tau[a] + 0.5 * u) * w.value1d(tau[a] - 0.5 * u), -zeta[a] * u);
    }
    total *= acc * du / kTwoPi * std::polar(1.0, -zeta[a] * kappa_prime[a]);
  }
  return total;
}

Complex window_cross_spectrum_lattice(const Window& w, double tau, double zeta, double kappa_prime, double h) {
  const double r = w.support_half_width();
  const double lo = std::max(0.5 * kappa_prime - tau - r, tau + 0.5 * kappa_prime - r);
  const double hi = std::min(0.5 * kappa_prime - tau + r, tau + 0.5 * kappa_prime + r);
  if (lo >= hi) return 0.0;
  Complex acc = 0.0;
  for (long k = static_cast<long>(std::ceil(lo / h)); k * h <= hi; ++k) {
    const double v = w.value1d(tau + k * h - 0.5 * kappa_prime) * w.value1d(tau - k * h + 0.5 * kappa_prime);
    if (v != 0.0) acc += std::polar(v, -zeta * 2.0 * h * k);
  }
  return acc * (2.0 * h / kTwoPi);
}

Complex regularized_kernel(const MatrixElements& M, const GaborFrame& frame, double eps, const Point& t,
                           const Point& s) {
  if (!(eps > 0.0)) throw DomainError("regularized_kernel: eps must be > 0; use extract_symbol for eps = 0");
  const auto& idx = M.index();
  const int d = idx.dim;
  const Point x = t + 0.5 * s, xp = t - 0.5 * s;
  const std::size_t nm = idx.modulation_count();
  Complex total = 0.0;
  M.for_each_block([&](std::size_t g, std::size_t gp, const Eigen::MatrixXcd& T) {
    const Point gam = idx.gamma_point(g), gamp = idx.gamma_point(gp);
    if ((0.5 * (gam + gamp) - t).norm_inf() >= 1.0) return;
    const double wg = frame.window()(x - gam) * frame.window()(xp - gamp);
    if (wg == 0.0) return;
    Eigen::VectorXcd u(static_cast<Eigen::Index>(nm)), v(static_cast<Eigen::Index>(nm));
    for (std::size_t m = 0; m < nm; ++m) {
      const Point mm = idx.modulation_point(m);
      const double damp = std::exp(-eps * mm.dot(mm));
      u[static_cast<Eigen::Index>(m)] = std::polar(damp, mm.dot(x - gam));
      v[static_cast<Eigen::Index>(m)] = std::polar(damp, -mm.dot(xp - gamp));
    }
    Complex term = wg * (u.transpose() * T * v)(0, 0);
    if (frame.magnetic()) term *= std::polar(1.0, (*frame.phase())(x, gam) - (*frame.phase())(xp, gamp));
    total += term;
  });
  return total * std::pow(kTwoPi, -d);
}

SymbolReconstructor::SymbolReconstructor(const GaborFrame& frame, PhaseSpaceGrid out, const PhaseEvaluator* pe,
                                         std::vector<double> grid_eps, bool zero_path, ExtractOptions opt)
    : frame_(frame), out_(std::move(out)), pe_(pe), grid_eps_(std::move(grid_eps)), zero_path_(zero_path), opt_(opt) {
  const Grid& grid = frame_.grid();
  const int d = grid.dim;
  if (out_.dim != d) throw DimensionError("reconstruction: output grid dimension mismatch");
  if (frame_.magnetic() != (pe_ != nullptr))
    throw DomainError("reconstruction: a phase evaluator is required exactly when the frame is magnetic");
  for (double e : grid_eps_)
    if (!(e >= 0.0) || !std::isfinite(e)) throw DomainError("reconstruction: eps must be finite and >= 0");
  axis_map_.assign(grid.N, -1);
  for (std::size_t i = 0; i < out_.t_axis.size(); ++i) {
    const double r = rounded_index(out_.t_axis[i], grid.L, grid.h());
    const long k = std::lround(r);
    if (std::abs(r - k) > 1e-9 || k < 0 || k >= grid.N)
      throw GridError("reconstruction: output t values must be spatial grid points");
    axis_map_[k] = static_cast<int>(i);
  }
  const auto n = static_cast<Eigen::Index>(grid.size());
  kernels_.assign(grid_eps_.size(), Eigen::MatrixXcd::Zero(n, n));
  if (zero_path_) {
    if (frame_.magnetic()) {
      stripped_ = Eigen::MatrixXcd::Zero(n, n);
      stripped_tail_ = Eigen::MatrixXcd::Zero(n, n);
    } else {
      if (d > 2) throw DimensionError("reconstruction: the cross-spectrum series supports d <= 2");
      a0_ = SymbolMatrix::Zero(static_cast<Eigen::Index>(out_.t_count()), static_cast<Eigen::Index>(out_.xi_count()));
      a0_tail_ = a0_;
    }
  }
}

PairSelection SymbolReconstructor::needed_pairs(int band) const {
  double tmax = 0.0;
  for (double t : out_.t_axis) tmax = std::max(tmax, std::abs(t));
  PairSelection sel;
  sel.band = band;
  sel.kappa_max = tmax + frame_.window().support_half_width();
  return sel;
}

int SymbolReconstructor::output_t_index(std::size_t row, std::size_t col) const {
  const Grid& grid = frame_.grid();
  const auto a = grid.unflatten(row), b = grid.unflatten(col);
  int flat = 0;
  const int nt = static_cast<int>(out_.t_axis.size());
  for (int ax = 0; ax < grid.dim; ++ax) {
    const int s = a[ax] + b[ax];
    if (s % 2) return -1;
    const int o = axis_map_[s / 2];
    if (o < 0) return -1;
    flat = flat * nt + o;
  }
  return flat;
}

void SymbolReconstructor::add_block(std::size_t g, std::size_t gp, const Eigen::MatrixXcd& T) {
  for (std::size_t i = 0; i < grid_eps_.size(); ++i) add_grid_path(i, grid_eps_[i], g, gp, T);
  if (zero_path_) {
    if (frame_.magnetic())
      add_flux_path(g, gp, T);
    else
      add_cross_spectrum_path(g, gp, T);
  }
}

void SymbolReconstructor::add_grid_path(std::size_t slot, double eps, std::size_t g, std::size_t gp,
                                        const Eigen::MatrixXcd& T) {
  const auto& idx = frame_.index();
  const auto nm = static_cast<Eigen::Index>(idx.modulation_count());
  Eigen::VectorXd damp(nm);
  for (Eigen::Index m = 0; m < nm; ++m) {
    const Point mm = idx.modulation_point(static_cast<std::size_t>(m));
    damp[m] = std::exp(-eps * mm.dot(mm));
  }
  const Eigen::MatrixXcd W =
      frame_.synthesis_block(g) * (damp.asDiagonal() * T * damp.asDiagonal()) * frame_.synthesis_block(gp).adjoint();
  const auto& rows = frame_.cube(g).points;
  const auto& cols = frame_.cube(gp).points;
  auto& K = kernels_[slot];
  for (std::size_t q = 0; q < cols.size(); ++q)
    for (std::size_t p = 0; p < rows.size(); ++p)
      K(static_cast<Eigen::Index>(rows[p]), static_cast<Eigen::Index>(cols[q])) +=
          W(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
}

void SymbolReconstructor::add_flux_path(std::size_t g, std::size_t gp, const Eigen::MatrixXcd& T) {
  const auto& idx = frame_.index();
  const Grid& grid = frame_.grid();
  const double norm = std::pow(kTwoPi, -0.5 * grid.dim);
  const auto& cg = frame_.cube(g);
  const auto& cgp = frame_.cube(gp);
  const Eigen::MatrixXcd S0 = (norm * cg.window).asDiagonal() * frame_.modulation_block(g);
  const Eigen::MatrixXcd S0p = (norm * cgp.window).asDiagonal() * frame_.modulation_block(gp);
  const Eigen::MatrixXcd W = S0 * T * S0p.adjoint();
  // Outermost (m + m')/2 shell, for the tail estimate.
  Eigen::MatrixXcd Tt = Eigen::MatrixXcd::Zero(T.rows(), T.cols());
  for (Eigen::Index b = 0; b < T.cols(); ++b)
    for (Eigen::Index a = 0; a < T.rows(); ++a)
      if ((idx.modulation_point(static_cast<std::size_t>(a)) + idx.modulation_point(static_cast<std::size_t>(b)))
              .norm_inf() >= 2 * idx.M - 1)
        Tt(a, b) = T(a, b);
  const Eigen::MatrixXcd Wt = S0 * Tt * S0p.adjoint();
  const Point gam = idx.gamma_point(g), gamp = idx.gamma_point(gp);
  const double base = -pe_->phase(gam, gamp);
  for (std::size_t q = 0; q < cgp.points.size(); ++q) {
    const Point xp = grid.point(cgp.points[q]);
    const double f1 = pe_->flux(gam, gamp, xp);
    for (std::size_t p = 0; p < cg.points.size(); ++p) {
      const int ti = output_t_index(cg.points[p], cgp.points[q]);
      if (ti < 0) continue;
      const Point x = grid.point(cg.points[p]);
      const Complex ph = std::polar(1.0, base + f1 + pe_->flux(x, gam, xp));
      const auto r = static_cast<Eigen::Index>(cg.points[p]), c = static_cast<Eigen::Index>(cgp.points[q]);
      stripped_(r, c) += ph * W(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
      stripped_tail_(r, c) += ph * Wt(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
    }
  }
}

void SymbolReconstructor::add_cross_spectrum_path(std::size_t g, std::size_t gp, const Eigen::MatrixXcd& T) {
  const auto& idx = frame_.index();
  const Grid& grid = frame_.grid();
  const int d = grid.dim;
  const int M = idx.M;
  const int S = 4 * M + 1;  // sigma = m + m' per axis
  const Point kap = 0.5 * (idx.gamma_point(g) + idx.gamma_point(gp));
  const Point kp = idx.gamma_point(g) - idx.gamma_point(gp);
  const double r = frame_.window().support_half_width();
  const int nt = static_cast<int>(out_.t_axis.size());
  const int nx = static_cast<int>(out_.xi_axis.size());

  std::array<std::vector<int>, kMaxDim> tl;
  for (int a = 0; a < d; ++a) {
    for (int i = 0; i < nt; ++i)
      if (std::abs(out_.t_axis[i] - kap[a]) < r) tl[a].push_back(i);
    if (tl[a].empty()) return;
  }
  const std::size_t nm = idx.modulation_count();
  std::vector<MultiIndex> mods(nm);
  for (std::size_t m = 0; m < nm; ++m) mods[m] = idx.modulation(m);

  for_each_combo(d, tl, [&](const std::array<int, kMaxDim>& ti) {
    Point tau(d);
    for (int a = 0; a < d; ++a) tau[a] = out_.t_axis[ti[a]] - kap[a];
    // Q(sigma) = sum_{m + m' = sigma} e^{i (m - m').tau} T(m, m').
    std::array<std::vector<Complex>, kMaxDim> rot;
    for (int a = 0; a < d; ++a) {
      rot[a].resize(S);
      for (int dl = -2 * M; dl <= 2 * M; ++dl) rot[a][dl + 2 * M] = std::polar(1.0, dl * tau[a]);
    }
    Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(S, d == 2 ? S : 1);
    for (std::size_t mb = 0; mb < nm; ++mb)
      for (std::size_t ma = 0; ma < nm; ++ma) {
        const auto &m = mods[ma], &mp = mods[mb];
        Complex v = T(static_cast<Eigen::Index>(ma), static_cast<Eigen::Index>(mb));
        for (int a = 0; a < d; ++a) v *= rot[a][m[a] - mp[a] + 2 * M];
        Q(m[0] + mp[0] + 2 * M, d == 2 ? m[1] + mp[1] + 2 * M : 0) += v;
      }
    Eigen::MatrixXcd Qt = Eigen::MatrixXcd::Zero(Q.rows(), Q.cols());
    for (Eigen::Index c = 0; c < Q.cols(); ++c)
      for (Eigen::Index rr = 0; rr < Q.rows(); ++rr) {
        const int s0 = static_cast<int>(rr) - 2 * M, s1 = d == 2 ? static_cast<int>(c) - 2 * M : 0;
        if (std::max(std::abs(s0), std::abs(s1)) >= 2 * M - 1) Qt(rr, c) = Q(rr, c);
      }
    // Per-axis e^{-i n kappa'} F(tau, xi - n, kappa'), n = sigma / 2.
    std::array<Eigen::MatrixXcd, kMaxDim> F;
    for (int a = 0; a < d; ++a) {
      const auto key = std::make_tuple(ti[a], static_cast<int>(std::lround(2 * kap[a])), static_cast<int>(std::lround(kp[a])));
      auto it = fcache_.find(key);
      if (it == fcache_.end()) {
        Eigen::MatrixXcd f(nx, S);
        for (int xi = 0; xi < nx; ++xi)
          for (int s = 0; s < S; ++s) {
            const double n = 0.5 * (s - 2 * M);
            f(xi, s) = std::polar(1.0, -n * kp[a]) *
                       window_cross_spectrum_lattice(frame_.window(), tau[a], out_.xi_axis[xi] - n, kp[a], grid.h());
          }
        it = fcache_.emplace(key, std::move(f)).first;
      }
      F[a] = it->second;
    }
    int tflat = 0;
    for (int a = 0; a < d; ++a) tflat = tflat * nt + ti[a];
    if (d == 1) {
      a0_.row(tflat) += (F[0] * Q).transpose();
      a0_tail_.row(tflat) += (F[0] * Qt).transpose();
    } else {
      const Eigen::MatrixXcd R = F[0] * Q * F[1].transpose();
      const Eigen::MatrixXcd Rt = F[0] * Qt * F[1].transpose();
      for (int i0 = 0; i0 < nx; ++i0)
        for (int i1 = 0; i1 < nx; ++i1) {
          a0_(tflat, i0 * nx + i1) += R(i0, i1);
          a0_tail_(tflat, i0 * nx + i1) += Rt(i0, i1);
        }
    }
  });
}

Symbol SymbolReconstructor::extract_from_kernel(const Eigen::MatrixXcd& kernel, bool strip_phase) const {
  const Grid& grid = frame_.grid();
  const int d = grid.dim;
  const double h = grid.h();
  Symbol out;
  out.grid = out_;
  out.values = SymbolMatrix::Zero(static_cast<Eigen::Index>(out_.t_count()), static_cast<Eigen::Index>(out_.xi_count()));
  const int nt = static_cast<int>(out_.t_axis.size());
  std::vector<int> tgrid(nt);
  for (int i = 0; i < nt; ++i) tgrid[i] = static_cast<int>(std::lround(rounded_index(out_.t_axis[i], grid.L, h)));
  const auto nx = static_cast<Eigen::Index>(out_.xi_axis.size());
  for (std::size_t tf = 0; tf < out_.t_count(); ++tf) {
    MultiIndex tau{}, kmax{}, shape{};
    std::size_t r = tf;
    for (int a = d - 1; a >= 0; --a) {
      tau[a] = tgrid[r % nt];
      r /= nt;
    }
    std::size_t count = 1;
    std::array<Eigen::MatrixXcd, kMaxDim> E;
    std::array<const Eigen::MatrixXcd*, kMaxDim> mats{};
    for (int a = 0; a < d; ++a) {
      kmax[a] = std::min(tau[a], grid.N - 1 - tau[a]);
      shape[a] = 2 * kmax[a] + 1;
      count *= shape[a];
      E[a].resize(nx, shape[a]);
      for (Eigen::Index i = 0; i < nx; ++i)
        for (int k = -kmax[a]; k <= kmax[a]; ++k)
          E[a](i, k + kmax[a]) = std::polar(2.0 * h, -out_.xi_axis[i] * 2.0 * h * k);
      mats[a] = &E[a];
    }
    Eigen::VectorXcd vals(static_cast<Eigen::Index>(count));
    for (std::size_t c = 0; c < count; ++c) {
      MultiIndex xi{}, xpi{};
      std::size_t rr = c;
      for (int a = d - 1; a >= 0; --a) {
        const int k = static_cast<int>(rr % shape[a]) - kmax[a];
        rr /= shape[a];
        xi[a] = tau[a] + k;
        xpi[a] = tau[a] - k;
      }
      const std::size_t row = grid.flatten(xi), col = grid.flatten(xpi);
      Complex v = kernel(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
      if (strip_phase && v != 0.0) v *= std::polar(1.0, -pe_->phase(grid.point(row), grid.point(col)));
      vals[static_cast<Eigen::Index>(c)] = v;
    }
    out.values.row(static_cast<Eigen::Index>(tf)) = apply_separable(vals, shape, d, mats).transpose();
  }
  return out;
}

ReconstructionResult SymbolReconstructor::finish() const {
  ReconstructionResult res;
  res.eps = grid_eps_;
  for (const auto& K : kernels_) res.a_eps.push_back(extract_from_kernel(K, frame_.magnetic()));
  if (zero_path_) {
    if (frame_.magnetic()) {
      res.zero_path = "flux";
      res.a0 = extract_from_kernel(stripped_, false);
      res.tail_bound = extract_from_kernel(stripped_tail_, false).values.cwiseAbs().maxCoeff();
    } else {
      res.zero_path = "cross-spectrum";
      Symbol s;
      s.grid = out_;
      s.values = a0_;
      res.a0 = std::move(s);
      res.tail_bound = a0_tail_.cwiseAbs().maxCoeff();
    }
  }
  return res;
}

Symbol extract_symbol(const MatrixElements& M, const GaborFrame& frame, double eps, const PhaseSpaceGrid& out,
                      const PhaseEvaluator* pe, const ExtractOptions& opt, bool force_grid_path, double* tail_bound) {
  if (!(M.index() == frame.index())) throw DimensionError("extract_symbol: tensor and frame index sets differ");
  const bool grid_path = eps > 0.0 || force_grid_path;
  SymbolReconstructor rec(frame, out, pe, grid_path ? std::vector<double>{eps} : std::vector<double>{}, !grid_path, opt);
  M.for_each_block([&](std::size_t g, std::size_t gp, const Eigen::MatrixXcd& T) { rec.add_block(g, gp, T); });
  auto res = rec.finish();
  if (grid_path) return std::move(res.a_eps.front());
  if (tail_bound) *tail_bound = res.tail_bound;
  if (opt.check_tail && res.tail_bound > opt.tail_tolerance) {
    std::ostringstream msg;
    msg << "extract_symbol: realized n-series tail bound " << res.tail_bound << " exceeds tolerance "
        << opt.tail_tolerance;
    throw TruncationError(msg.str());
  }
  return std::move(*res.a0);
}

RoundtripError roundtrip_error(const Symbol& a_in, const Symbol& a_out, const Box& t_box, const Box& xi_box) {
  if (!(a_in.grid == a_out.grid) || a_in.values.rows() != a_out.values.rows() ||
      a_in.values.cols() != a_out.values.cols())
    throw GridError("roundtrip_error: symbols live on different grids");
  const auto& g = a_in.grid;
  const int d = g.dim;
  const int nt = static_cast<int>(g.t_axis.size()), nx = static_cast<int>(g.xi_axis.size());
  const double dt = nt > 1 ? g.t_axis[1] - g.t_axis[0] : 1.0;
  const double dxi = nx > 1 ? g.xi_axis[1] - g.xi_axis[0] : 1.0;
  auto inside = [](const Point& p, const Box& b) {
    for (int a = 0; a < p.dim(); ++a)
      if (p[a] < b.lo[a] - 1e-12 || p[a] > b.hi[a] + 1e-12) return false;
    return true;
  };
  const SymbolMatrix diff = a_out.values - a_in.values;
  RoundtripError err;
  for (std::size_t ti = 0; ti < g.t_count(); ++ti) {
    const Point t = g.t_point(ti);
    if (!inside(t, t_box)) continue;
    for (std::size_t xj = 0; xj < g.xi_count(); ++xj) {
      const Point xi = g.xi_point(xj);
      if (!inside(xi, xi_box)) continue;
      const Complex v = diff(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(xj));
      err.sup = std::max(err.sup, std::abs(v));
      ++err.points;
      std::size_t stride_t = 1, stride_x = 1;
      for (int a = d - 1; a >= 0; --a) {
        // Forward neighbour along t axis a.
        Point tn = t;
        tn[a] += dt;
        if ((ti / stride_t) % nt + 1 < static_cast<std::size_t>(nt) && inside(tn, t_box)) {
          const Complex w = diff(static_cast<Eigen::Index>(ti + stride_t), static_cast<Eigen::Index>(xj));
          err.sup_dt = std::max(err.sup_dt, std::abs(w - v) / dt);
        }
        Point xn = xi;
        xn[a] += dxi;
        if ((xj / stride_x) % nx + 1 < static_cast<std::size_t>(nx) && inside(xn, xi_box)) {
          const Complex w = diff(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(xj + stride_x));
          err.sup_dxi = std::max(err.sup_dxi, std::abs(w - v) / dxi);
        }
        stride_t *= nt;
        stride_x *= nx;
      }
    }
  }
  return err;
}

Symbol richardson(const Symbol& a_small, double eps_small, const Symbol& a_large, double eps_large) {
  if (!(a_small.grid == a_large.grid)) throw GridError("richardson: symbols live on different grids");
  if (!(eps_large > eps_small)) throw DomainError("richardson: needs eps_large > eps_small");
  Symbol out;
  out.grid = a_small.grid;
  out.values = (eps_large * a_small.values - eps_small * a_large.values) / (eps_large - eps_small);
  return out;
}

}  // namespace beals
