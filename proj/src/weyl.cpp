#include "beals/weyl.hpp"

#include <fftw3.h>

#include <mutex>
#include <random>
#include <sstream>

#include "beals/parallel.hpp"

namespace beals {

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// e^{-i pi k / 2}
Complex quarter_turn(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

struct PairAxis {
  int i, ip, k;
};

// Core of quantize: `sample(t, xi_index)` returns the trapezoid-weighted symbol value.
OperatorKernel quantize_impl(const Grid& grid, const std::function<void(const Point&, Complex*)>& fill,
                             const std::optional<PhaseFn>& phase, int workers) {
  const int d = grid.dim;
  const int N = grid.N;
  const int P = 2 * N;  // FFT length per axis
  const std::size_t n_fft = static_cast<std::size_t>(ipow(P, d));
  const std::size_t n_tau = static_cast<std::size_t>(ipow(2 * N - 1, d));
  const double h = grid.h();
  const double pref = std::pow(1.0 / (4.0 * grid.L), d);  // (dxi / 2pi)^d

  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid.size()),
                                              static_cast<Eigen::Index>(grid.size()));
  fftw_plan plan;
  fftw_complex* probe = fftw_alloc_complex(n_fft);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    std::array<int, kMaxDim> n{P, P, P};
    plan = fftw_plan_dft(d, n.data(), probe, probe, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  const int nw = std::max(1, std::min<int>(workers, static_cast<int>(n_tau)));
  parallel_for(static_cast<std::size_t>(nw), nw, [&](std::size_t w) {
    fftw_complex* buf = fftw_alloc_complex(n_fft);
    auto* data = reinterpret_cast<Complex*>(buf);
    std::vector<Complex> sampled(static_cast<std::size_t>(ipow(N + 1, d)));
    const std::size_t lo = n_tau * w / nw, hi = n_tau * (w + 1) / nw;
    for (std::size_t tf = lo; tf < hi; ++tf) {
      std::array<int, kMaxDim> tau{};
      std::size_t r = tf;
      for (int a = d - 1; a >= 0; --a) {
        tau[a] = static_cast<int>(r % (2 * N - 1));
        r /= 2 * N - 1;
      }
      Point t(d);
      for (int a = 0; a < d; ++a) t[a] = -grid.L + 0.5 * tau[a] * h;
      fill(t, sampled.data());
      std::fill(data, data + n_fft, Complex(0.0));
      const std::size_t ns = sampled.size();
      for (std::size_t j = 0; j < ns; ++j) {
        std::size_t rr = j, dst = 0, stride = 1;
        for (int a = d - 1; a >= 0; --a) {
          dst += (rr % (N + 1)) * stride;
          rr /= N + 1;
          stride *= P;
        }
        data[dst] = sampled[j];
      }
      fftw_execute_dft(plan, buf, buf);

      std::array<std::vector<PairAxis>, kMaxDim> axes;
      for (int a = 0; a < d; ++a)
        for (int i = std::max(0, tau[a] - (N - 1)); i <= std::min(N - 1, tau[a]); ++i)
          axes[a].push_back({i, tau[a] - i, 2 * i - tau[a]});
      std::size_t combos = 1;
      for (int a = 0; a < d; ++a) combos *= axes[a].size();
      for (std::size_t c = 0; c < combos; ++c) {
        std::size_t rr = c, row = 0, col = 0, src = 0;
        Complex factor = pref;
        std::array<const PairAxis*, kMaxDim> sel{};
        for (int a = d - 1; a >= 0; --a) {
          sel[a] = &axes[a][rr % axes[a].size()];
          rr /= axes[a].size();
        }
        for (int a = 0; a < d; ++a) {
          row = row * N + sel[a]->i;
          col = col * N + sel[a]->ip;
          src = src * P + static_cast<std::size_t>(((sel[a]->k % P) + P) % P);
          factor *= quarter_turn(sel[a]->k);
        }
        K(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = factor * data[src];
      }
    }
    fftw_free(buf);
  });
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(probe);

  OperatorKernel out(grid, std::move(K), phase);
  if (phase) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    std::vector<Point> pts(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) pts[i] = grid.point(i);
    const PhaseFn& phi = *phase;
    parallel_for(grid.size(), workers, [&](std::size_t col) {
      for (Eigen::Index row = 0; row < n; ++row)
        out.K(row, static_cast<Eigen::Index>(col)) *= std::polar(1.0, phi(pts[static_cast<std::size_t>(row)], pts[col]));
    });
  }
  return out;
}

double trapezoid_weight(std::size_t flat, int d, int N) {
  double w = 1.0;
  for (int a = 0; a < d; ++a) {
    const std::size_t j = flat % (N + 1);
    flat /= N + 1;
    if (j == 0 || j == static_cast<std::size_t>(N)) w *= 0.5;
  }
  return w;
}

const std::array<std::vector<double>, 5>& stencils() {
  // Centered first-derivative weights c_1..c_{p/2} (c_{-l} = -c_l).
  static const std::array<std::vector<double>, 5> s{
      std::vector<double>{}, std::vector<double>{0.5}, std::vector<double>{2.0 / 3.0, -1.0 / 12.0},
      std::vector<double>{3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0},
      std::vector<double>{4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0}};
  return s;
}

const std::vector<double>& stencil(int order) {
  if (order != 2 && order != 4 && order != 6 && order != 8)
    throw DomainError("finite-difference order must be 2, 4, 6 or 8");
  return stencils()[order / 2];
}

// Shift of a flat grid index by `delta` cells along axis j; -1 when outside the box.
long shifted(const Grid& grid, std::size_t flat, int j, int delta) {
  auto idx = grid.unflatten(flat);
  idx[j] += delta;
  if (idx[j] < 0 || idx[j] >= grid.N) return -1;
  return static_cast<long>(grid.flatten(idx));
}

Eigen::MatrixXcd momentum_commutator_kernel(const OperatorKernel& K, int j, const PhaseEvaluator* pe, int order,
                                            int width) {
  const Grid& g = K.grid;
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto& c = stencil(order);
  const double step = width * g.h();
  std::vector<std::vector<long>> plus(c.size()), minus(c.size());
  for (std::size_t l = 0; l < c.size(); ++l) {
    plus[l].resize(g.size());
    minus[l].resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      plus[l][i] = shifted(g, i, j, static_cast<int>((l + 1) * width));
      minus[l][i] = shifted(g, i, j, -static_cast<int>((l + 1) * width));
    }
  }
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(n, n);
  // d_x on rows.
  for (std::size_t l = 0; l < c.size(); ++l)
    for (Eigen::Index i = 0; i < n; ++i) {
      if (plus[l][i] >= 0) D.row(i) += c[l] / step * K.K.row(plus[l][i]);
      if (minus[l][i] >= 0) D.row(i) -= c[l] / step * K.K.row(minus[l][i]);
    }
  // d_x' on columns.
  for (std::size_t l = 0; l < c.size(); ++l)
    for (Eigen::Index i = 0; i < n; ++i) {
      if (plus[l][i] >= 0) D.col(i) += c[l] / step * K.K.col(plus[l][i]);
      if (minus[l][i] >= 0) D.col(i) -= c[l] / step * K.K.col(minus[l][i]);
    }
  Eigen::MatrixXcd C = Complex(0.0, -1.0) * D;
  if (pe) {
    Eigen::VectorXd A(n);
    for (Eigen::Index i = 0; i < n; ++i)
      A[i] = pe->gauge().vector_potential(g.point(static_cast<std::size_t>(i)), pe->base())[j];
    for (Eigen::Index col = 0; col < n; ++col)
      for (Eigen::Index row = 0; row < n; ++row) C(row, col) -= (A[row] - A[col]) * K.K(row, col);
  }
  return C;
}

}  // namespace

OperatorKernel::OperatorKernel(Grid grid_, Eigen::MatrixXcd K_, std::optional<PhaseFn> phase_)
    : grid(grid_), K(std::move(K_)), magnetic(phase_.has_value()), phase(std::move(phase_)) {
  if (K.rows() != static_cast<Eigen::Index>(grid.size()) || K.cols() != K.rows())
    throw DimensionError("kernel matrix does not match grid size");
}

OperatorKernel quantize(const SymbolFunction& a, const Grid& grid, const std::optional<PhaseFn>& phase, int workers) {
  const PhaseSpaceGrid ps = quantization_grid(grid);
  const int d = grid.dim, N = grid.N;
  const std::size_t nx = ps.xi_count();
  std::vector<Point> xi(nx);
  std::vector<double> wt(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    xi[j] = ps.xi_point(j);
    wt[j] = trapezoid_weight(j, d, N);
  }
  return quantize_impl(
      grid,
      [&](const Point& t, Complex* out) {
        for (std::size_t j = 0; j < nx; ++j) {
          const Complex v = a(t, xi[j]);
          if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DomainError("quantize: non-finite symbol value");
          out[j] = wt[j] * v;
        }
      },
      phase, workers);
}

OperatorKernel quantize(const Symbol& a, const Grid& grid, const std::optional<PhaseFn>& phase, int workers) {
  if (!(a.grid == quantization_grid(grid))) throw GridError("quantize: symbol grid is not the dual of the spatial grid");
  const int d = grid.dim, N = grid.N;
  const std::size_t nx = a.grid.xi_count();
  const int nt = static_cast<int>(a.grid.t_axis.size());
  const double h = grid.h();
  return quantize_impl(
      grid,
      [&](const Point& t, Complex* out) {
        std::size_t row = 0;
        for (int ax = 0; ax < d; ++ax) row = row * nt + static_cast<std::size_t>(std::lround((t[ax] + grid.L) / (0.5 * h)));
        for (std::size_t j = 0; j < nx; ++j)
          out[j] = trapezoid_weight(j, d, N) * a.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
      },
      phase, workers);
}

OperatorKernel multiplication_kernel(const Grid& grid, const std::function<Complex(const Point&)>& v) {
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid.size()),
                                              static_cast<Eigen::Index>(grid.size()));
  const double inv = 1.0 / grid.weight();
  for (std::size_t i = 0; i < grid.size(); ++i)
    K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = inv * v(grid.point(i));
  return OperatorKernel(grid, std::move(K));
}

GridFunction apply(const OperatorKernel& K, const GridFunction& f) {
  if (!(f.grid() == K.grid)) throw DimensionError("apply: function grid does not match kernel grid");
  return GridFunction(K.grid, K.weight() * (K.K * f.values()));
}

OperatorKernel commutator_position(const OperatorKernel& K, int j) {
  if (j < 0 || j >= K.grid.dim) throw DimensionError("commutator_position: axis out of range");
  OperatorKernel out = K;
  const auto n = static_cast<Eigen::Index>(K.grid.size());
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = K.grid.point(static_cast<std::size_t>(i))[j];
  for (Eigen::Index col = 0; col < n; ++col)
    for (Eigen::Index row = 0; row < n; ++row) out.K(row, col) *= x[row] - x[col];
  return out;
}

CommutatorResult commutator_momentum(const OperatorKernel& K, int j, const PhaseEvaluator* pe,
                                     const CommutatorOptions& opt) {
  if (j < 0 || j >= K.grid.dim) throw DimensionError("commutator_momentum: axis out of range");
  if (opt.width < 1) throw DomainError("commutator_momentum: stencil width must be positive");
  CommutatorResult res;
  res.kernel = K;
  res.kernel.K = momentum_commutator_kernel(K, j, pe, opt.order, opt.width);
  const Eigen::MatrixXcd wide = momentum_commutator_kernel(K, j, pe, opt.order, 2 * opt.width);
  // Compare the two widths on a smooth probe so band-edge content does not dominate.
  const Grid& g = K.grid;
  const double sigma = g.L / 4.0;
  const Eigen::VectorXcd p = GridFunction::from_function(g, [&](const Point& x) {
                               return Complex(std::exp(-x.dot(x) / (2 * sigma * sigma)));
                             }).values();
  const double num = ((res.kernel.K - wide) * p).norm();
  const double den = std::max((res.kernel.K * p).norm(), (K.K * p).norm());
  res.stencil_discrepancy = den > 0.0 ? num / den : 0.0;
  if (res.stencil_discrepancy > opt.tolerance) {
    std::ostringstream msg;
    msg << "commutator_momentum: grid too coarse, stencil widths " << opt.width << " and " << 2 * opt.width
        << " differ by " << res.stencil_discrepancy << " (tolerance " << opt.tolerance << ")";
    throw GridError(msg.str());
  }
  return res;
}

GridFunction momentum_apply(const GridFunction& f, int j, const PhaseEvaluator* pe, const CommutatorOptions& opt) {
  const Grid& g = f.grid();
  if (j < 0 || j >= g.dim) throw DimensionError("momentum_apply: axis out of range");
  const auto& c = stencil(opt.order);
  const double step = opt.width * g.h();
  GridFunction out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    Complex acc = 0.0;
    for (std::size_t l = 0; l < c.size(); ++l) {
      const long p = shifted(g, i, j, static_cast<int>((l + 1) * opt.width));
      const long m = shifted(g, i, j, -static_cast<int>((l + 1) * opt.width));
      if (p >= 0) acc += c[l] * f[static_cast<std::size_t>(p)];
      if (m >= 0) acc -= c[l] * f[static_cast<std::size_t>(m)];
    }
    out[i] = Complex(0.0, -1.0) * acc / step;
    if (pe) out[i] -= pe->gauge().vector_potential(g.point(i), pe->base())[j] * f[i];
  }
  return out;
}

NormEstimate operator_norm_estimate(const OperatorKernel& K, const NormOptions& opt) {
  const auto n = K.K.rows();
  NormEstimate est;
  if (!K.K.allFinite()) throw DomainError("operator_norm_estimate: kernel has non-finite entries");
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(nd(rng), nd(rng));
  v.normalize();
  const double w = K.weight();
  double lambda = 0.0;
  for (est.iterations = 1; est.iterations <= opt.max_iterations; ++est.iterations) {
    const Eigen::VectorXcd u = w * (K.K * v);
    const Eigen::VectorXcd z = w * (K.K.adjoint() * u);
    const double next = z.norm();
    if (next == 0.0) {
      est.converged = true;
      est.value = 0.0;
      return est;
    }
    est.residual = (z - next * v).norm();
    v = z / next;
    const bool done = std::abs(next - lambda) <= opt.tolerance * next;
    lambda = next;
    if (done) {
      est.converged = true;
      break;
    }
  }
  est.iterations = std::min(est.iterations, opt.max_iterations);
  est.value = std::sqrt(lambda);
  return est;
}

}  // namespace beals
