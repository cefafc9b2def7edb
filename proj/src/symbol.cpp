#include "beals/symbol.hpp"

#include <sstream>

namespace beals {

namespace {

Point tensor_point(std::size_t flat, int dim, const std::vector<double>& axis) {
  Point p(dim);
  const std::size_t n = axis.size();
  for (int a = dim - 1; a >= 0; --a) {
    p[a] = axis[flat % n];
    flat /= n;
  }
  return p;
}

// Derivative of a lexicographic tensor along one axis: central inside, one-sided at the ends.
std::vector<Complex> difference(const std::vector<Complex>& in, const std::vector<int>& shape, int axis,
                                double step) {
  std::size_t inner = 1;
  for (std::size_t b = axis + 1; b < shape.size(); ++b) inner *= shape[b];
  const std::size_t n = shape[axis];
  const std::size_t outer = in.size() / (n * inner);
  std::vector<Complex> out(in.size());
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < inner; ++i) {
        auto at = [&](std::size_t kk) { return in[(o * n + kk) * inner + i]; };
        Complex v;
        if (n < 2)
          v = 0.0;
        else if (k == 0)
          v = (at(1) - at(0)) / step;
        else if (k == n - 1)
          v = (at(n - 1) - at(n - 2)) / step;
        else
          v = (at(k + 1) - at(k - 1)) / (2.0 * step);
        out[(o * n + k) * inner + i] = v;
      }
  return out;
}

std::vector<std::array<int, kMaxDim>> multi_indices_up_to(int dim, int order) {
  std::vector<std::array<int, kMaxDim>> out;
  const int total = ipow(order + 1, dim);
  for (int f = 0; f < total; ++f) {
    std::array<int, kMaxDim> a{};
    int r = f, s = 0;
    for (int k = dim - 1; k >= 0; --k) {
      a[k] = r % (order + 1);
      r /= order + 1;
      s += a[k];
    }
    if (s <= order) out.push_back(a);
  }
  return out;
}

std::string format_index(const std::array<int, kMaxDim>& a, int dim) {
  std::ostringstream s;
  s << "(";
  for (int k = 0; k < dim; ++k) s << (k ? "," : "") << a[k];
  s << ")";
  return s.str();
}

}  // namespace

Point PhaseSpaceGrid::t_point(std::size_t flat) const { return tensor_point(flat, dim, t_axis); }
Point PhaseSpaceGrid::xi_point(std::size_t flat) const { return tensor_point(flat, dim, xi_axis); }

SeminormReport Symbol::seminorms(int max_order) const {
  const int d = grid.dim;
  std::vector<int> shape;
  for (int a = 0; a < d; ++a) shape.push_back(static_cast<int>(grid.t_axis.size()));
  for (int a = 0; a < d; ++a) shape.push_back(static_cast<int>(grid.xi_axis.size()));
  const double dt = grid.t_axis.size() > 1 ? grid.t_axis[1] - grid.t_axis[0] : 1.0;
  const double dxi = grid.xi_axis.size() > 1 ? grid.xi_axis[1] - grid.xi_axis[0] : 1.0;
  const std::vector<Complex> base(values.data(), values.data() + values.size());
  SeminormReport rep;
  const auto idx = multi_indices_up_to(d, max_order);
  for (const auto& alpha : idx)
    for (const auto& beta : idx) {
      std::vector<Complex> cur = base;
      for (int a = 0; a < d; ++a)
        for (int r = 0; r < alpha[a]; ++r) cur = difference(cur, shape, a, dt);
      for (int a = 0; a < d; ++a)
        for (int r = 0; r < beta[a]; ++r) cur = difference(cur, shape, d + a, dxi);
      double sup = 0.0;
      for (const auto& v : cur) {
        const double m = std::abs(v);
        if (!std::isfinite(m)) rep.finite = false;
        sup = std::max(sup, m);
      }
      rep.entries.emplace_back("a=" + format_index(alpha, d) + ",b=" + format_index(beta, d), sup);
      rep.max = std::max(rep.max, sup);
    }
  return rep;
}

SymbolFunction make_symbol(const SymbolSpec& spec, int dim) {
  if (spec.j < 0 || spec.j >= dim) throw DimensionError("symbol component index out of range");
  const int j = spec.j;
  if (spec.kind == "one") return [](const Point&, const Point&) { return Complex(1.0); };
  if (spec.kind == "xi") return [j](const Point&, const Point& xi) { return Complex(xi[j]); };
  if (spec.kind == "x") return [j](const Point& t, const Point&) { return Complex(t[j]); };
  if (spec.kind == "sign") return [j](const Point& t, const Point&) { return Complex(t[j] >= 0.0 ? 1.0 : -1.0); };
  if (spec.sigma_t <= 0.0 || spec.sigma_xi <= 0.0) throw DomainError("symbol widths must be positive");
  const double st2 = spec.sigma_t * spec.sigma_t, sx2 = spec.sigma_xi * spec.sigma_xi;
  auto gauss = [st2, sx2](const Point& t, const Point& xi) { return std::exp(-t.dot(t) / st2 - xi.dot(xi) / sx2); };
  if (spec.kind == "gauss") return [gauss](const Point& t, const Point& xi) { return Complex(gauss(t, xi)); };
  if (spec.kind == "gauss_modulated") {
    const double amp = spec.amplitude, om = spec.omega;
    return [gauss, amp, om](const Point& t, const Point& xi) {
      return Complex(gauss(t, xi) * (1.0 + amp * std::cos(om * t[0])));
    };
  }
  throw DomainError("unknown symbol kind '" + spec.kind + "'");
}

Symbol sample_symbol(const SymbolFunction& a, const PhaseSpaceGrid& grid) {
  Symbol s;
  s.grid = grid;
  s.values.resize(static_cast<Eigen::Index>(grid.t_count()), static_cast<Eigen::Index>(grid.xi_count()));
  for (std::size_t ti = 0; ti < grid.t_count(); ++ti) {
    const Point t = grid.t_point(ti);
    for (std::size_t xj = 0; xj < grid.xi_count(); ++xj)
      s.values(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(xj)) = a(t, grid.xi_point(xj));
  }
  return s;
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return v;
}

PhaseSpaceGrid quantization_grid(const Grid& grid) {
  PhaseSpaceGrid ps;
  ps.dim = grid.dim;
  const double h = grid.h();
  for (int tau = 0; tau <= 2 * grid.N - 2; ++tau) ps.t_axis.push_back(-grid.L + 0.5 * tau * h);
  const double dxi = kPi / (2.0 * grid.L);
  for (int j = 0; j <= grid.N; ++j) ps.xi_axis.push_back(-kPi / (2.0 * h) + j * dxi);
  return ps;
}

}  // namespace beals
