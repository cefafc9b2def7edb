#include "beals/window.hpp"

#include <cmath>

#include "beals/quadrature.hpp"

namespace beals {

Window::Window(int dim, double half_width) : dim_(dim), r_(half_width) {
  if (dim < 1 || dim > kMaxDim) throw DimensionError("window dimension must be in [1, 3]");
  if (!(half_width > 0.0) || half_width > 1.0) throw DomainError("window support half width must be in (0, 1]");
  // Scan the unit cell; the partition sum must stay away from zero.
  double low = 1.0;
  for (int i = 0; i <= 2000; ++i) {
    const double t = i / 2000.0;
    double s = 0.0;
    for (int k = -1; k <= 2; ++k) s += bump(t - k) * bump(t - k);
    low = std::min(low, s);
  }
  if (low < 1e-200) throw DomainError("window profile vanishes on the unit cell; partition sum is zero");
}

double Window::bump(double t) const {
  const double u = t / r_;
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

double Window::partition_sum1d(double t) const {
  double s = 0.0;
  const double f = std::floor(t);
  for (int k = -1; k <= 2; ++k) {
    const double v = value1d(t - (f + k));
    s += v * v;
  }
  return s;
}

double Window::value1d(double t) const {
  const double num = bump(t);
  if (num == 0.0) return 0.0;
  const double f = std::floor(t);
  double den = 0.0;
  for (int k = -1; k <= 2; ++k) {
    const double b = bump(t - (f + k));
    den += b * b;
  }
  return num / std::sqrt(den);
}

double Window::operator()(const Point& x) const {
  if (x.dim() != dim_) throw DimensionError("window: point dimension mismatch");
  double v = 1.0;
  for (int a = 0; a < dim_ && v != 0.0; ++a) v *= value1d(x[a]);
  return v;
}

double Window::partition_sum(const Point& x) const {
  if (x.dim() != dim_) throw DimensionError("window: point dimension mismatch");
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= partition_sum1d(x[a]);
  return v;
}

double Window::derivative1d(double t, int order) const {
  if (order == 0) return value1d(t);
  if (order < 0 || order > 4) throw DomainError("window derivative order must be in [0, 4]");
  const double step = 2e-3;
  return (derivative1d(t + step, order - 1) - derivative1d(t - step, order - 1)) / (2.0 * step);
}

double Window::norm_squared() const {
  const auto& gl = gauss_legendre(32);
  const int panels = 64;
  double s = 0.0;
  for (int p = 0; p < panels; ++p)
    for (int q = 0; q < gl.size(); ++q) {
      const double t = -r_ + 2.0 * r_ * (p + gl.nodes[q]) / panels;
      const double v = value1d(t);
      s += 2.0 * r_ / panels * gl.weights[q] * v * v;
    }
  return std::pow(s, dim_);
}

Window build_window(const std::string& kind, int dim) {
  if (kind == "bump") return Window(dim, 1.0);
  if (kind.rfind("bump:", 0) == 0) return Window(dim, std::stod(kind.substr(5)));
  throw DomainError("unknown window kind '" + kind + "'");
}

}  // namespace beals
