#include "beals/magnetic_geometry.hpp"

#include <cmath>

#include "beals/quadrature.hpp"

namespace beals {

namespace {

constexpr double kFdStep = 1e-3;

// n-th derivative of cos.
double dcos(double x, int n) { return std::cos(x + 0.5 * kPi * n); }

void check_point(const Point& x, int dim, const char* what) {
  if (x.dim() != dim) throw DimensionError(std::string(what) + ": point dimension does not match field");
  if (!x.is_finite()) throw DomainError(std::string(what) + ": non-finite point");
}

double finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite field evaluation");
  return v;
}

// Visits every point of a tensor grid with `n` samples per axis over `box`.
template <class F>
void for_each_sample(const Box& box, int n, F&& f) {
  const int d = box.lo.dim();
  const int total = ipow(n, d);
  for (int flat = 0; flat < total; ++flat) {
    Point x(d);
    int r = flat;
    for (int a = d - 1; a >= 0; --a) {
      const int k = r % n;
      r /= n;
      const double t = n == 1 ? 0.5 : static_cast<double>(k) / (n - 1);
      x[a] = box.lo[a] + t * (box.hi[a] - box.lo[a]);
    }
    f(x);
  }
}

// All multi-indices of total order `order` in `dim` variables.
std::vector<std::array<int, kMaxDim>> multi_indices(int dim, int order) {
  std::vector<std::array<int, kMaxDim>> out;
  std::array<int, kMaxDim> alpha{};
  std::function<void(int, int)> rec = [&](int axis, int left) {
    if (axis == dim - 1) {
      alpha[axis] = left;
      out.push_back(alpha);
      return;
    }
    for (int k = left; k >= 0; --k) {
      alpha[axis] = k;
      rec(axis + 1, left - k);
    }
  };
  rec(0, order);
  return out;
}

}  // namespace

bool Box::contains(const Point& x) const {
  for (int a = 0; a < x.dim(); ++a)
    if (x[a] < lo[a] || x[a] > hi[a]) return false;
  return true;
}

MagneticField MagneticField::zero(int dim) {
  if (dim < 1 || dim > kMaxDim) throw DimensionError("field dimension must be in [1, 3]");
  return MagneticField(dim, Kind::Zero, 0.0);
}

MagneticField MagneticField::constant(double b) {
  if (!std::isfinite(b)) throw DomainError("field strength must be finite");
  return MagneticField(2, b == 0.0 ? Kind::Zero : Kind::Constant, b);
}

MagneticField MagneticField::cosine(double b) {
  if (!std::isfinite(b)) throw DomainError("field strength must be finite");
  return MagneticField(2, Kind::Cosine, b);
}

MagneticField MagneticField::custom(int dim, std::vector<Component> upper, int derivative_order) {
  if (dim < 2 || dim > kMaxDim) throw DimensionError("custom field dimension must be in [2, 3]");
  if (static_cast<int>(upper.size()) != dim * (dim - 1) / 2)
    throw DimensionError("custom field needs d(d-1)/2 components");
  MagneticField f(dim, Kind::Custom, 0.0);
  f.custom_ = std::move(upper);
  f.derivative_order_ = derivative_order;
  return f;
}

MagneticField::Kind MagneticField::parse_kind(const std::string& name) {
  if (name == "zero") return Kind::Zero;
  if (name == "constant") return Kind::Constant;
  if (name == "cosine") return Kind::Cosine;
  if (name == "custom") return Kind::Custom;
  throw DomainError("unknown field kind '" + name + "'");
}

int MagneticField::pair_index(int j, int k) const {
  // (0,1), (0,2), ..., (0,d-1), (1,2), ...
  return j * dim_ - j * (j + 1) / 2 + (k - j - 1);
}

double MagneticField::upper(int j, int k, const Point& x) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Constant:
      return b_;
    case Kind::Cosine:
      return b_ * (1.0 + 0.5 * std::cos(x[0]) * std::cos(x[1]));
    case Kind::Custom:
      return finite(custom_[pair_index(j, k)](x), "field component");
  }
  return 0.0;
}

double MagneticField::component(int j, int k, const Point& x) const {
  if (j < 0 || k < 0 || j >= dim_ || k >= dim_) throw DimensionError("field component index out of range");
  check_point(x, dim_, "field component");
  if (j == k) return 0.0;
  return j < k ? upper(j, k, x) : -upper(k, j, x);
}

double MagneticField::derivative(int j, int k, const std::array<int, kMaxDim>& alpha, const Point& x) const {
  int order = 0;
  for (int a = 0; a < dim_; ++a) order += alpha[a];
  if (order == 0) return component(j, k, x);
  if (j == k) return 0.0;
  const double sign = j < k ? 1.0 : -1.0;
  const int jj = std::min(j, k), kk = std::max(j, k);
  switch (kind_) {
    case Kind::Zero:
    case Kind::Constant:
      return 0.0;
    case Kind::Cosine:
      return sign * b_ * 0.5 * dcos(x[0], alpha[0]) * dcos(x[1], alpha[1]);
    case Kind::Custom: {
      int axis = 0;
      while (alpha[axis] == 0) ++axis;
      auto lower = alpha;
      --lower[axis];
      Point xp = x, xm = x;
      xp[axis] += kFdStep;
      xm[axis] -= kFdStep;
      return sign * (derivative(jj, kk, lower, xp) - derivative(jj, kk, lower, xm)) / (2.0 * kFdStep);
    }
  }
  return 0.0;
}

double MagneticField::contract(const Point& x, const Point& e1, const Point& e2) const {
  if (kind_ == Kind::Zero) return 0.0;
  if (dim_ == 2) return upper(0, 1, x) * (e1[0] * e2[1] - e1[1] * e2[0]);
  double s = 0.0;
  for (int j = 0; j < dim_; ++j)
    for (int k = j + 1; k < dim_; ++k) s += upper(j, k, x) * (e1[j] * e2[k] - e1[k] * e2[j]);
  return s;
}

FieldBounds MagneticField::bounds(const Box& box, int samples_per_axis, int max_order) const {
  if (box.lo.dim() != dim_) throw DimensionError("bounds: box dimension does not match field");
  FieldBounds out;
  out.sup_derivative.assign(std::max(0, std::min(max_order, derivative_order_)), 0.0);
  for_each_sample(box, samples_per_axis, [&](const Point& x) {
    ++out.samples;
    for (int j = 0; j < dim_; ++j)
      for (int k = j + 1; k < dim_; ++k) {
        out.sup_field = std::max(out.sup_field, std::abs(component(j, k, x)));
        for (int order = 1; order <= static_cast<int>(out.sup_derivative.size()); ++order)
          for (const auto& alpha : multi_indices(dim_, order))
            out.sup_derivative[order - 1] =
                std::max(out.sup_derivative[order - 1], std::abs(derivative(j, k, alpha, x)));
      }
  });
  return out;
}

double MagneticField::closedness_residual(const Box& box, int samples_per_axis) const {
  if (dim_ < 3) return 0.0;
  double worst = 0.0;
  for_each_sample(box, samples_per_axis, [&](const Point& x) {
    for (int j = 0; j < dim_; ++j)
      for (int k = j + 1; k < dim_; ++k)
        for (int l = k + 1; l < dim_; ++l) {
          std::array<int, kMaxDim> ej{}, ek{}, el{};
          ej[j] = ek[k] = el[l] = 1;
          const double r = derivative(k, l, ej, x) + derivative(l, j, ek, x) + derivative(j, k, el, x);
          worst = std::max(worst, std::abs(r));
        }
  });
  return worst;
}

GaugeData::GaugeData(MagneticField field, QuadratureRule rule) : field_(std::move(field)), rule_(rule) {
  if (rule_.nodes_per_unit < 2 || rule_.triangle_nodes < 2)
    throw DomainError("quadrature node count must be at least 2");
}

Point GaugeData::vector_potential(const Point& x, const Point& y) const {
  const int d = field_.dim();
  check_point(x, d, "vector_potential");
  check_point(y, d, "vector_potential");
  Point A(d);
  const Point dx = x - y;
  if (field_.is_zero() || dx.norm_inf() == 0.0) return A;
  if (field_.is_constant()) {
    // s integrates to 1/2.
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) A[j] -= 0.5 * dx[k] * field_.component(j, k, x);
    return A;
  }
  const auto& gl = gauss_legendre(rule_.nodes_per_unit);
  const int panels = std::max(1, static_cast<int>(std::ceil(dx.norm())));
  for (int p = 0; p < panels; ++p)
    for (int q = 0; q < gl.size(); ++q) {
      const double s = (p + gl.nodes[q]) / panels;
      const double w = gl.weights[q] / panels;
      const Point z = y + s * dx;
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) A[j] -= w * s * dx[k] * field_.component(j, k, z);
    }
  return A;
}

PhaseEvaluator::PhaseEvaluator(GaugeData gauge, Point base) : gauge_(std::move(gauge)), base_(base) {
  if (base_.dim() == 0) base_ = Point(gauge_.dim());
  if (base_.dim() != gauge_.dim()) throw DimensionError("phase base point dimension does not match field");
}

double PhaseEvaluator::phase(const Point& x, const Point& y) const { return flux(x, y, base_); }

double PhaseEvaluator::phase_by_line_integral(const Point& x, const Point& y) const {
  const int d = dim();
  check_point(x, d, "phase");
  check_point(y, d, "phase");
  const Point dx = x - y;
  if (gauge_.field().is_zero() || dx.norm_inf() == 0.0) return 0.0;
  const auto& gl = gauss_legendre(gauge_.rule().nodes_per_unit);
  const int panels = std::max(1, static_cast<int>(std::ceil(dx.norm())));
  double acc = 0.0;
  for (int p = 0; p < panels; ++p)
    for (int q = 0; q < gl.size(); ++q) {
      const double tau = (p + gl.nodes[q]) / panels;
      acc += gl.weights[q] / panels * gauge_.vector_potential(y + tau * dx, base_).dot(dx);
    }
  return acc;
}

double PhaseEvaluator::flux(const Point& u, const Point& v, const Point& w) const {
  const int d = dim();
  check_point(u, d, "flux");
  check_point(v, d, "flux");
  check_point(w, d, "flux");
  const auto& field = gauge_.field();
  if (field.is_zero()) return 0.0;
  const Point e1 = w - u;
  const Point e2 = v - u;
  if (field.is_constant()) return 0.5 * field.contract(u, e1, e2);
  // Collapsed (Duffy) tensor Gauss-Legendre: alpha = a, beta = (1 - a) c.
  const double side = std::max({e1.norm(), e2.norm(), (v - w).norm()});
  const int panels = std::max(1, static_cast<int>(std::ceil(side / 4.0)));
  const auto& gl = gauss_legendre(gauge_.rule().triangle_nodes);
  double acc = 0.0;
  for (int pa = 0; pa < panels; ++pa)
    for (int qa = 0; qa < gl.size(); ++qa) {
      const double a = (pa + gl.nodes[qa]) / panels;
      const double wa = gl.weights[qa] / panels * (1.0 - a);
      for (int pc = 0; pc < panels; ++pc)
        for (int qc = 0; qc < gl.size(); ++qc) {
          const double c = (pc + gl.nodes[qc]) / panels;
          const double wc = gl.weights[qc] / panels;
          const Point z = u + a * e1 + ((1.0 - a) * c) * e2;
          acc += wa * wc * field.contract(z, e1, e2);
        }
    }
  return finite(acc, "flux");
}

PhaseFn PhaseEvaluator::as_function() const {
  return [pe = *this](const Point& x, const Point& y) { return pe.phase(x, y); };
}

PhaseFn line_integral_phase(std::function<Point(const Point&)> A, int nodes_per_unit) {
  if (nodes_per_unit < 2) throw DomainError("quadrature node count must be at least 2");
  return [A = std::move(A), nodes_per_unit](const Point& x, const Point& y) {
    const Point dx = x - y;
    if (dx.norm_inf() == 0.0) return 0.0;
    const auto& gl = gauss_legendre(nodes_per_unit);
    const int panels = std::max(1, static_cast<int>(std::ceil(dx.norm())));
    double acc = 0.0;
    for (int p = 0; p < panels; ++p)
      for (int q = 0; q < gl.size(); ++q)
        acc += gl.weights[q] / panels * A(y + ((p + gl.nodes[q]) / panels) * dx).dot(dx);
    return acc;
  };
}

}  // namespace beals
