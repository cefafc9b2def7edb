#pragma once

#include <functional>
#include <string>
#include <vector>

#include "beals/common.hpp"

namespace beals {

/// Axis-aligned box [lo, hi] used for sampled bound checks.
struct Box {
  Point lo;
  Point hi;
  static Box cube(int dim, double lo, double hi) { return {Point::filled(dim, lo), Point::filled(dim, hi)}; }
  bool contains(const Point& x) const;
};

/// Sup norms of B and its derivatives over a sampled box.
struct FieldBounds {
  double sup_field = 0.0;
  std::vector<double> sup_derivative;  // index = derivative order, starting at 1
  int samples = 0;
};

/// Closed, antisymmetric 2-form B_jk on R^d.
class MagneticField {
 public:
  enum class Kind { Zero, Constant, Cosine, Custom };
  using Component = std::function<double(const Point&)>;

  static MagneticField zero(int dim);
  /// B_12 = b in d = 2.
  static MagneticField constant(double b);
  /// B_12 = b (1 + cos(x1) cos(x2) / 2) in d = 2.
  static MagneticField cosine(double b);
  /// Components for j < k in the order (0,1), (0,2), ..., (1,2), ...
  /// Derivatives are taken by central differences.
  static MagneticField custom(int dim, std::vector<Component> upper, int derivative_order);

  int dim() const { return dim_; }
  Kind kind() const { return kind_; }
  double strength() const { return b_; }
  int derivative_order() const { return derivative_order_; }
  bool is_zero() const { return kind_ == Kind::Zero; }
  bool is_constant() const { return kind_ == Kind::Zero || kind_ == Kind::Constant; }

  double component(int j, int k, const Point& x) const;
  /// Partial derivative D^alpha B_jk(x), alpha a multi-index of length d.
  double derivative(int j, int k, const std::array<int, kMaxDim>& alpha, const Point& x) const;
  /// sum_{j<k} B_jk(x) (e1_j e2_k - e1_k e2_j).
  double contract(const Point& x, const Point& e1, const Point& e2) const;

  FieldBounds bounds(const Box& box, int samples_per_axis, int max_order) const;
  /// max over samples of |d_j B_kl + d_k B_lj + d_l B_jk|; zero when d = 2.
  double closedness_residual(const Box& box, int samples_per_axis) const;

  static Kind parse_kind(const std::string& name);

 private:
  MagneticField(int dim, Kind kind, double b) : dim_(dim), kind_(kind), b_(b) {}
  double upper(int j, int k, const Point& x) const;
  int pair_index(int j, int k) const;

  int dim_ = 2;
  Kind kind_ = Kind::Zero;
  double b_ = 0.0;
  int derivative_order_ = 8;
  std::vector<Component> custom_;
};

/// Quadrature settings for line and triangle integrals.
struct QuadratureRule {
  int nodes_per_unit = 32;    // composite Gauss-Legendre on lines
  int triangle_nodes = 32;    // per barycentric direction
};

/// Transversal gauge A(x, y) built from a field.
class GaugeData {
 public:
  explicit GaugeData(MagneticField field, QuadratureRule rule = {});

  const MagneticField& field() const { return field_; }
  const QuadratureRule& rule() const { return rule_; }
  int dim() const { return field_.dim(); }

  /// A_j(x, y) = -sum_k int_0^1 s (x_k - y_k) B_jk(y + s (x - y)) ds.
  Point vector_potential(const Point& x, const Point& y) const;

 private:
  MagneticField field_;
  QuadratureRule rule_;
};

/// Phase phi(x, y) and triangle flux f(u, v, w).
///
/// Orientation: f(u, v, w) integrates B over the triangle parametrized by
/// u + a (w - u) + c (v - u), which makes phi(u,v) + phi(v,w) - phi(u,w) = f(u,v,w)
/// and f(x, y, base) = phi(x, y).
class PhaseEvaluator {
 public:
  explicit PhaseEvaluator(GaugeData gauge, Point base = Point());

  const GaugeData& gauge() const { return gauge_; }
  const Point& base() const { return base_; }
  int dim() const { return gauge_.dim(); }

  double phase(const Point& x, const Point& y) const;
  /// Same quantity through the line integral of A(., base) along y -> x.
  double phase_by_line_integral(const Point& x, const Point& y) const;
  double flux(const Point& u, const Point& v, const Point& w) const;

  PhaseFn as_function() const;

 private:
  GaugeData gauge_;
  Point base_;
};

/// Phase of an arbitrary vector potential: int_{y -> x} A, composite Gauss-Legendre.
/// Used to quantize in gauges other than the transversal one.
PhaseFn line_integral_phase(std::function<Point(const Point&)> A, int nodes_per_unit = 32);

}  // namespace beals
