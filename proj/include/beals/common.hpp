#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numbers>
#include <stdexcept>
#include <string>

namespace beals {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr int kMaxDim = 3;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Raised when an index truncation leaves significant mass uncovered.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class GridError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Small fixed-capacity point in R^d, d <= kMaxDim.
class Point {
 public:
  Point() = default;
  explicit Point(int dim) : dim_(dim) { check_dim(dim); }
  Point(std::initializer_list<double> xs) : dim_(static_cast<int>(xs.size())) {
    check_dim(dim_);
    std::copy(xs.begin(), xs.end(), v_.begin());
  }

  static Point filled(int dim, double value) {
    Point p(dim);
    for (int a = 0; a < dim; ++a) p.v_[a] = value;
    return p;
  }

  int dim() const { return dim_; }
  double& operator[](int a) { return v_[a]; }
  double operator[](int a) const { return v_[a]; }
  const double* data() const { return v_.data(); }

  Point& operator+=(const Point& o) {
    for (int a = 0; a < dim_; ++a) v_[a] += o.v_[a];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int a = 0; a < dim_; ++a) v_[a] -= o.v_[a];
    return *this;
  }
  Point& operator*=(double s) {
    for (int a = 0; a < dim_; ++a) v_[a] *= s;
    return *this;
  }
  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend bool operator==(const Point& a, const Point& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a.v_[i] != b.v_[i]) return false;
    return true;
  }

  double dot(const Point& o) const {
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) s += v_[a] * o.v_[a];
    return s;
  }
  double norm() const { return std::sqrt(dot(*this)); }
  double norm_inf() const {
    double m = 0.0;
    for (int a = 0; a < dim_; ++a) m = std::max(m, std::abs(v_[a]));
    return m;
  }
  bool is_finite() const {
    for (int a = 0; a < dim_; ++a)
      if (!std::isfinite(v_[a])) return false;
    return true;
  }

 private:
  static void check_dim(int dim) {
    if (dim < 0 || dim > kMaxDim) throw DimensionError("point dimension must be in [0, 3]");
  }
  std::array<double, kMaxDim> v_{};
  int dim_ = 0;
};

/// Phase function phi(x, y) in radians.
using PhaseFn = std::function<double(const Point&, const Point&)>;

/// Japanese bracket <k> = sqrt(1 + k^2).
inline double bracket(double k) { return std::sqrt(1.0 + k * k); }

inline void require_same_dim(const Point& a, const Point& b, const char* what) {
  if (a.dim() != b.dim()) throw DimensionError(std::string(what) + ": dimension mismatch");
}

inline int ipow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace beals
