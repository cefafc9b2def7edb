#include <Eigen/SVD>

#include "beals/weyl.hpp"
#include "doctest.h"

using namespace beals;

namespace {

double rel(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) { return (a - b).norm() / b.norm(); }

// Gaussian bump with analytic gradient.
struct Bump {
  Point c;
  double s;
  Complex k;
  Complex operator()(const Point& x) const {
    const Point r = x - c;
    return std::exp(-r.dot(r) / (2 * s * s) + Complex(0, 1) * k * x[0]);
  }
  Complex d(const Point& x, int j) const {
    const Point r = x - c;
    return (-r[j] / (s * s) + (j == 0 ? Complex(0, 1) * k : Complex(0))) * (*this)(x);
  }
};

}  // namespace

TEST_CASE("quantization grid") {
  const Grid g(1, 8.0, 64);
  const auto ps = quantization_grid(g);
  CHECK(ps.t_axis.size() == 127);
  CHECK(ps.xi_axis.size() == 65);
  CHECK(ps.xi_axis.front() == doctest::Approx(-kPi / (2 * g.h())));
  CHECK(ps.xi_axis.back() == doctest::Approx(kPi / (2 * g.h())));
}

TEST_CASE("non-magnetic identities in d = 1") {
  const Grid grid(1, 8.0, 256);
  const Bump b{Point{0.4}, 0.9, 0.7};
  const auto f = GridFunction::from_function(grid, b);

  SUBCASE("quantize(1) is the identity on band-limited f") {
    const auto K = quantize(make_symbol({"one"}, 1), grid);
    CHECK(rel(apply(K, f).values(), f.values()) < 1e-8);
  }
  SUBCASE("quantize(xi) is -i d/dx") {
    const auto K = quantize(make_symbol({"xi"}, 1), grid);
    const auto df = GridFunction::from_function(grid, [&](const Point& x) { return Complex(0, -1) * b.d(x, 0); });
    CHECK(rel(apply(K, f).values(), df.values()) < 1e-6);
  }
  SUBCASE("sampled and functional symbols agree") {
    const auto a = make_symbol({"gauss"}, 1);
    const auto K1 = quantize(a, grid);
    const auto K2 = quantize(sample_symbol(a, quantization_grid(grid)), grid);
    CHECK((K1.K - K2.K).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(quantize(sample_symbol(a, quantization_grid(Grid(1, 8.0, 128))), grid), GridError);
  }
  SUBCASE("real symbols give Hermitian kernels, quantize is linear") {
    const auto a = make_symbol({"gauss_modulated"}, 1);
    const auto K = quantize(a, grid);
    CHECK((K.K - K.K.adjoint()).cwiseAbs().maxCoeff() < 1e-14 * K.K.cwiseAbs().maxCoeff());
    const auto Kx = quantize(make_symbol({"xi"}, 1), grid);
    const auto Ksum = quantize([&](const Point& t, const Point& xi) { return 2.0 * a(t, xi) + Complex(0, 3) * xi[0]; },
                               grid);
    CHECK((Ksum.K - (2.0 * K.K + Complex(0, 3) * Kx.K)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("zero kernel") {
    const OperatorKernel Z(grid, Eigen::MatrixXcd::Zero(256, 256));
    CHECK(apply(Z, f).values().norm() == 0.0);
  }
}

TEST_CASE("Gaussian symbol matches a nested quadrature of the Weyl integral") {
  const Grid grid(1, 6.0, 96);
  const auto K = quantize(make_symbol({"gauss"}, 1), grid);
  const Bump b1{Point{0.3}, 0.8, 0.5}, b2{Point{-0.2}, 0.6, -0.4};
  const auto g1 = GridFunction::from_function(grid, b1);
  const auto g2 = GridFunction::from_function(grid, b2);
  const Complex got = g1.inner(apply(K, g2));
  // Brute-force trapezoid in x, x', xi.
  const int n = 241, nxi = 241;
  const double lo = -6, hi = 6, dx = (hi - lo) / (n - 1), dxi = 16.0 / (nxi - 1);
  Complex ref = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + i * dx;
    for (int k = 0; k < n; ++k) {
      const double xp = lo + k * dx;
      Complex inner = 0.0;
      for (int m = 0; m < nxi; ++m) {
        const double xi = -8.0 + m * dxi;
        const double t = 0.5 * (x + xp);
        inner += std::polar(std::exp(-t * t - xi * xi), xi * (x - xp));
      }
      ref += std::conj(b1(Point{x})) * inner * dxi * b2(Point{xp});
    }
  }
  ref *= dx * dx / kTwoPi;
  CHECK(std::abs(got - ref) < 1e-8);
}

TEST_CASE("position commutator") {
  const Grid grid(1, 8.0, 256);
  const Bump b{Point{-0.3}, 1.0, 0.3};
  const auto f = GridFunction::from_function(grid, b);
  const auto xf = GridFunction::from_function(grid, [&](const Point& x) { return x[0] * b(x); });
  SUBCASE("diagonal identity commutes exactly") {
    const auto C = commutator_position(multiplication_kernel(grid, [](const Point&) { return Complex(1.0); }), 0);
    CHECK(C.K.cwiseAbs().maxCoeff() == 0.0);
    const auto Cq = commutator_position(quantize(make_symbol({"one"}, 1), grid), 0);
    CHECK(apply(Cq, f).values().norm() / f.values().norm() < 1e-8);
  }
  SUBCASE("algebraic identity at grid level") {
    const auto K = quantize(make_symbol({"gauss_modulated"}, 1), grid);
    const auto C = commutator_position(K, 0);
    const auto Kf = apply(K, f);
    Eigen::VectorXcd xKf(Kf.values().size());
    for (Eigen::Index i = 0; i < xKf.size(); ++i) xKf[i] = grid.point(static_cast<std::size_t>(i))[0] * Kf.values()[i];
    const Eigen::VectorXcd expect = xKf - apply(K, xf).values();
    CHECK((apply(C, f).values() - expect).norm() < 1e-10 * std::max(1.0, expect.norm()));
  }
  SUBCASE("canonical commutation [X, D] = i") {
    const auto C = commutator_position(quantize(make_symbol({"xi"}, 1), grid), 0);
    CHECK(rel(apply(C, f).values(), Complex(0, 1) * f.values()) < 1e-6);
  }
  CHECK_THROWS_AS(commutator_position(multiplication_kernel(grid, [](const Point&) { return 1.0; }), 1),
                  DimensionError);
}

TEST_CASE("momentum commutator") {
  const Grid grid(1, 8.0, 256);
  const Bump b{Point{0.2}, 1.0, 0.0};
  const auto f = GridFunction::from_function(grid, b);
  SUBCASE("identity commutes") {
    const auto I = multiplication_kernel(grid, [](const Point&) { return Complex(1.0); });
    CHECK(apply(commutator_momentum(I, 0).kernel, f).values().norm() < 1e-8);
    const auto Q = quantize(make_symbol({"one"}, 1), grid);
    CHECK(apply(commutator_momentum(Q, 0).kernel, f).values().norm() < 1e-8);
  }
  SUBCASE("[D, X] = -i with an eighth-order stencil") {
    const auto K = quantize(make_symbol({"x"}, 1), grid);
    CommutatorOptions opt;
    opt.order = 8;
    const auto C = commutator_momentum(K, 0, nullptr, opt);
    CHECK(rel(apply(C.kernel, f).values(), Complex(0, -1) * f.values()) < 1e-6);
  }
  SUBCASE("contract against the grid commutator") {
    const auto K = quantize(make_symbol({"gauss_modulated"}, 1), grid);
    const auto C = commutator_momentum(K, 0);
    const Eigen::VectorXcd expect =
        momentum_apply(apply(K, f), 0).values() - apply(K, momentum_apply(f, 0)).values();
    CHECK((apply(C.kernel, f).values() - expect).norm() < 1e-10);
  }
  SUBCASE("coarse grid is detected") {
    const Grid coarse(1, 8.0, 16);
    const auto K = quantize(make_symbol({"gauss_modulated", 0, 0.3, 1.0, 0.5, 6.0}, 1), coarse);
    CHECK_THROWS_AS(commutator_momentum(K, 0), GridError);
  }
}

TEST_CASE("magnetic quantization in d = 2") {
  const Grid grid(2, 4.0, 64);
  const PhaseEvaluator pe(GaugeData(MagneticField::constant(1.0)));
  const Bump b{Point{0.3, -0.2}, 0.7, 0.5};
  const auto f = GridFunction::from_function(grid, b);
  SUBCASE("quantize(xi_j) = Pi_j") {
    for (int j = 0; j < 2; ++j) {
      const auto K = quantize(make_symbol({"xi", j}, 2), grid, pe.as_function());
      const auto pif = GridFunction::from_function(grid, [&](const Point& x) {
        return Complex(0, -1) * b.d(x, j) - pe.gauge().vector_potential(x, Point{0, 0})[j] * b(x);
      });
      const double e = rel(apply(K, f).values(), pif.values());
      MESSAGE("magnetic xi_" << j << " relative error " << e);
      CHECK(e < 1e-4);
      CHECK((K.K - K.K.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("magnetic momentum commutator converges at second order") {
  const PhaseEvaluator pe(GaugeData(MagneticField::constant(1.0)));
  const auto a = make_symbol({"gauss_modulated"}, 2);
  const Bump b{Point{0.2, 0.1}, 0.6, 0.0};
  std::vector<double> defect;
  for (int N : {20, 40}) {
    const Grid grid(2, 3.0, N);
    const auto K = quantize(a, grid, pe.as_function());
    const auto f = GridFunction::from_function(grid, b);
    const auto C = commutator_momentum(K, 0, &pe);
    CommutatorOptions exact;
    exact.order = 8;
    const Eigen::VectorXcd ref =
        momentum_apply(apply(K, f), 0, &pe, exact).values() - apply(K, momentum_apply(f, 0, &pe, exact)).values();
    defect.push_back((apply(C.kernel, f).values() - ref).norm() * grid.h());
  }
  const double order = std::log2(defect[0] / defect[1]);
  MESSAGE("defects " << defect[0] << " " << defect[1] << " order " << order);
  CHECK(order == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("operator norm estimate") {
  const Grid grid(1, 6.0, 96);
  SUBCASE("identity and diagonal") {
    CHECK(operator_norm_estimate(multiplication_kernel(grid, [](const Point&) { return 1.0; })).value ==
          doctest::Approx(1.0).epsilon(1e-8));
    // Compressing the band projector to the box loses a little.
    const double q = operator_norm_estimate(quantize(make_symbol({"one"}, 1), grid)).value;
    CHECK(q <= 1.0 + 1e-12);
    CHECK(q > 1.0 - 1e-4);
    CHECK(operator_norm_estimate(multiplication_kernel(grid, [](const Point&) { return 2.0; })).value ==
          doctest::Approx(2.0).epsilon(1e-10));
  }
  SUBCASE("matches a dense SVD") {
    for (const char* kind : {"gauss", "gauss_modulated"}) {
      const auto K = quantize(make_symbol({kind}, 1), grid);
      const auto est = operator_norm_estimate(K);
      Eigen::BDCSVD<Eigen::MatrixXcd> svd(K.weight() * K.K);
      CHECK(est.converged);
      CHECK(std::abs(est.value - svd.singularValues()[0]) < 1e-6);
    }
    // Op(exp(-t^2 - xi^2)) is half the ground-state projector.
    CHECK(operator_norm_estimate(quantize(make_symbol({"gauss"}, 1), grid)).value == doctest::Approx(0.5).epsilon(1e-8));
  }
}

TEST_CASE("gauge covariance") {
  const Grid grid(2, 3.0, 24);
  const double b = 1.0;
  const PhaseEvaluator pe(GaugeData(MagneticField::constant(b)));
  const auto a = make_symbol({"gauss_modulated"}, 2);
  const auto K = quantize(a, grid, pe.as_function());
  auto residual = [&](const OperatorKernel& Kp, const std::function<double(const Point&)>& chi) {
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const Complex conj = std::polar(1.0, chi(grid.point(i)) - chi(grid.point(k)));
        worst = std::max(worst, std::abs(Kp.K(i, k) - conj * K.K(i, k)));
      }
    return worst / K.K.cwiseAbs().maxCoeff();
  };
  SUBCASE("Landau gauge") {
    const auto landau = line_integral_phase([b](const Point& x) { return Point{0.0, b * x[0]}; });
    const auto KL = quantize(a, grid, landau);
    CHECK(residual(KL, [b](const Point& x) { return 0.5 * b * x[0] * x[1]; }) < 1e-12);
  }
  SUBCASE("moving the base point is a gauge change") {
    const Point y0{0.7, -1.1};
    const PhaseEvaluator moved(GaugeData(MagneticField::constant(b)), y0);
    const auto KM = quantize(a, grid, moved.as_function());
    CHECK(residual(KM, [&](const Point& x) { return -pe.phase(x, y0); }) < 1e-12);
  }
}
