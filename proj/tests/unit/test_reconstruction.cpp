#include <random>

#include "beals/reconstruction.hpp"
#include "doctest.h"

using namespace beals;

namespace {

std::vector<double> grid_points_in(const Grid& g, double lo, double hi) {
  std::vector<double> out;
  for (int k = 0; k < g.N; ++k)
    if (g.coord(k) >= lo - 1e-12 && g.coord(k) <= hi + 1e-12) out.push_back(g.coord(k));
  return out;
}

const MatrixElementOptions kLoose{1e-6, false};

double max_diff(const Symbol& a, const Symbol& b) { return (a.values - b.values).cwiseAbs().maxCoeff(); }

struct Setup1 {
  Grid grid = Grid::commensurate(1, 8.0, 16);
  GaborFrame frame{grid, Window(1), FrameIndexSet(1, 6, 16)};
  PhaseSpaceGrid out{1, grid_points_in(grid, -2.0, 2.0), linspace(-3.0, 3.0, 25)};
};

}  // namespace

TEST_CASE("matrix elements of the identity and a Gram oracle") {
  Setup1 s;
  const auto I = multiplication_kernel(s.grid, [](const Point&) { return Complex(1.0); });
  const auto M = matrix_elements(I, s.frame, {}, kLoose);
  const auto& idx = s.frame.index();
  for (auto [g, gp] : M.pairs())
    if ((idx.gamma_point(g) - idx.gamma_point(gp)).norm_inf() >= 2.0) CHECK(M.block(g, gp)->cwiseAbs().maxCoeff() < 1e-15);

  const auto K = quantize(make_symbol({"gauss"}, 1), s.grid);
  const auto T = matrix_elements(K, s.frame);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> ug(0, idx.gamma_count() - 1), um(0, idx.modulation_count() - 1);
  for (int i = 0; i < 20; ++i) {
    const auto g = ug(rng), gp = ug(rng), m = um(rng), mp = um(rng);
    const Complex direct = s.frame.frame_vector(g, m).inner(apply(K, s.frame.frame_vector(gp, mp)));
    CHECK(std::abs(T.at(g, gp, m, mp) - direct) < 1e-14);
  }

  const double bound = matrix_element_bound(s.frame, operator_norm_estimate(K).value);
  BoundChecker bc(bound);
  T.for_each_block([&](std::size_t g, std::size_t gp, const Eigen::MatrixXcd& b) { bc.add_block(g, gp, b); });
  CHECK(bc.violations() == 0);
  CHECK(bc.checked() == idx.gamma_count() * idx.gamma_count() * idx.modulation_count() * idx.modulation_count());
  CHECK(bc.max_ratio() <= 1.0);
}

TEST_CASE("pair selection and streaming agree with the stored tensor") {
  Setup1 s;
  const auto K = quantize(make_symbol({"gauss"}, 1), s.grid);
  const PairSelection sel{1, 2.5};
  const auto T = matrix_elements(K, s.frame, sel);
  std::size_t n = 0;
  for_each_matrix_block(K, s.frame, sel, [&](std::size_t g, std::size_t gp, const Eigen::MatrixXcd& b) {
    ++n;
    CHECK((b - *T.block(g, gp)).cwiseAbs().maxCoeff() == 0.0);
  });
  CHECK(n == T.block_count());
  CHECK(n == 13);  // |gamma - gamma'| <= 1 with |kappa| < 2.5
  CHECK(T.block(0, 12) == nullptr);
  CHECK(T.at(0, 12, 0, 0) == 0.0);
}

TEST_CASE("decay reports") {
  Setup1 s;
  SUBCASE("smooth symbol decays fast in m - m'") {
    const auto T = matrix_elements(quantize(make_symbol({"gauss"}, 1), s.grid), s.frame);
    const auto r = decay_report(T);
    CHECK_FALSE(r.outside_hypotheses);
    // limited by the window transform, roughly |g^(k/2)|^2
    CHECK(r.modulation_fit.exponent > 2.0);
    for (int k = 1; k <= 12; ++k) CHECK(r.modulation_ratio(k) < r.modulation_ratio(k - 1));
    for (std::size_t j = 1; j < r.gamma_shell_max.size(); ++j) CHECK(r.gamma_shell_max[j] <= r.gamma_shell_max[j - 1]);
    CHECK(r.gamma_shell_max.back() < 1e-12 * r.peak);
  }
  SUBCASE("a jump in x is flagged") {
    const auto K = multiplication_kernel(s.grid, [](const Point& x) { return Complex(x[0] >= 0 ? 1.0 : -1.0); });
    const auto r = decay_report(matrix_elements(K, s.frame, {}, kLoose));
    CHECK(r.outside_hypotheses);
    CHECK(r.modulation_fit.exponent < 1.5);
  }
}

TEST_CASE("window cross spectrum") {
  const Window w(1);
  const Complex f0 = window_cross_spectrum(w, Point{0.0}, Point{0.0}, Point{0.0});
  CHECK(std::abs(f0 - 1.0 / kPi) < 1e-10);
  for (double kp : {-3.0, 0.5, 2.0})
    CHECK(std::abs(window_cross_spectrum(w, Point{0.3}, Point{1.7}, Point{kp})) ==
          doctest::Approx(std::abs(window_cross_spectrum(w, Point{0.3}, Point{1.7}, Point{0.0}))).epsilon(1e-12));
  CHECK(window_cross_spectrum(w, Point{1.0}, Point{0.2}, Point{0.0}) == 0.0);
  CHECK(window_cross_spectrum(w, Point{-1.2}, Point{0.2}, Point{1.0}) == 0.0);
  for (double z : {5.0, 10.0, 20.0, 40.0})
    CHECK(std::abs(window_cross_spectrum(w, Point{0.2}, Point{z}, Point{0.0})) <= std::abs(f0) / (1 + z * z));
  // lattice form approaches the integral
  const Complex c = window_cross_spectrum(w, Point{0.25}, Point{1.3}, Point{1.0});
  CHECK(std::abs(window_cross_spectrum_lattice(w, 0.25, 1.3, 1.0, 0.01) - c) < 1e-9);
  const Window w2(2);
  CHECK(std::abs(window_cross_spectrum(w2, Point{0.0, 0.0}, Point{0.0, 0.0}, Point{0.0, 0.0}) - 1.0 / (kPi * kPi)) < 1e-10);
}

TEST_CASE("non-magnetic extraction in d = 1") {
  Setup1 s;
  SUBCASE("identity") {
    const auto T = matrix_elements(quantize(make_symbol({"one"}, 1), s.grid), s.frame, {}, kLoose);
    double tail = -1;
    const auto a0 = extract_symbol(T, s.frame, 0.0, s.out, nullptr, {}, false, &tail);
    CHECK((a0.values.array() - 1.0).abs().maxCoeff() < 1e-10);
    CHECK(tail >= 0.0);
    const auto ag = extract_symbol(T, s.frame, 0.0, s.out, nullptr, {}, true);
    CHECK(max_diff(a0, ag) < 1e-10);
  }
  const auto a_in = make_symbol({"gauss"}, 1);
  const auto T = matrix_elements(quantize(a_in, s.grid), s.frame);
  SUBCASE("regularized kernel matches the grid extraction") {
    const double eps = 0.05;
    const auto ae = extract_symbol(T, s.frame, eps, s.out);
    const double h = s.grid.h();
    for (std::size_t ti : {std::size_t(0), s.out.t_axis.size() / 2, s.out.t_axis.size() - 3}) {
      const double t = s.out.t_axis[ti];
      const int tau = s.grid.nearest(t);
      const int km = std::min(tau, s.grid.N - 1 - tau);
      std::vector<Complex> ker;
      for (int k = -km; k <= km; ++k) ker.push_back(regularized_kernel(T, s.frame, eps, Point{t}, Point{2 * h * k}));
      for (std::size_t xi = 0; xi < s.out.xi_axis.size(); xi += 4) {
        Complex acc = 0;
        for (int k = -km; k <= km; ++k) acc += std::polar(2 * h, -s.out.xi_axis[xi] * 2 * h * k) * ker[k + km];
        CHECK(std::abs(acc - ae.values(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(xi))) < 1e-10);
      }
    }
    CHECK_THROWS_AS(regularized_kernel(T, s.frame, 0.0, Point{0.0}, Point{0.0}), DomainError);
  }
  SUBCASE("cross-spectrum series equals the unregularized grid path") {
    const auto a0 = extract_symbol(T, s.frame, 0.0, s.out);
    const auto ag = extract_symbol(T, s.frame, 0.0, s.out, nullptr, {}, true);
    CHECK(max_diff(a0, ag) < 1e-10);
  }
  SUBCASE("eps schedule is Cauchy and round trip is accurate") {
    SymbolReconstructor rec(s.frame, s.out, nullptr, {0.2, 0.1, 0.05, 0.025}, true);
    T.for_each_block([&](std::size_t g, std::size_t gp, const Eigen::MatrixXcd& b) { rec.add_block(g, gp, b); });
    const auto res = rec.finish();
    REQUIRE(res.a0);
    CHECK(res.zero_path == "cross-spectrum");
    double prev = 1e300;
    for (const auto& ae : res.a_eps) {
      const double d = max_diff(ae, *res.a0);
      CHECK(d < prev);
      prev = d;
    }
    const auto ref = sample_symbol(a_in, s.out);
    const auto err = roundtrip_error(ref, *res.a0, Box::cube(1, -2, 2), Box::cube(1, -3, 3));
    CHECK(err.points == ref.values.size());
    CHECK(err.sup < 1e-3);
    const auto rich = richardson(res.a_eps[3], 0.025, res.a_eps[2], 0.05);
    CHECK(max_diff(rich, *res.a0) < max_diff(res.a_eps[3], *res.a0));
  }
  SUBCASE("output t must be on the grid") {
    PhaseSpaceGrid bad{1, {0.01}, {0.0}};
    CHECK_THROWS_AS(extract_symbol(T, s.frame, 0.1, bad), GridError);
  }
}

TEST_CASE("richardson is exact on linear families") {
  PhaseSpaceGrid g{1, {0.0, 1.0}, {0.0}};
  Symbol a0{g, SymbolMatrix::Constant(2, 1, Complex(1, 2))}, c{g, SymbolMatrix::Constant(2, 1, Complex(-3, 1))};
  Symbol s1{g, a0.values + 0.1 * c.values}, s2{g, a0.values + 0.2 * c.values};
  CHECK(max_diff(richardson(s1, 0.1, s2, 0.2), a0) < 1e-14);
  CHECK_THROWS_AS(richardson(s2, 0.2, s1, 0.1), DomainError);
}

TEST_CASE("flux decomposition of the phase") {
  for (auto field : {MagneticField::constant(1.3), MagneticField::cosine(0.8)}) {
    const PhaseEvaluator pe(GaugeData(field), Point{0.2, -0.1});
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 50; ++i) {
      const Point x{u(rng), u(rng)}, xp{u(rng), u(rng)}, g{u(rng), u(rng)}, gp{u(rng), u(rng)};
      const double lhs = pe.phase(x, g) - pe.phase(xp, gp) - pe.phase(x, xp);
      const double rhs = -pe.phase(g, gp) + pe.flux(g, gp, xp) + pe.flux(x, g, xp);
      CHECK(std::abs(std::remainder(lhs - rhs, kTwoPi)) < 1e-9);
    }
  }
}

TEST_CASE("magnetic extraction in d = 2") {
  const Grid grid = Grid::commensurate(2, 3.2, 4);
  const FrameIndexSet idx(2, 2, 4);
  const PhaseSpaceGrid out{2, grid_points_in(grid, -0.8, 0.8), linspace(-1.5, 1.5, 7)};
  const auto a = make_symbol({"gauss"}, 2);

  SUBCASE("flux series equals the unregularized grid path") {
    const PhaseEvaluator pe(GaugeData(MagneticField::constant(1.0)));
    const GaborFrame frame(grid, Window(2), idx, pe.as_function());
    const auto T = matrix_elements(quantize(a, grid, pe.as_function()), frame, {}, kLoose);
    ExtractOptions opt;
    opt.check_tail = false;
    const auto a0 = extract_symbol(T, frame, 0.0, out, &pe, opt);
    const auto ag = extract_symbol(T, frame, 0.0, out, &pe, opt, true);
    CHECK(max_diff(a0, ag) < 1e-10);
    CHECK_THROWS_AS(extract_symbol(T, frame, 0.0, out, nullptr, opt), DomainError);
  }
  SUBCASE("zero field reproduces the non-magnetic path") {
    const PhaseEvaluator pe(GaugeData(MagneticField::zero(2)));
    const GaborFrame fm(grid, Window(2), idx, pe.as_function());
    const GaborFrame f0(grid, Window(2), idx);
    const auto K = quantize(a, grid);
    const auto Tm = matrix_elements(K, fm, {}, kLoose), T0 = matrix_elements(K, f0, {}, kLoose);
    ExtractOptions opt;
    opt.check_tail = false;
    CHECK(max_diff(extract_symbol(Tm, fm, 0.0, out, &pe, opt), extract_symbol(T0, f0, 0.0, out, nullptr, opt)) < 1e-10);
    CHECK(max_diff(extract_symbol(Tm, fm, 0.1, out, &pe), extract_symbol(T0, f0, 0.1, out)) < 1e-12);
  }
}
