#include <random>

#include "beals/gabor_frame.hpp"
#include "beals/magnetic_geometry.hpp"
#include "doctest.h"

using namespace beals;

namespace {

GridFunction gaussian(const Grid& grid, const Point& c, double width, double k = 0.0) {
  return GridFunction::from_function(grid, [&](const Point& x) {
    const Point r = x - c;
    return std::exp(-r.dot(r) / (2 * width * width)) * std::polar(1.0, k * x[0]);
  });
}

}  // namespace

TEST_CASE("window partition of unity and support") {
  const Window w(1);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 1000; ++i) CHECK(std::abs(w.partition_sum1d(u(rng)) - 1.0) < 1e-12);
  CHECK(w.value1d(1.0) == 0.0);
  CHECK(w.value1d(-1.3) == 0.0);
  CHECK(w.value1d(0.37) == w.value1d(-0.37));
  CHECK(w.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
  const Window w2(2);
  CHECK(w2(Point{0.3, -0.4}) == doctest::Approx(w.value1d(0.3) * w.value1d(-0.4)));
  CHECK(std::abs(w2.partition_sum(Point{0.3, 2.7}) - 1.0) < 1e-12);
  CHECK_THROWS_AS(Window(1, 0.5), DomainError);
  CHECK_THROWS_AS(build_window("box", 1), DomainError);
}

TEST_CASE("frame vectors") {
  const Grid grid(1, 4.0, 128);
  const GaborFrame frame(grid, Window(1), FrameIndexSet(1, 2, 8));
  SUBCASE("origin vector is the scaled window") {
    const auto g = frame.frame_vector(frame.index().gamma_flat({0}), frame.index().modulation_flat({0}));
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK(g[i].real() == doctest::Approx(Window(1).value1d(grid.point(i)[0]) / std::sqrt(kTwoPi)));
  }
  SUBCASE("norm does not depend on gamma or m") {
    const double ref = frame.frame_vector(0, 0).norm();
    for (std::size_t gi = 0; gi < frame.index().gamma_count(); ++gi)
      for (std::size_t mi = 0; mi < frame.index().modulation_count(); mi += 3)
        CHECK(frame.frame_vector(gi, mi).norm() == doctest::Approx(ref).epsilon(1e-13));
    CHECK(ref == doctest::Approx(1.0 / std::sqrt(kTwoPi)).epsilon(1e-8));
  }
  SUBCASE("support must fit the box") {
    CHECK_THROWS_AS(GaborFrame(grid, Window(1), FrameIndexSet(1, 4, 8)), GridError);
    CHECK_THROWS_AS(GaborFrame(grid, Window(1), FrameIndexSet(1, 2, 80)), GridError);
  }
}

TEST_CASE("magnetic frame vector carries the phase") {
  const Grid grid(2, 3.0, 24);
  PhaseEvaluator pe(GaugeData(MagneticField::constant(1.0)));
  const FrameIndexSet idx(2, 1, 3);
  const GaborFrame mag(grid, Window(2), idx, pe.as_function());
  const GaborFrame flat(grid, Window(2), idx);
  const std::size_t gi = idx.gamma_flat({1, -1, 0}), mi = idx.modulation_flat({2, 0, 0});
  const auto a = mag.frame_vector(gi, mi), b = flat.frame_vector(gi, mi);
  int checked = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(b[i]) < 1e-12) continue;
    const Complex expected = std::polar(1.0, pe.phase(grid.point(i), idx.gamma_point(gi)));
    CHECK(std::abs(a[i] / b[i] - expected) < 1e-12);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("analysis and synthesis") {
  SUBCASE("zero in, zero out") {
    const Grid grid(1, 8.0, 512);
    const GaborFrame frame(grid, Window(1), FrameIndexSet(1, 7, 16));
    const auto c = frame.analyze(GridFunction(grid));
    CHECK(c.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(frame.synthesize(c).values().norm() == 0.0);
  }
  SUBCASE("single coefficient synthesizes one frame vector") {
    const Grid grid(1, 8.0, 512);
    const GaborFrame frame(grid, Window(1), FrameIndexSet(1, 7, 16));
    FrameCoefficients c;
    c.index = frame.index();
    c.values = Eigen::MatrixXcd::Zero(15, 33);
    c.values(4, 20) = 1.0;
    CHECK((frame.synthesize(c).values() - frame.frame_vector(4, 20).values()).norm() < 1e-14);
  }
  SUBCASE("commensurate grid is exactly tight, flat and magnetic") {
    const int M = 8;
    const Grid grid = Grid::commensurate(2, 5.0, M);
    PhaseEvaluator pe(GaugeData(MagneticField::constant(1.0)));
    for (int magnetic = 0; magnetic < 2; ++magnetic) {
      const GaborFrame frame(grid, Window(2), FrameIndexSet(2, 4, M),
                             magnetic ? std::optional<PhaseFn>(pe.as_function()) : std::nullopt);
      CHECK(frame.exactly_tight());
      const auto f = gaussian(grid, Point{0.3, -0.2}, 0.5, 1.1);
      const auto c = frame.analyze(f);
      const double nf = f.norm() * f.norm();
      CHECK(std::abs(c.energy() - nf) / nf < 1e-10);
      const auto g = frame.synthesize(c);
      CHECK((g.values() - f.values()).norm() / f.values().norm() < 1e-10);
      const auto g2 = frame.synthesize(frame.analyze(g));
      CHECK((g2.values() - g.values()).norm() / g.values().norm() < 1e-10);
    }
  }
  SUBCASE("truncation error when Gamma misses the support") {
    const Grid grid(1, 8.0, 512);
    const GaborFrame frame(grid, Window(1), FrameIndexSet(1, 1, 16));
    CHECK_THROWS_AS(frame.analyze(gaussian(grid, Point{0.0}, 2.0)), TruncationError);
  }
  SUBCASE("off-period grid: idempotence limited by the window tail") {
    const Grid grid(1, 8.0, 512);
    const GaborFrame frame(grid, Window(1), FrameIndexSet(1, 7, 16));
    const auto f = gaussian(grid, Point{0.5}, 1.0);
    const auto p1 = frame.synthesize(frame.analyze(f));
    const auto p2 = frame.synthesize(frame.analyze(p1));
    const double drift = (p2.values() - p1.values()).norm() / p1.values().norm();
    MESSAGE("second application drift " << drift);
    CHECK(drift < 5e-3);
  }
}

TEST_CASE("coefficient decay report") {
  const Grid grid(1, 8.0, 512);
  const GaborFrame frame(grid, Window(1), FrameIndexSet(1, 7, 16));
  SUBCASE("gaussian decays super-polynomially") {
    // The windowed coefficients inherit the root-exponential Fourier decay of
    // the bump, so the local exponent grows with the shell.
    const GaborFrame wide(grid, Window(1), FrameIndexSet(1, 7, 64));
    const auto c = wide.analyze(gaussian(grid, Point{0.2}, 1.0));
    const auto early = coefficient_decay_report(c, {4, 16, 1e-12, 1.5});
    const auto late = coefficient_decay_report(c, {32, 64, 1e-12, 1.5});
    MESSAGE("gaussian m-exponent on [4,16] " << early.modulation_fit.exponent << ", on [32,64] "
                                             << late.modulation_fit.exponent);
    CHECK(early.modulation_fit.exponent > 1.5);
    CHECK(late.modulation_fit.exponent >= 4.0);
    CHECK(late.modulation_fit.exponent > early.modulation_fit.exponent);
    CHECK_FALSE(early.slow_decay);
  }
  SUBCASE("sawtooth decays like 1/m") {
    const auto saw = GridFunction::from_function(grid, [](const Point& x) {
      return std::abs(x[0]) < 4.0 ? Complex(x[0] - std::floor(x[0] + 0.5) + 0.0 * x[0]) : Complex(0.0);
    });
    // Shift the jumps to half-integers so they fall inside the window cores.
    const auto rep = coefficient_decay_report(frame.analyze(saw));
    MESSAGE("sawtooth m-exponent " << rep.modulation_fit.exponent);
    CHECK(rep.modulation_fit.exponent == doctest::Approx(1.0).epsilon(0.3));
    CHECK(rep.slow_decay);
  }
  SUBCASE("zero input is an error") {
    CHECK_THROWS_AS(coefficient_decay_report(frame.analyze(GridFunction(grid))), DomainError);
  }
}
