#include <filesystem>
#include <fstream>

#include "beals/experiments.hpp"
#include "beals/io.hpp"
#include "doctest.h"

using namespace beals;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "beals_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("binary arrays round trip") {
  const Grid grid(1, 4.0, 32);
  const auto K = quantize(make_symbol({"gauss"}, 1), grid);
  const auto p = scratch("k.bin").string();
  write_kernel(p, K);
  const auto R = read_kernel(p);
  CHECK(R.grid == grid);
  CHECK_FALSE(R.magnetic);
  CHECK((R.K - K.K).cwiseAbs().maxCoeff() == 0.0);

  const GaborFrame frame(grid, Window(1), FrameIndexSet(1, 2, 4));
  const auto M = matrix_elements(K, frame, {1, -1.0}, {1e-6, false});
  const auto q = scratch("m.bin").string();
  write_matrix_elements(q, M);
  const auto Mr = read_matrix_elements(q);
  CHECK(Mr.index() == M.index());
  CHECK(Mr.block_count() == M.block_count());
  for (auto [g, gp] : M.pairs()) CHECK((*Mr.block(g, gp) - *M.block(g, gp)).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(read_matrix_elements(p), Error);  // wrong kind
  std::ofstream(scratch("junk.bin")) << "not an array";
  CHECK_THROWS_AS(read_kernel(scratch("junk.bin").string()), Error);
}

TEST_CASE("symbol csv layout") {
  const PhaseSpaceGrid g{2, {-1.0, 1.0}, {0.0, 0.5, 1.0}};
  const auto a = sample_symbol(make_symbol({"x", 1}, 2), g);
  const auto p = scratch("a.csv").string();
  write_symbol_csv(p, a);
  std::ifstream is(p);
  std::string line;
  std::getline(is, line);
  CHECK(line == "t1,t2,xi1,xi2,re,im");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 4 * 9);
}

TEST_CASE("config reader") {
  const auto c = Config::parse(R"(
top = 3  # comment
[grid]
L = 8.5
name = "a # b"
list = [1, 2.5, -3]
flag = true
)");
  CHECK(c.integer("top", 0) == 3);
  CHECK(c.number("grid.L", 0) == 8.5);
  CHECK(c.string("grid.name", "") == "a # b");
  CHECK(c.numbers("grid.list", {}) == std::vector<double>{1, 2.5, -3});
  CHECK(c.boolean("grid.flag", false));
  CHECK(c.number("grid.missing", 7.0) == 7.0);
  c.reject_unused();

  CHECK(error_of([] { Config::parse("a = 1\nb\n"); }).find(":2:") != std::string::npos);
  CHECK(error_of([] { Config::parse("a = 1\na = 2\n"); }).find("duplicate") != std::string::npos);
  CHECK(error_of([] { Config::parse("[grid\n"); }).find(":1:") != std::string::npos);
  const auto d = Config::parse("\n\nx = abc\n");
  CHECK(error_of([&] { d.number("x", 0); }).find(":3:") != std::string::npos);
  const auto u = Config::parse("known = 1\nunknown = 2\n");
  u.integer("known", 0);
  CHECK(error_of([&] { u.reject_unused(); }).find(":2: unknown key 'unknown'") != std::string::npos);
}

TEST_CASE("experiment config validation") {
  auto load = [](const std::string& text, const std::string& cmd) {
    return load_experiment_config(Config::parse(text, "t.toml"), cmd);
  };
  const auto e = load("", "frame-check");
  CHECK(e.dim == 1);
  CHECK(e.N == 512);
  CHECK(e.threshold("parseval") == 1e-6);
  CHECK(load("[grid]\nd = 2\nL = 6\nN = 192\n[frame]\nGamma = 5\nM = 12\n", "frame-check").threshold("parseval") ==
        1e-5);
  CHECK(load("", "roundtrip").threshold("sup_error") == 1e-3);
  CHECK(load("[grid]\nd = 2\n[field]\nkind = constant\n", "roundtrip").threshold("sup_error") == 1e-2);
  CHECK(load("[thresholds]\nparseval = 0.5\n", "frame-check").threshold("parseval") == 0.5);

  CHECK(error_of([&] { load("[grid]\nd = 3\n", "frame-check"); }).find("t.toml:2:") != std::string::npos);
  CHECK(error_of([&] { load("[field]\nkind = constant\n", "frame-check"); }).find("require grid.d = 2") !=
        std::string::npos);
  CHECK(error_of([&] { load("[frame]\nGamma = 9\n", "frame-check"); }).find("t.toml:2:") != std::string::npos);
  CHECK(error_of([&] { load("[frame]\nM = 400\n", "frame-check"); }).find("Nyquist") != std::string::npos);
  CHECK(error_of([&] { load("[grid]\nL = -1\n", "frame-check"); }).find("positive") != std::string::npos);
  CHECK(error_of([&] { load("[schedule]\neps = [0.1, 0.2]\n", "roundtrip"); }).find("decreasing") !=
        std::string::npos);
  CHECK(error_of([&] { load("[symbol]\nkind = bogus\n", "roundtrip"); }).find("t.toml:2:") != std::string::npos);
  CHECK(error_of([&] { load("[thresholds]\nnope = 1\n", "frame-check"); }).find("unknown key") != std::string::npos);
  CHECK(error_of([&] { load("[field]\nkind = cosine\n[gauge]\nkind = landau\n", "gauge-check"); }).find("constant") !=
        std::string::npos);
  CHECK(error_of([&] { load("", "explode"); }).find("unknown command") != std::string::npos);
}

TEST_CASE("reports are deterministic apart from timing") {
  auto run = [](const std::string& dir) {
    auto cfg = load_experiment_config(Config::parse("[field]\nkind = cosine\n[sampling]\ntriples = 5\n"),
                                      "geometry-check");
    cfg.out_dir = scratch(dir).string();
    auto j = run_experiment(cfg).to_json();
    j.erase("timing");
    return j.dump();
  };
  CHECK(run("det1") == run("det2"));
}

TEST_CASE("failing thresholds fail the report") {
  auto cfg = load_experiment_config(Config::parse("[thresholds]\ngradient = 0\n[sampling]\ntriples = 3\n"),
                                    "geometry-check");
  cfg.out_dir = scratch("failing").string();
  const auto r = run_experiment(cfg);
  CHECK_FALSE(r.passed());
  CHECK(std::filesystem::exists(scratch("failing") / "geometry-check.json"));
  CHECK(std::filesystem::exists(scratch("failing") / "geometry_residuals.csv"));
}
