#include "beals/experiments.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "beals/io.hpp"
#include "beals/weyl.hpp"

namespace beals {

using nlohmann::json;

double ExperimentConfig::threshold(const std::string& name) const {
  auto it = thresholds.find(name);
  if (it == thresholds.end()) throw Error("no threshold named '" + name + "'");
  return it->second;
}

MagneticField ExperimentConfig::field() const {
  if (field_kind == "zero") return MagneticField::zero(2);
  if (field_kind == "constant") return MagneticField::constant(b);
  if (field_kind == "cosine") return MagneticField::cosine(b);
  throw DomainError("no magnetic field for kind '" + field_kind + "'");
}

namespace {

[[noreturn]] void bad(const Config& c, const std::string& key, const std::string& what) {
  throw ConfigError(c.where(key) + key + ": " + what);
}

Point point_of(const Config& c, const std::string& key, const std::vector<double>& v, int dim) {
  if (static_cast<int>(v.size()) != dim) bad(c, key, "expected " + std::to_string(dim) + " entries");
  Point p(dim);
  for (int a = 0; a < dim; ++a) p[a] = v[a];
  return p;
}

std::map<std::string, double> default_thresholds(const ExperimentConfig& e) {
  if (e.command == "frame-check") {
    const double tight = e.dim == 1 ? 1e-6 : 1e-5;
    return {{"partition_of_unity", 1e-10}, {"parseval", tight}, {"reconstruction", tight},
            {"uncovered_fraction", 1e-8}, {"slow_decay_count", 0.0}};
  }
  if (e.command == "geometry-check") {
    const double t = e.field_kind == "zero" ? 1e-14 : e.field_kind == "constant" ? 1e-8 : 1e-6;
    return {{"antisymmetry", t}, {"cocycle", t}, {"line_integral", t}, {"flux", t},
            {"gradient", e.field_kind == "zero" ? 1e-14 : 1e-6}};
  }
  if (e.command == "roundtrip") {
    return {{"sup_error", e.magnetic() ? 1e-2 : 1e-3},
            {"bound_violations", 0.0},
            {"shell_ratio", 1e-4},
            {"decay_exponent", 4.0},
            {"eps_limit", 5e-3},
            {"tail_bound", 1e-2},
            {"kernel_truncation", 1e-6}};
  }
  const double r = e.gauge_kind == "none" ? 0.0 : e.gauge_kind == "landau" ? 1e-6 : 1e-5;
  return {{"residual", r}};
}

}  // namespace

ExperimentConfig load_experiment_config(const Config& c, const std::string& command) {
  static const std::set<std::string> commands{"frame-check", "geometry-check", "roundtrip", "gauge-check"};
  if (!commands.count(command)) throw ConfigError("unknown command '" + command + "'");
  ExperimentConfig e;
  e.command = command;
  if (command == "geometry-check" || command == "gauge-check") {
    e.dim = 2;
    e.field_kind = "constant";
  }
  if (command == "gauge-check") {
    e.L = 3.0;
    e.N = 24;
    e.symbol.kind = "gauss_modulated";
  }
  if (command == "roundtrip") e.commensurate = true;

  e.dim = c.integer("grid.d", e.dim);
  if (e.dim != 1 && e.dim != 2) bad(c, "grid.d", "must be 1 or 2");
  e.field_kind = c.string("field.kind", e.field_kind);
  if (e.field_kind == "custom") bad(c, "field.kind", "custom fields are only available through the library API");
  if (e.field_kind != "none" && e.field_kind != "zero" && e.field_kind != "constant" && e.field_kind != "cosine")
    bad(c, "field.kind", "expected none, zero, constant or cosine");
  if (e.magnetic() && e.dim != 2) bad(c, "field.kind", "magnetic experiments require grid.d = 2");
  if (command == "geometry-check" && !e.magnetic()) bad(c, "field.kind", "geometry-check needs a field");
  if (command == "gauge-check" && !e.magnetic()) bad(c, "field.kind", "gauge-check needs a field");

  if (command == "roundtrip" && e.dim == 2) {
    e.L = 6.0;
    e.Gamma = 5;
    e.M = 7;
    e.t_half = 1.5;
    e.xi_half = 1.5;
    e.xi_count = 13;
  }
  e.commensurate = c.boolean("grid.commensurate", e.commensurate);
  e.L = c.number("grid.L", e.L);
  if (!(e.L > 0.0) || !std::isfinite(e.L)) bad(c, "grid.L", "must be positive");
  e.N = c.integer("grid.N", e.N);
  if (e.N < 2) bad(c, "grid.N", "must be at least 2");
  if (e.commensurate && c.has("grid.N")) bad(c, "grid.N", "is derived from frame.M when grid.commensurate = true");

  e.b = c.number("field.b", e.b);
  if (!std::isfinite(e.b)) bad(c, "field.b", "must be finite");
  const auto box = c.numbers("field.box", {e.field_box.lo[0], e.field_box.hi[0]});
  if (box.size() != 2 || !(box[0] < box[1])) bad(c, "field.box", "expected [lo, hi] with lo < hi");
  e.field_box = Box::cube(2, box[0], box[1]);
  e.base = point_of(c, "field.base", c.numbers("field.base", std::vector<double>(e.magnetic() ? 2 : e.dim, 0.0)),
                    e.magnetic() ? 2 : e.dim);
  e.rule.nodes_per_unit = c.integer("quadrature.nodes_per_unit", e.rule.nodes_per_unit);
  if (e.rule.nodes_per_unit < 2) bad(c, "quadrature.nodes_per_unit", "must be at least 2");
  e.rule.triangle_nodes = c.integer("quadrature.triangle_nodes", e.rule.triangle_nodes);
  if (e.rule.triangle_nodes < 2) bad(c, "quadrature.triangle_nodes", "must be at least 2");

  e.Gamma = c.integer("frame.Gamma", e.Gamma);
  if (e.Gamma < 1) bad(c, "frame.Gamma", "must be positive");
  e.M = c.integer("frame.M", e.M);
  if (e.M < 1) bad(c, "frame.M", "must be positive");
  e.window = c.string("window.kind", e.window);
  double r = 1.0;
  try {
    r = build_window(e.window, e.dim).support_half_width();
  } catch (const Error& err) {
    bad(c, "window.kind", err.what());
  }
  if (command == "frame-check" || command == "roundtrip") {
    const Grid g = e.commensurate ? Grid::commensurate(e.dim, e.L, e.M) : Grid(e.dim, e.L, e.N);
    if (e.Gamma + r > g.L + 1e-12)
      bad(c, "frame.Gamma", "window support Gamma + r = " + std::to_string(e.Gamma + r) +
                                " leaves the box of half-width " + std::to_string(g.L));
    if (e.M > kPi / g.h() + 1e-12) bad(c, "frame.M", "exceeds the grid Nyquist bound pi/h = " + std::to_string(kPi / g.h()));
  }

  e.symbol.kind = c.string("symbol.kind", e.symbol.kind);
  e.symbol.j = c.integer("symbol.j", e.symbol.j);
  e.symbol.sigma_t = c.number("symbol.sigma_t", e.symbol.sigma_t);
  e.symbol.sigma_xi = c.number("symbol.sigma_xi", e.symbol.sigma_xi);
  e.symbol.amplitude = c.number("symbol.amplitude", e.symbol.amplitude);
  e.symbol.omega = c.number("symbol.omega", e.symbol.omega);
  try {
    make_symbol(e.symbol, e.dim);
  } catch (const Error& err) {
    bad(c, "symbol.kind", err.what());
  }
  if (e.symbol.sigma_t <= 0.0) bad(c, "symbol.sigma_t", "must be positive");
  if (e.symbol.sigma_xi <= 0.0) bad(c, "symbol.sigma_xi", "must be positive");

  e.schedule.eps = c.numbers("schedule.eps", e.schedule.eps);
  for (std::size_t i = 0; i < e.schedule.eps.size(); ++i) {
    const double v = e.schedule.eps[i];
    if (!(v >= 0.0) || !std::isfinite(v)) bad(c, "schedule.eps", "entries must be finite and >= 0");
    if (i > 0 && !(v < e.schedule.eps[i - 1])) bad(c, "schedule.eps", "entries must be strictly decreasing");
  }
  try {
    e.schedule.policy = RegularizationSchedule::parse_policy(
        c.string("schedule.extrapolation", RegularizationSchedule::policy_name(e.schedule.policy)));
  } catch (const Error& err) {
    bad(c, "schedule.extrapolation", err.what());
  }

  e.t_half = c.number("roundtrip.t_half", e.t_half);
  if (!(e.t_half > 0.0)) bad(c, "roundtrip.t_half", "must be positive");
  e.xi_half = c.number("roundtrip.xi_half", e.xi_half);
  if (!(e.xi_half > 0.0)) bad(c, "roundtrip.xi_half", "must be positive");
  e.xi_count = c.integer("roundtrip.xi_count", e.xi_count);
  if (e.xi_count < 2) bad(c, "roundtrip.xi_count", "must be at least 2");
  e.band = c.integer("roundtrip.band", e.band);
  e.negative_control = c.boolean("roundtrip.negative_control", e.negative_control);
  e.decay.fit_lo = c.integer("decay.fit_lo", e.decay.fit_lo);
  e.decay.fit_hi = c.integer("decay.fit_hi", e.decay.fit_hi);
  if (e.decay.fit_lo < 1 || e.decay.fit_hi <= e.decay.fit_lo) bad(c, "decay.fit_hi", "need 1 <= fit_lo < fit_hi");
  e.decay.floor_rel = c.number("decay.floor", e.decay.floor_rel);
  e.decay.flag_threshold = c.number("decay.flag_threshold", e.decay.flag_threshold);
  e.ratio_shell = c.integer("decay.ratio_shell", e.ratio_shell);
  if (e.ratio_shell < 1) bad(c, "decay.ratio_shell", "must be positive");

  e.gauge_kind = c.string("gauge.kind", e.gauge_kind);
  if (e.gauge_kind != "none" && e.gauge_kind != "landau" && e.gauge_kind != "polynomial")
    bad(c, "gauge.kind", "expected none, landau or polynomial");
  if (command == "gauge-check" && e.gauge_kind == "landau") {
    if (e.field_kind != "constant" && e.field_kind != "zero") bad(c, "gauge.kind", "landau needs a constant field");
    if (e.base.norm_inf() != 0.0) bad(c, "field.base", "landau shift is written for base point 0");
  }

  e.seed = static_cast<unsigned long long>(c.integer("sampling.seed", static_cast<int>(e.seed)));
  e.samples = c.integer("sampling.samples", e.samples);
  e.functions = c.integer("sampling.functions", e.functions);
  e.triples = c.integer("sampling.triples", e.triples);
  if (e.samples < 1) bad(c, "sampling.samples", "must be positive");
  if (e.functions < 1) bad(c, "sampling.functions", "must be positive");
  if (e.triples < 1) bad(c, "sampling.triples", "must be positive");

  e.out_dir = c.string("output.dir", e.out_dir);
  e.save_arrays = c.boolean("output.save_arrays", e.save_arrays);
  e.workers = c.integer("run.workers", e.workers);
  if (e.workers < 1) bad(c, "run.workers", "must be positive");

  for (auto& [name, v] : default_thresholds(e)) {
    e.thresholds[name] = c.number("thresholds." + name, v);
    if (!(e.thresholds[name] >= 0.0)) bad(c, "thresholds." + name, "must be >= 0");
  }
  c.reject_unused();
  e.echo = c.entries();
  return e;
}

const Check& RunReport::check(const std::string& name, double value, const std::string& op, double tolerance) {
  Check k{name, value, op, tolerance, false};
  if (op == "<=")
    k.pass = value <= tolerance;
  else if (op == "<")
    k.pass = value < tolerance;
  else if (op == ">=")
    k.pass = value >= tolerance;
  else
    throw Error("unknown comparison " + op);
  checks.push_back(k);
  return checks.back();
}

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& k) { return k.pass; });
}

json RunReport::to_json() const {
  json j;
  j["command"] = command;
  j["config"] = config;
  j["results"] = results;
  j["checks"] = json::array();
  for (const auto& k : checks)
    j["checks"].push_back({{"name", k.name}, {"value", k.value}, {"op", k.op}, {"tolerance", k.tolerance},
                           {"pass", k.pass}});
  j["passed"] = passed();
  j["files"] = files;
  j["timing"] = {{"seconds", seconds}};
  return j;
}

namespace {

Grid make_grid(const ExperimentConfig& cfg) {
  return cfg.commensurate ? Grid::commensurate(cfg.dim, cfg.L, cfg.M) : Grid(cfg.dim, cfg.L, cfg.N);
}

std::vector<double> coords(const Point& p) {
  std::vector<double> v(p.dim());
  for (int a = 0; a < p.dim(); ++a) v[a] = p[a];
  return v;
}

json grid_json(const Grid& g) { return {{"d", g.dim}, {"L", g.L}, {"N", g.N}, {"h", g.h()}}; }

json fit_json(const ShellFit& f) {
  return {{"exponent", f.exponent}, {"constant", f.constant}, {"lo", f.lo},
          {"hi", f.hi},             {"used", f.used},         {"floor_reached", f.floor_reached}};
}

std::string out_path(const ExperimentConfig& cfg, RunReport& rep, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  rep.files.push_back(name);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

double rel_diff(const GridFunction& a, const GridFunction& b) {
  return (a.values() - b.values()).norm() / b.values().norm();
}

// Sup |a - b| over a sub-box of the phase-space grid.
double sup_on(const Symbol& a, const Symbol& b, double t_half, double xi_half) {
  const int d = a.grid.dim;
  return roundtrip_error(a, b, Box::cube(d, -t_half, t_half), Box::cube(d, -xi_half, xi_half)).sup;
}

}  // namespace

RunReport cmd_frame_check(const ExperimentConfig& cfg) {
  RunReport rep;
  rep.command = cfg.command;
  const Grid grid = make_grid(cfg);
  const int d = cfg.dim;
  std::optional<PhaseFn> phase;
  if (cfg.magnetic()) phase = PhaseEvaluator(GaugeData(cfg.field(), cfg.rule), cfg.base).as_function();
  const GaborFrame frame(grid, build_window(cfg.window, d), FrameIndexSet(d, cfg.Gamma, cfg.M), phase, cfg.workers);
  rep.results["grid"] = grid_json(grid);
  rep.results["magnetic"] = frame.magnetic();
  rep.results["exactly_tight"] = frame.exactly_tight();

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> ux(-grid.L, grid.L);
  double pu = 0.0;
  for (int i = 0; i < cfg.samples; ++i) {
    Point x(d);
    for (int a = 0; a < d; ++a) x[a] = ux(rng);
    pu = std::max(pu, std::abs(frame.window().partition_sum(x) - 1.0));
  }
  rep.results["partition_of_unity"] = pu;

  std::uniform_real_distribution<double> uc(-2.0, 2.0), uw(0.5, 1.0);
  double parseval = 0.0, recon = 0.0, uncovered = 0.0;
  int slow = 0;
  json fns = json::array();
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < cfg.functions; ++i) {
    Point c(d);
    for (int a = 0; a < d; ++a) c[a] = uc(rng);
    const double w = uw(rng), k = uc(rng);
    const auto f = GridFunction::from_function(grid, [&](const Point& x) {
      const Point r = x - c;
      return std::exp(-r.dot(r) / (2 * w * w)) * std::polar(1.0, k * x[0]);
    });
    const auto coef = frame.analyze(f, std::numeric_limits<double>::infinity());
    const double nf = f.norm();
    const double p = std::abs(coef.energy() - nf * nf) / (nf * nf);
    const double r = rel_diff(frame.synthesize(coef), f);
    const auto dec = coefficient_decay_report(coef);
    parseval = std::max(parseval, p);
    recon = std::max(recon, r);
    uncovered = std::max(uncovered, coef.uncovered_fraction);
    slow += dec.slow_decay ? 1 : 0;
    fns.push_back({{"center", coords(c)},
                   {"width", w},
                   {"wavenumber", k},
                   {"parseval", p},
                   {"reconstruction", r},
                   {"uncovered_fraction", coef.uncovered_fraction},
                   {"edge_magnitude", coef.edge_magnitude},
                   {"modulation_fit", fit_json(dec.modulation_fit)},
                   {"slow_decay", dec.slow_decay},
                   {"warnings", coef.warnings}});
    for (std::size_t s = 0; s < dec.modulation_shell_max.size(); ++s)
      rows.push_back({double(i), double(s), dec.modulation_shell_max[s],
                      s < dec.gamma_shell_max.size() ? dec.gamma_shell_max[s] : 0.0});
  }
  rep.results["functions"] = fns;
  write_csv(out_path(cfg, rep, "frame_shells.csv"), {"function", "shell", "modulation_max", "gamma_max"}, rows);

  rep.check("partition_of_unity", pu, "<=", cfg.threshold("partition_of_unity"));
  rep.check("uncovered_fraction", uncovered, "<=", cfg.threshold("uncovered_fraction"));
  if (uncovered > cfg.threshold("uncovered_fraction"))
    rep.results["diagnostic"] = "frame truncation Gamma = " + std::to_string(cfg.Gamma) +
                                " leaves part of a test function uncovered; increase frame.Gamma or grid.L";
  rep.check("parseval", parseval, "<=", cfg.threshold("parseval"));
  rep.check("reconstruction", recon, "<=", cfg.threshold("reconstruction"));
  rep.check("slow_decay_count", slow, "<=", cfg.threshold("slow_decay_count"));
  return rep;
}

RunReport cmd_geometry_check(const ExperimentConfig& cfg) {
  RunReport rep;
  rep.command = cfg.command;
  const MagneticField field = cfg.field();
  const GaugeData gauge(field, cfg.rule);
  const PhaseEvaluator pe(gauge, cfg.base);
  QuadratureRule fine_rule{2 * cfg.rule.nodes_per_unit, 2 * cfg.rule.triangle_nodes};
  const PhaseEvaluator fine(GaugeData(field, fine_rule), cfg.base);

  const auto bounds = field.bounds(cfg.field_box, 17, 2);
  rep.results["field"] = {{"kind", cfg.field_kind},
                          {"b", cfg.b},
                          {"sup_field", bounds.sup_field},
                          {"sup_derivative", bounds.sup_derivative},
                          {"closedness_residual", field.closedness_residual(cfg.field_box, 9)}};

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(cfg.field_box.lo[0], cfg.field_box.hi[0]);
  auto draw = [&] { return Point{u(rng), u(rng)}; };
  const double step = 1e-3;
  double anti = 0, coc = 0, line = 0, flux = 0, grad = 0;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < cfg.triples; ++i) {
    const Point x = draw(), y = draw(), z = draw();
    const double a = std::abs(pe.phase(x, y) + pe.phase(y, x));
    const double c = std::abs(pe.phase(x, y) + pe.phase(y, z) - pe.phase(x, z) - pe.flux(x, y, z));
    const double l = std::abs(pe.phase(x, y) - pe.phase_by_line_integral(x, y));
    double ref;
    if (field.is_constant()) {
      const Point e1 = z - x, e2 = y - x;
      ref = 0.5 * field.strength() * (e1[0] * e2[1] - e1[1] * e2[0]) * (field.is_zero() ? 0.0 : 1.0);
    } else {
      ref = fine.flux(x, y, z);
    }
    const double f = std::abs(pe.flux(x, y, z) - ref);
    const Point A0 = gauge.vector_potential(x, pe.base()), Ay = gauge.vector_potential(x, y);
    double g = 0.0;
    for (int j = 0; j < 2; ++j) {
      Point xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      const double fd = (pe.phase(xp, y) - pe.phase(xm, y)) / (2 * step);
      g = std::max(g, std::abs(fd - (A0[j] - Ay[j])));
    }
    anti = std::max(anti, a);
    coc = std::max(coc, c);
    line = std::max(line, l);
    flux = std::max(flux, f);
    grad = std::max(grad, g);
    rows.push_back({double(i), a, c, l, f, g});
  }
  write_csv(out_path(cfg, rep, "geometry_residuals.csv"),
            {"triple", "antisymmetry", "cocycle", "line_integral", "flux", "gradient"}, rows);
  rep.results["flux_reference"] = field.is_constant() ? "closed form" : "quadrature with doubled nodes";
  rep.results["gradient_step"] = step;
  rep.check("antisymmetry", anti, "<=", cfg.threshold("antisymmetry"));
  rep.check("cocycle", coc, "<=", cfg.threshold("cocycle"));
  rep.check("line_integral", line, "<=", cfg.threshold("line_integral"));
  rep.check("flux", flux, "<=", cfg.threshold("flux"));
  rep.check("gradient", grad, "<=", cfg.threshold("gradient"));
  return rep;
}

RunReport cmd_roundtrip(const ExperimentConfig& cfg) {
  RunReport rep;
  rep.command = cfg.command;
  const int d = cfg.dim;
  const Grid grid = make_grid(cfg);
  std::optional<PhaseEvaluator> pe;
  std::optional<PhaseFn> phase;
  if (cfg.magnetic()) {
    pe.emplace(GaugeData(cfg.field(), cfg.rule), cfg.base);
    phase = pe->as_function();
  }
  const GaborFrame frame(grid, build_window(cfg.window, d), FrameIndexSet(d, cfg.Gamma, cfg.M), phase, cfg.workers);
  const auto a = make_symbol(cfg.symbol, d);
  const auto K = quantize(a, grid, phase, cfg.workers);
  rep.results["grid"] = grid_json(grid);
  rep.results["exactly_tight"] = frame.exactly_tight();
  rep.results["magnetic"] = frame.magnetic();
  if (cfg.save_arrays) write_kernel(out_path(cfg, rep, "kernel.bin"), K);

  const double trunc = kernel_truncation_mass(K, frame);
  const auto norm = operator_norm_estimate(K);
  rep.results["kernel_truncation"] = trunc;
  rep.results["operator_norm"] = {{"value", norm.value}, {"iterations", norm.iterations}, {"converged", norm.converged}};

  std::vector<double> taxis;
  for (int k = 0; k < grid.N; ++k)
    if (std::abs(grid.coord(k)) <= cfg.t_half + 1e-12) taxis.push_back(grid.coord(k));
  const PhaseSpaceGrid out{d, taxis, linspace(-cfg.xi_half, cfg.xi_half, cfg.xi_count)};
  ExtractOptions xopt;
  xopt.tail_tolerance = cfg.threshold("tail_bound");
  xopt.check_tail = false;
  const auto eps = cfg.schedule.positive();
  SymbolReconstructor rec(frame, out, pe ? &*pe : nullptr, eps, cfg.schedule.includes_zero(), xopt);
  const auto sel = rec.needed_pairs(cfg.band);
  DecayAccumulator decay(frame.index());
  BoundChecker bound(matrix_element_bound(frame, norm.value));
  MatrixElements stored(frame.index(), frame.magnetic());
  std::size_t pairs = 0;
  for_each_matrix_block(K, frame, sel, [&](std::size_t g, std::size_t gp, const Eigen::MatrixXcd& T) {
    ++pairs;
    decay.add_block(g, gp, T);
    bound.add_block(g, gp, T);
    rec.add_block(g, gp, T);
    if (cfg.save_arrays) stored.set_block(g, gp, T);
  });
  if (cfg.save_arrays) write_matrix_elements(out_path(cfg, rep, "matrix_elements.bin"), stored);
  const auto dr = decay.finish(cfg.decay);
  const auto res = rec.finish();
  rep.results["pairs"] = pairs;
  rep.results["pair_selection"] = {{"band", sel.band}, {"kappa_max", sel.kappa_max}};
  rep.results["bound"] = {{"value", bound.bound()}, {"violations", bound.violations()},
                          {"checked", bound.checked()}, {"max_ratio", bound.max_ratio()}};
  const double ratio = cfg.ratio_shell < static_cast<int>(dr.modulation_shell_max.size())
                           ? dr.modulation_ratio(cfg.ratio_shell)
                           : std::numeric_limits<double>::quiet_NaN();
  rep.results["decay"] = {{"modulation_fit", fit_json(dr.modulation_fit)},
                          {"gamma_fit", fit_json(dr.gamma_fit)},
                          {"modulation_shell_max", dr.modulation_shell_max},
                          {"gamma_shell_max", dr.gamma_shell_max},
                          {"constants", dr.constants},
                          {"ratio_shell", cfg.ratio_shell},
                          {"shell_ratio", ratio},
                          {"outside_hypotheses", dr.outside_hypotheses}};
  rep.results["hypotheses"] = dr.outside_hypotheses ? "outside Beals hypotheses" : "within Beals hypotheses";
  {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < dr.modulation_shell_max.size(); ++k)
      rows.push_back({double(k), dr.modulation_shell_max[k], k < dr.gamma_shell_max.size() ? dr.gamma_shell_max[k] : 0.0});
    write_csv(out_path(cfg, rep, "roundtrip_shells.csv"), {"shell", "modulation_max", "gamma_max"}, rows);
  }

  const Symbol ref = sample_symbol(a, out);
  const double th = cfg.t_half, xh = cfg.xi_half;
  json per_eps = json::array();
  std::vector<double> gaps;
  for (std::size_t i = 0; i < res.a_eps.size(); ++i) {
    json e{{"eps", res.eps[i]}, {"sup_error", sup_on(res.a_eps[i], ref, th, xh)}};
    if (i + 1 < res.a_eps.size()) {
      gaps.push_back(sup_on(res.a_eps[i], res.a_eps[i + 1], 0.5 * th, 0.5 * xh));
      e["gap_to_next"] = gaps.back();
    }
    if (res.a0) e["gap_to_zero"] = sup_on(res.a_eps[i], *res.a0, 0.5 * th, 0.5 * xh);
    per_eps.push_back(e);
  }
  rep.results["eps"] = per_eps;

  std::optional<Symbol> final_est;
  std::string source;
  if (res.a0) {
    final_est = *res.a0;
    source = "eps=0 (" + res.zero_path + ")";
    rep.results["tail_bound"] = res.tail_bound;
  }
  if (eps.size() >= 2 && cfg.schedule.policy == RegularizationSchedule::Extrapolation::Richardson) {
    const std::size_t n = eps.size();
    const auto rich = richardson(res.a_eps[n - 1], eps[n - 1], res.a_eps[n - 2], eps[n - 2]);
    rep.results["richardson_sup_error"] = sup_on(rich, ref, th, xh);
    if (!final_est) {
      final_est = rich;
      source = "richardson";
    }
  }
  if (!final_est && !res.a_eps.empty()) {
    final_est = res.a_eps.back();
    source = "smallest eps";
  }
  if (!final_est) throw DomainError("roundtrip: the schedule produced no reconstruction");
  const auto err = roundtrip_error(ref, *final_est, Box::cube(d, -th, th), Box::cube(d, -xh, xh));
  rep.results["estimate"] = source;
  rep.results["sup_error"] = err.sup;
  rep.results["sup_error_dt"] = err.sup_dt;
  rep.results["sup_error_dxi"] = err.sup_dxi;
  rep.results["points"] = err.points;
  write_symbol_csv(out_path(cfg, rep, "roundtrip_symbol.csv"), *final_est);

  if (cfg.negative_control) {
    rep.check("decay_flag_raised", dr.outside_hypotheses ? 1.0 : 0.0, ">=", 1.0);
    return rep;
  }
  rep.check("kernel_truncation", trunc, "<=", cfg.threshold("kernel_truncation"));
  rep.check("bound_violations", double(bound.violations()), "<=", cfg.threshold("bound_violations"));
  rep.check("shell_ratio", ratio, "<=", cfg.threshold("shell_ratio"));
  rep.check("decay_exponent", dr.modulation_fit.floor_reached ? std::numeric_limits<double>::infinity()
                                                               : dr.modulation_fit.exponent,
            ">=", cfg.threshold("decay_exponent"));
  if (gaps.size() >= 2) {
    double worst = 0.0;
    for (std::size_t i = 1; i < gaps.size(); ++i) worst = std::max(worst, gaps[i] / gaps[i - 1]);
    rep.check("eps_gap_ratio", worst, "<", 1.0);
  }
  if (res.a0 && !res.a_eps.empty()) {
    rep.check("eps_limit", sup_on(res.a_eps.back(), *res.a0, 0.5 * th, 0.5 * xh), "<=", cfg.threshold("eps_limit"));
    rep.check("tail_bound", res.tail_bound, "<=", cfg.threshold("tail_bound"));
  }
  rep.check("sup_error", err.sup, "<=", cfg.threshold("sup_error"));
  return rep;
}

RunReport cmd_gauge_check(const ExperimentConfig& cfg) {
  RunReport rep;
  rep.command = cfg.command;
  const Grid grid(2, cfg.L, cfg.N);
  const GaugeData gauge(cfg.field(), cfg.rule);
  const PhaseEvaluator pe(gauge, cfg.base);
  const auto a = make_symbol(cfg.symbol, 2);
  const auto K = quantize(a, grid, pe.as_function(), cfg.workers);

  std::function<double(const Point&)> chi = [](const Point&) { return 0.0; };
  PhaseFn shifted = pe.as_function();
  const double b = cfg.b;
  if (cfg.gauge_kind == "landau") {
    chi = [b](const Point& x) { return 0.5 * b * x[0] * x[1]; };
    shifted = line_integral_phase([b](const Point& x) { return Point{0.0, b * x[0]}; }, cfg.rule.nodes_per_unit);
  } else if (cfg.gauge_kind == "polynomial") {
    // chi = exp(-|x|^2 / 4) p(x), p of degree 2 with seeded coefficients
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::array<double, 6> c;  // 1, x, y, x^2, xy, y^2
    for (auto& v : c) v = u(rng);
    rep.results["chi_coefficients"] = c;
    auto p = [c](const Point& x) {
      return c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[0] * x[0] + c[4] * x[0] * x[1] + c[5] * x[1] * x[1];
    };
    chi = [p](const Point& x) { return std::exp(-0.25 * x.dot(x)) * p(x); };
    const Point base = pe.base();
    shifted = line_integral_phase(
        [&gauge, base, p, c](const Point& x) {
          const double w = std::exp(-0.25 * x.dot(x));
          const double px = c[1] + 2 * c[3] * x[0] + c[4] * x[1];
          const double py = c[2] + c[4] * x[0] + 2 * c[5] * x[1];
          Point A = gauge.vector_potential(x, base);
          A[0] += w * (px - 0.5 * x[0] * p(x));
          A[1] += w * (py - 0.5 * x[1] * p(x));
          return A;
        },
        cfg.rule.nodes_per_unit);
  }
  const auto K2 = quantize(a, grid, shifted, cfg.workers);
  std::vector<double> chis(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) chis[i] = chi(grid.point(i));
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(k);
      worst = std::max(worst, std::abs(K2.K(r, c) - std::polar(1.0, chis[i] - chis[k]) * K.K(r, c)));
    }
  const double residual = worst / K.K.cwiseAbs().maxCoeff();
  rep.results["grid"] = grid_json(grid);
  rep.results["gauge"] = cfg.gauge_kind;
  rep.results["residual"] = residual;
  rep.check("residual", residual, "<=", cfg.threshold("residual"));
  return rep;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  if (cfg.command == "frame-check")
    rep = cmd_frame_check(cfg);
  else if (cfg.command == "geometry-check")
    rep = cmd_geometry_check(cfg);
  else if (cfg.command == "roundtrip")
    rep = cmd_roundtrip(cfg);
  else if (cfg.command == "gauge-check")
    rep = cmd_gauge_check(cfg);
  else
    throw ConfigError("unknown command '" + cfg.command + "'");
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.config = cfg.echo;
  rep.config["workers"] = cfg.workers;  // not in echo when set from the command line
  const std::string path = out_path(cfg, rep, cfg.command + ".json");
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  os << rep.to_json().dump(2) << "\n";
  return rep;
}

}  // namespace beals
