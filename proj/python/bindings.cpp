#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "beals/experiments.hpp"
#include "beals/io.hpp"
#include "beals/reconstruction.hpp"
#include "beals/weyl.hpp"

namespace py = pybind11;
using namespace beals;

namespace {

Point to_point(const std::vector<double>& v) {
  if (v.empty() || v.size() > kMaxDim) throw DimensionError("point must have 1 to 3 coordinates");
  Point p(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<int>(i)] = v[i];
  return p;
}

std::vector<double> from_point(const Point& p) {
  std::vector<double> v(p.dim());
  for (int a = 0; a < p.dim(); ++a) v[a] = p[a];
  return v;
}

std::optional<PhaseFn> phase_of(const PhaseEvaluator* pe) {
  if (!pe) return std::nullopt;
  return pe->as_function();
}

SymbolSpec spec_from(const std::string& kind, int j, double sigma_t, double sigma_xi, double amplitude, double omega) {
  SymbolSpec s;
  s.kind = kind;
  s.j = j;
  s.sigma_t = sigma_t;
  s.sigma_xi = sigma_xi;
  s.amplitude = amplitude;
  s.omega = omega;
  return s;
}

py::dict report_dict(const DecayReport& r) {
  py::dict d;
  d["modulation_shell_max"] = r.modulation_shell_max;
  d["gamma_shell_max"] = r.gamma_shell_max;
  d["modulation_exponent"] = r.modulation_fit.exponent;
  d["gamma_exponent"] = r.gamma_fit.exponent;
  d["outside_hypotheses"] = r.outside_hypotheses;
  d["peak"] = r.peak;
  return d;
}

}  // namespace

PYBIND11_MODULE(_beals, m) {
  m.doc() = "Gabor-frame discretization of (magnetic) Weyl operators";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<TruncationError>(m, "TruncationError", base.ptr());
  py::register_exception<GridError>(m, "GridError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

  py::class_<Grid>(m, "Grid")
      .def(py::init<int, double, int>(), py::arg("dim"), py::arg("L"), py::arg("N"))
      .def_static("commensurate", &Grid::commensurate, py::arg("dim"), py::arg("min_half_width"), py::arg("M"))
      .def_readonly("dim", &Grid::dim)
      .def_readonly("L", &Grid::L)
      .def_readonly("N", &Grid::N)
      .def_property_readonly("h", &Grid::h)
      .def_property_readonly("size", &Grid::size)
      .def("coord", &Grid::coord)
      .def("point", [](const Grid& g, std::size_t i) { return from_point(g.point(i)); })
      .def("__repr__", [](const Grid& g) {
        return "Grid(dim=" + std::to_string(g.dim) + ", L=" + std::to_string(g.L) + ", N=" + std::to_string(g.N) + ")";
      });

  py::class_<MagneticField>(m, "MagneticField")
      .def_static("zero", &MagneticField::zero, py::arg("dim") = 2)
      .def_static("constant", &MagneticField::constant, py::arg("b"))
      .def_static("cosine", &MagneticField::cosine, py::arg("b"))
      .def_property_readonly("dim", &MagneticField::dim)
      .def_property_readonly("strength", &MagneticField::strength)
      .def("component", [](const MagneticField& f, int j, int k, const std::vector<double>& x) {
        return f.component(j, k, to_point(x));
      });

  py::class_<QuadratureRule>(m, "QuadratureRule")
      .def(py::init([](int n, int t) { return QuadratureRule{n, t}; }), py::arg("nodes_per_unit") = 32,
           py::arg("triangle_nodes") = 32)
      .def_readwrite("nodes_per_unit", &QuadratureRule::nodes_per_unit)
      .def_readwrite("triangle_nodes", &QuadratureRule::triangle_nodes);

  py::class_<PhaseEvaluator>(m, "PhaseEvaluator")
      .def(py::init([](const MagneticField& f, const QuadratureRule& rule, const std::optional<std::vector<double>>& b) {
             return PhaseEvaluator(GaugeData(f, rule), b ? to_point(*b) : Point(f.dim()));
           }),
           py::arg("field"), py::arg("rule") = QuadratureRule{}, py::arg("base") = std::nullopt)
      .def("phase", [](const PhaseEvaluator& pe, const std::vector<double>& x,
                       const std::vector<double>& y) { return pe.phase(to_point(x), to_point(y)); })
      .def("flux", [](const PhaseEvaluator& pe, const std::vector<double>& u, const std::vector<double>& v,
                      const std::vector<double>& w) { return pe.flux(to_point(u), to_point(v), to_point(w)); })
      .def("vector_potential", [](const PhaseEvaluator& pe, const std::vector<double>& x, const std::vector<double>& y) {
        return from_point(pe.gauge().vector_potential(to_point(x), to_point(y)));
      });

  py::class_<Window>(m, "Window")
      .def(py::init<int, double>(), py::arg("dim") = 1, py::arg("half_width") = 1.0)
      .def("value1d", &Window::value1d)
      .def("partition_sum", [](const Window& w, const std::vector<double>& x) { return w.partition_sum(to_point(x)); })
      .def_property_readonly("half_width", &Window::support_half_width);

  py::class_<FrameIndexSet>(m, "FrameIndexSet")
      .def(py::init<int, int, int>(), py::arg("dim"), py::arg("Gamma"), py::arg("M"))
      .def_readonly("dim", &FrameIndexSet::dim)
      .def_readonly("Gamma", &FrameIndexSet::Gamma)
      .def_readonly("M", &FrameIndexSet::M)
      .def_property_readonly("gamma_count", &FrameIndexSet::gamma_count)
      .def_property_readonly("modulation_count", &FrameIndexSet::modulation_count)
      .def("gamma_point", [](const FrameIndexSet& s, std::size_t i) { return from_point(s.gamma_point(i)); });

  py::class_<GaborFrame>(m, "GaborFrame")
      .def(py::init([](const Grid& g, const Window& w, const FrameIndexSet& idx, const PhaseEvaluator* pe, int workers) {
             return GaborFrame(g, w, idx, phase_of(pe), workers);
           }),
           py::arg("grid"), py::arg("window"), py::arg("index"), py::arg("phase") = nullptr, py::arg("workers") = 1,
           py::keep_alive<1, 5>())
      .def_property_readonly("magnetic", &GaborFrame::magnetic)
      .def_property_readonly("exactly_tight", &GaborFrame::exactly_tight)
      .def_property_readonly("index", &GaborFrame::index)
      .def(
          "analyze",
          [](const GaborFrame& f, const Eigen::VectorXcd& v, double tol) {
            return f.analyze(GridFunction(f.grid(), v), tol).values;
          },
          py::arg("values"), py::arg("truncation_tol") = 1e-8, "coefficients, rows gamma, columns m")
      .def("synthesize", [](const GaborFrame& f, const Eigen::MatrixXcd& c) {
        FrameCoefficients fc;
        fc.index = f.index();
        fc.values = c;
        return Eigen::VectorXcd(f.synthesize(fc).values());
      });

  py::class_<OperatorKernel>(m, "OperatorKernel")
      .def_readonly("grid", &OperatorKernel::grid)
      .def_readonly("magnetic", &OperatorKernel::magnetic)
      .def_property_readonly("K", [](const OperatorKernel& k) { return k.K; })
      .def("apply", [](const OperatorKernel& k, const Eigen::VectorXcd& v) {
        return Eigen::VectorXcd(apply(k, GridFunction(k.grid, v)).values());
      });

  m.def(
      "quantize",
      [](const Grid& g, const std::string& kind, int j, double st, double sx, double amp, double om,
         const PhaseEvaluator* pe, int workers) {
        return quantize(make_symbol(spec_from(kind, j, st, sx, amp, om), g.dim), g, phase_of(pe), workers);
      },
      py::arg("grid"), py::arg("kind") = "gauss", py::arg("j") = 0, py::arg("sigma_t") = 1.0,
      py::arg("sigma_xi") = 1.0, py::arg("amplitude") = 0.5, py::arg("omega") = 1.0, py::arg("phase") = nullptr,
      py::arg("workers") = 1, "Weyl kernel of a built-in symbol");
  m.def(
      "quantize_samples",
      [](const Grid& g, const SymbolMatrix& values, const PhaseEvaluator* pe, int workers) {
        Symbol s{quantization_grid(g), values};
        return quantize(s, g, phase_of(pe), workers);
      },
      py::arg("grid"), py::arg("values"), py::arg("phase") = nullptr, py::arg("workers") = 1,
      "values sampled on quantization_axes(grid), rows t, columns xi");
  m.def("quantization_axes", [](const Grid& g) {
    const auto ps = quantization_grid(g);
    return py::make_tuple(ps.t_axis, ps.xi_axis);
  });
  m.def("operator_norm", [](const OperatorKernel& k) { return operator_norm_estimate(k).value; });

  py::class_<MatrixElements>(m, "MatrixElements")
      .def_property_readonly("block_count", &MatrixElements::block_count)
      .def("pairs", &MatrixElements::pairs)
      .def("block",
           [](const MatrixElements& M, std::size_t g, std::size_t gp) -> std::optional<Eigen::MatrixXcd> {
             const auto* b = M.block(g, gp);
             if (!b) return std::nullopt;
             return *b;
           })
      .def("max_abs", &MatrixElements::max_abs)
      .def("decay_report", [](const MatrixElements& M) { return report_dict(decay_report(M)); })
      .def("save", [](const MatrixElements& M, const std::string& p) { write_matrix_elements(p, M); })
      .def_static("load", &read_matrix_elements);

  m.def(
      "matrix_elements",
      [](const OperatorKernel& K, const GaborFrame& f, int band, double kappa_max, bool strict) {
        return matrix_elements(K, f, PairSelection{band, kappa_max}, MatrixElementOptions{1e-6, strict});
      },
      py::arg("kernel"), py::arg("frame"), py::arg("band") = -1, py::arg("kappa_max") = -1.0,
      py::arg("strict") = true);
  m.def("matrix_element_bound", &matrix_element_bound, py::arg("frame"), py::arg("operator_norm"));

  m.def(
      "extract_symbol",
      [](const MatrixElements& M, const GaborFrame& f, double eps, const std::vector<double>& t_axis,
         const std::vector<double>& xi_axis, const PhaseEvaluator* pe, bool check_tail) {
        ExtractOptions opt;
        opt.check_tail = check_tail;
        const PhaseSpaceGrid out{f.grid().dim, t_axis, xi_axis};
        return extract_symbol(M, f, eps, out, pe, opt).values;
      },
      py::arg("elements"), py::arg("frame"), py::arg("eps"), py::arg("t_axis"), py::arg("xi_axis"),
      py::arg("phase") = nullptr, py::arg("check_tail") = true,
      "rows enumerate t (t_axis^d), columns xi (xi_axis^d)");

  m.def(
      "window_cross_spectrum",
      [](const Window& w, const std::vector<double>& tau, const std::vector<double>& zeta,
         const std::vector<double>& kp) { return window_cross_spectrum(w, to_point(tau), to_point(zeta), to_point(kp)); },
      py::arg("window"), py::arg("tau"), py::arg("zeta"), py::arg("kappa_prime"));

  m.def(
      "run_experiment",
      [](const std::string& command, const std::string& config_path, const std::optional<std::string>& out,
         int workers) {
        auto cfg = load_experiment_config(Config::load(config_path), command);
        if (out) cfg.out_dir = *out;
        if (workers > 0) cfg.workers = workers;
        const auto rep = run_experiment(cfg);
        return py::module_::import("json").attr("loads")(rep.to_json().dump());
      },
      py::arg("command"), py::arg("config"), py::arg("out") = std::nullopt, py::arg("workers") = 0,
      "runs a CLI command and returns the JSON report as a dict");
}
