#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "catbrw/errors.h"
#include "catbrw/experiment.h"
#include "catbrw/kernels.h"
#include "catbrw/limit_laws.h"
#include "catbrw/moments.h"
#include "catbrw/simulator.h"
#include "catbrw/volterra.h"
#include "catbrw/walk.h"

namespace py = pybind11;
using namespace catbrw;

PYBIND11_MODULE(_catbrw, m) {
  m.doc() = "Critical catalytic branching random walks: solvers, moments and Monte Carlo";

  static py::exception<Error> base(m, "CatbrwError");
  static py::exception<Error> config(m, "ConfigError", base.ptr());
  static py::exception<Error> calibration(m, "CalibrationError", base.ptr());
  static py::exception<Error> numerical(m, "NumericalError", base.ptr());
  static py::exception<Error> dependency(m, "DependencyError", base.ptr());
  static py::exception<Error> input(m, "InputError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::Input: input(e.what()); break;
        case ErrorKind::Config: config(e.what()); break;
        case ErrorKind::Calibration: calibration(e.what()); break;
        case ErrorKind::Numerical: numerical(e.what()); break;
        case ErrorKind::Dependency: dependency(e.what()); break;
      }
    }
  });

  py::class_<WalkSpec>(m, "WalkSpec")
      .def(py::init([](int d, const std::vector<std::pair<std::vector<int>, double>>& jumps) {
             std::vector<Jump> js;
             for (const auto& [x, r] : jumps) js.push_back({x, r});
             return WalkSpec(d, std::move(js));
           }),
           py::arg("dimension"), py::arg("jumps"))
      .def_static("simple", &WalkSpec::simple, py::arg("dimension"), py::arg("total_rate") = 1.0)
      .def_property_readonly("dimension", &WalkSpec::dimension)
      .def_property_readonly("total_rate", &WalkSpec::total_rate)
      .def_property_readonly("second_moment", &WalkSpec::second_moment);

  m.def("transition_probability_origin",
        [](const WalkSpec& w, double t) { return transition_probability_origin(w, t); }, py::arg("walk"), py::arg("t"));
  m.def("gamma_d", [](const WalkSpec& w) {
    const auto g = gamma_d(w);
    return py::make_tuple(g.value, g.error);
  });
  m.def("gamma_gaussian", &gamma_gaussian);
  m.def("estimate_escape_probability",
        [](const WalkSpec& w, std::int64_t n, double horizon, std::uint64_t seed, int threads) {
          const auto e = estimate_escape_probability(w, n, horizon, seed, threads);
          return py::make_tuple(e.value, e.std_error);
        },
        py::arg("walk"), py::arg("replicates"), py::arg("horizon"), py::arg("seed"), py::arg("threads") = 1);

  py::class_<OffspringLaw>(m, "OffspringLaw")
      .def(py::init<std::vector<double>>(), py::arg("coefficients"))
      .def_static("binary", &OffspringLaw::binary, py::arg("p2"))
      .def_static("geometric", &OffspringLaw::geometric, py::arg("p"), py::arg("tail_tol") = 1e-17)
      .def("__call__", &OffspringLaw::operator(), py::arg("s"))
      .def("derivative", &OffspringLaw::derivative)
      .def_property_readonly("mean", &OffspringLaw::mean)
      .def_property_readonly("variance", &OffspringLaw::variance)
      .def_property_readonly("coefficients", &OffspringLaw::coefficients);

  m.def("calibrate_alpha", &calibrate_alpha, py::arg("m1"), py::arg("h"));
  m.def("yaglom_cdf", &yaglom_cdf);
  m.def("yaglom_laplace", &yaglom_laplace);
  m.def("yaglom_moment", &yaglom_moment);
  m.def("phi", &phi);
  m.def("inverse_factorial_sum", [](int n, int k) {
    const auto r = inverse_factorial_sum(n, k);
    return py::make_tuple(r.numerator(), r.denominator());
  });
  m.def("enumerate_partitions", [](int n, int k) {
    py::list out;
    for (const auto& t : enumerate_partitions(n, k)) out.append(py::make_tuple(t.j, t.weight));
    return out;
  });

  py::class_<Sandwich>(m, "Sandwich")
      .def_readonly("minus", &Sandwich::minus)
      .def_readonly("plus", &Sandwich::plus)
      .def_readonly("s0", &Sandwich::s0)
      .def_readonly("trivial", &Sandwich::trivial)
      .def_readonly("cutoff", &Sandwich::cutoff);
  m.def("build_sandwich", &build_sandwich, py::arg("f"), py::arg("eps"));

  py::class_<ModelConstants>(m, "ModelConstants")
      .def_readonly("gamma", &ModelConstants::gamma)
      .def_readonly("h", &ModelConstants::h)
      .def_readonly("alpha", &ModelConstants::alpha)
      .def_readonly("c4", &ModelConstants::c4)
      .def_readonly("C", &ModelConstants::C)
      .def("__str__", &ModelConstants::to_text);

  py::class_<Pipeline>(m, "Pipeline")
      .def(py::init([](const std::string& config_json, const std::filesystem::path& out, int threads) {
             return Pipeline(parse_config(nlohmann::json::parse(config_json.empty() ? "{}" : config_json)), out,
                             threads);
           }),
           py::arg("config_json"), py::arg("out"), py::arg("threads") = 1)
      .def("calibrate", [](Pipeline& p) { return p.calibrate().constants; })
      .def("solve", &Pipeline::solve)
      .def("moments", &Pipeline::moments)
      .def("simulate", &Pipeline::simulate)
      .def("report", &Pipeline::report)
      .def("survival", [](const Pipeline& p) {
        const auto cal = p.load_calibration();
        const auto text = p.render_solution(cal);
        const auto t = CsvTable::parse(text);
        std::vector<double> ts, qs;
        for (const auto& r : t.rows) {
          ts.push_back(r[0]);
          qs.push_back(r[1]);
        }
        return py::make_tuple(ts, qs);
      });

  m.def("config_hash", [](const std::string& config_json) {
    return parse_config(nlohmann::json::parse(config_json.empty() ? "{}" : config_json)).hash();
  });
}
