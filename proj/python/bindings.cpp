#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "warp_harmonic/bubbles.hpp"
#include "warp_harmonic/cli.hpp"
#include "warp_harmonic/energy.hpp"
#include "warp_harmonic/error.hpp"
#include "warp_harmonic/mesh.hpp"
#include "warp_harmonic/run_io.hpp"
#include "warp_harmonic/solver.hpp"
#include "warp_harmonic/spectrum.hpp"
#include "warp_harmonic/warp.hpp"

namespace py = pybind11;
using namespace warp_harmonic;

namespace {

// JSON crosses the boundary as text; Python's json module rebuilds the dict.
py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Eigen::MatrixX3d rows_of(const std::vector<Vec3>& v) {
  Eigen::MatrixX3d m(v.size(), 3);
  for (std::size_t i = 0; i < v.size(); ++i) m.row(i) = v[i].transpose();
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "warp_harmonic core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<PrecisionError>(m, "PrecisionError", PyExc_ArithmeticError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

  py::class_<WarpFunction>(m, "Warp")
      .def("value", &WarpFunction::value)
      .def("derivative", &WarpFunction::derivative)
      .def_property_readonly("domain",
                             [](const WarpFunction& w) { return py::make_tuple(w.t_min(), w.t_max()); })
      .def_property_readonly("label", &WarpFunction::label)
      .def("__repr__", [](const WarpFunction& w) { return "Warp(" + w.label() + ")"; });

  m.def("make_tube_warp",
        [](double r, const std::string& blend) { return make_tube_warp(r, parse_blend_order(blend)); },
        py::arg("r"), py::arg("blend") = "C2");
  m.def("make_spectrum_warp", &make_spectrum_warp, py::arg("beta") = 1.0);
  m.def("parse_warp_spec", &parse_warp_spec);
  m.def("ledger", [](double r, double psi0) { return to_py(ledger(r, psi0).to_json()); });

  py::class_<TriMesh, std::shared_ptr<TriMesh>>(m, "Mesh")
      .def_property_readonly("vertices", [](const TriMesh& t) { return rows_of(t.vertices); })
      .def_property_readonly("level", [](const TriMesh& t) { return t.subdivision_level; })
      .def("vertex_count", &TriMesh::vertex_count)
      .def("face_count", &TriMesh::face_count)
      .def("total_area", &TriMesh::total_area);
  m.def("build_icosphere",
        [](int level) { return std::const_pointer_cast<TriMesh>(build_icosphere(level)); });

  py::class_<DiscreteMap>(m, "Map")
      .def_property_readonly("v", [](const DiscreteMap& u) { return rows_of(u.v); })
      .def_property_readonly("f", [](const DiscreteMap& u) { return u.f; })
      .def("__len__", &DiscreteMap::size);
  m.def("init_degree",
        [](std::shared_ptr<TriMesh> mesh, int d, double f0) { return init_degree(mesh, d, f0); },
        py::arg("mesh"), py::arg("degree"), py::arg("f0") = 0.0);
  m.def("single_bubble_map",
        [](std::shared_ptr<TriMesh> mesh, const Vec3& c, double lambda) {
          return single_bubble_map(mesh, c.normalized(), lambda);
        });
  m.def("energy", [](const DiscreteMap& u, const WarpFunction& w) { return energy(u, w).total_E; });
  m.def("alpha_energy", &alpha_energy_value);
  m.def("compute_degree", [](const DiscreteMap& u) { return compute_degree(u).degree; });
  m.def(
      "minimize",
      [](const DiscreteMap& u, const WarpFunction& w, double alpha, int max_iters) {
        SolveOptions o;
        o.max_iters = max_iters;
        SolveReport r = minimize(u, w, alpha, o);
        return py::make_tuple(std::move(r.final_map), to_py(r.to_json()));
      },
      py::arg("map"), py::arg("warp"), py::arg("alpha"), py::arg("max_iters") = 20000);
  m.def("detect_concentration", [](const DiscreteMap& u, const WarpFunction& w, double eps0) {
    EpsilonPolicy p;
    p.eps0 = eps0;
    py::list out;
    for (const auto& cp : detect_concentration(u, w, p)) out.append(to_py(cp.to_json()));
    return out;
  }, py::arg("map"), py::arg("warp"), py::arg("eps0") = 1.0);

  m.def("accumulation_report",
        [](int k_max, double beta, long bits) { return to_py(accumulation_report(k_max, beta, bits).to_json()); },
        py::arg("k_max") = 5, py::arg("beta") = 1.0, py::arg("bits") = 512);

  m.def("cli", [](const std::vector<std::string>& args) {
    std::vector<const char*> argv = {"warp-harmonic"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
  m.def("version", &version_string);
}
