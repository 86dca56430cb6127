#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mmsie/runner.hpp"

namespace py = pybind11;
using namespace mmsie;

namespace {

Eigen::MatrixX3d vertex_array(const TriangleMesh& m) {
  Eigen::MatrixX3d v(m.num_vertices(), 3);
  for (std::size_t i = 0; i < m.num_vertices(); ++i) v.row(i) = m.vertices()[i].transpose();
  return v;
}

Eigen::MatrixX3i triangle_array(const TriangleMesh& m) {
  Eigen::MatrixX3i t(m.num_triangles(), 3);
  for (std::size_t i = 0; i < m.num_triangles(); ++i)
    for (int k = 0; k < 3; ++k) t(i, k) = m.triangles()[i][k];
  return t;
}

TriangleMesh mesh_from_arrays(const Eigen::MatrixX3d& v, const Eigen::MatrixX3i& t) {
  std::vector<Vec3> verts(v.rows());
  for (Eigen::Index i = 0; i < v.rows(); ++i) verts[i] = v.row(i).transpose();
  std::vector<Triangle> tris(t.rows());
  for (Eigen::Index i = 0; i < t.rows(); ++i) tris[i] = {t(i, 0), t(i, 1), t(i, 2)};
  return TriangleMesh(std::move(verts), std::move(tris));
}

py::dict run_dict(const RunResult& r) {
  py::dict report;
  for (const auto& [k, v] : r.report) report[py::str(k)] = v;
  py::list cuts;
  for (const auto& c : r.cuts) {
    std::vector<double> th, ph, d;
    std::vector<Complex> et, ep;
    for (const auto& s : c.samples) {
      th.push_back(s.theta);
      ph.push_back(s.phi);
      d.push_back(s.directivity_dbi);
      et.push_back(s.e_theta);
      ep.push_back(s.e_phi);
    }
    py::dict cut;
    cut["theta"] = th;
    cut["phi"] = ph;
    cut["directivity_dbi"] = d;
    cut["e_theta"] = et;
    cut["e_phi"] = ep;
    cuts.append(cut);
  }
  py::dict out;
  out["report"] = report;
  out["cuts"] = cuts;
  out["currents"] = r.currents;
  out["iterations"] = r.solve.iterations;
  out["converged"] = r.solve.converged;
  out["history"] = r.solve.history;
  out["scatterer_unknowns"] = r.scatterer_unknowns;
  out["solved_unknowns"] = r.solved_unknowns;
  if (r.input_admittance) out["input_admittance"] = *r.input_admittance;
  return out;
}

}  // namespace

PYBIND11_MODULE(mmsie, m) {
  m.doc() = "Macromodel surface integral equation solver for PEC arrays";

  // Translators are tried newest first, so the base class goes first.
  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<GeometryError>(m, "GeometryError", base);
  py::register_exception<TopologyError>(m, "TopologyError", base);

  py::class_<TriangleMesh>(m, "Mesh")
      .def(py::init(&mesh_from_arrays), py::arg("vertices"), py::arg("triangles"))
      .def_property_readonly("vertices", &vertex_array)
      .def_property_readonly("triangles", &triangle_array)
      .def_property_readonly("closed", &TriangleMesh::closed)
      .def_property_readonly("num_edges", &TriangleMesh::num_edges)
      .def_property_readonly("num_interior_edges", &TriangleMesh::num_interior_edges)
      .def("total_area", &TriangleMesh::total_area)
      .def("translated", &TriangleMesh::translated)
      .def("__repr__", [](const TriangleMesh& t) {
        return "<Mesh " + std::to_string(t.num_vertices()) + " vertices, " + std::to_string(t.num_triangles()) +
               " triangles>";
      });

  m.def("load_mesh", [](const std::string& path, const std::string& fmt) { return load_mesh(path, parse_mesh_format(fmt)); },
        py::arg("path"), py::arg("format") = "msh");
  m.def("plate", &generate_plate, py::arg("center"), py::arg("size_x"), py::arg("size_y"), py::arg("nx"), py::arg("ny"));
  m.def("box", &generate_box, py::arg("center"), py::arg("dims"), py::arg("edge"));
  m.def("sphere", &generate_sphere, py::arg("center"), py::arg("radius"), py::arg("subdivisions"));
  m.def("cross", &generate_cross, py::arg("center"), py::arg("arm_length"), py::arg("arm_width"),
        py::arg("cells_per_width"));
  m.def("bent_strip", &generate_bent_strip, py::arg("center"), py::arg("length"), py::arg("width"),
        py::arg("angle_deg"), py::arg("nx"), py::arg("ny"));
  m.def("meander", &generate_meander, py::arg("center"), py::arg("turns"), py::arg("pitch"), py::arg("height"),
        py::arg("width"), py::arg("cells_per_width"));

  m.def(
      "assemble_L",
      [](const TriangleMesh& test, const TriangleMesh& src, double f) {
        BasisSpace a = build_rwg(test);
        if (&test == &src) return assemble_L(a, a, MediumParams::at(f), QuadratureRule{});
        return assemble_L(a, build_rwg(src), MediumParams::at(f), QuadratureRule{});
      },
      py::arg("test"), py::arg("source"), py::arg("frequency_hz"), "Galerkin EFIE matrix between RWG spaces.");

  py::class_<Macromodel, std::shared_ptr<Macromodel>>(m, "Macromodel")
      .def_readonly("shape_id", &Macromodel::shape_id)
      .def_readonly("n", &Macromodel::n)
      .def_readonly("n_hat", &Macromodel::n_hat)
      .def_readonly("t", &Macromodel::t)
      .def_readonly("b", &Macromodel::b)
      .def("recover_current", &Macromodel::recover_current, py::arg("e_hat"), py::arg("v") = CVector())
      .def(
          "save", [](const Macromodel& mm, const std::string& path) { save_macromodel(path, mm); }, py::arg("path"));
  m.def(
      "build_macromodel",
      [](const TriangleMesh& s, const TriangleMesh& e, double f) {
        return std::make_shared<Macromodel>(build_macromodel(make_element(s, e, Vec3::Zero()), MediumParams::at(f),
                                                             QuadratureRule{}));
      },
      py::arg("scatterer"), py::arg("equivalent"), py::arg("frequency_hz"));
  m.def(
      "load_macromodel", [](const std::string& p) { return std::make_shared<Macromodel>(load_macromodel(p)); },
      py::arg("path"));

  m.def(
      "gmres",
      [](const CMatrix& a, const CVector& b, double tol, int restart, int max_iters) {
        SolveOptions o;
        o.rel_tol = tol;
        o.restart = restart;
        o.max_iters = max_iters;
        SolveResult r = gmres(DenseOperator(a), b, o);
        return py::make_tuple(r.solution, r.iterations, r.converged, r.history);
      },
      py::arg("a"), py::arg("b"), py::arg("rel_tol") = 1e-6, py::arg("restart") = 200, py::arg("max_iters") = 1000,
      "Restarted GMRES on a dense matrix; returns (x, iterations, converged, history).");

  m.def(
      "run_config", [](const std::string& text, const std::string& base_dir) { return run_dict(run(parse_config(text, base_dir))); },
      py::arg("json_text"), py::arg("base_dir") = ".", "Parse a JSON run description, solve, return results.");
  m.def(
      "run_file",
      [](const std::string& path, const std::string& out_dir) {
        RunResult r = run(load_config(path));
        if (!out_dir.empty()) write_artifacts(r, out_dir);
        return run_dict(r);
      },
      py::arg("path"), py::arg("out_dir") = "");
  m.def("schema", &config_schema);
}
