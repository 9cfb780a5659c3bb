#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mixedtri/cli.hpp"
#include "mixedtri/error.hpp"
#include "mixedtri/sweep.hpp"

namespace py = pybind11;
using namespace mixedtri;
using geometry::deg2rad;

namespace {

geometry::TriangleSpec spec_deg(double alpha_deg, double beta_deg) {
  return geometry::make_triangle(deg2rad(alpha_deg), deg2rad(beta_deg));
}

mesh::Mesh mesh_for(const geometry::TriangleSpec& spec, int n, double grading) {
  return mesh::generate(spec, n, grading > 0.0 ? grading : mesh::default_grading(spec));
}

py::dict triangle(double alpha_deg, double beta_deg) {
  const auto s = spec_deg(alpha_deg, beta_deg);
  const auto c = geometry::classify(s);
  py::dict d;
  d["alpha"] = s.alpha;
  d["beta"] = s.beta;
  d["gamma"] = s.gamma;
  d["O"] = py::make_tuple(s.O.x, s.O.y);
  d["A"] = py::make_tuple(s.A.x, s.A.y);
  d["B"] = py::make_tuple(s.B.x, s.B.y);
  d["phi0"] = s.phi0;
  d["psi0"] = s.psi0;
  d["neumann_vertex"] = std::string(geometry::to_string(c.neumann_vertex));
  d["isosceles"] = c.isosceles;
  d["longer_neumann_side"] = std::string(geometry::to_string(c.longer_neumann_side));
  d["middle_side"] = std::string(geometry::to_string(c.middle_side));
  d["condition_13"] = geometry::condition_13(s.alpha, s.beta);
  return d;
}

py::dict eigen(double alpha_deg, double beta_deg, int n, double grading) {
  const auto s = spec_deg(alpha_deg, beta_deg);
  const auto m = mesh_for(s, n, grading);
  const auto e = fem::solve_eigenproblem(m);
  Eigen::MatrixX2d xy(m.num_vertices(), 2);
  for (std::size_t i = 0; i < m.num_vertices(); ++i) xy.row(i) << m.vertices[i].x, m.vertices[i].y;
  Eigen::MatrixX3i cells(m.num_cells(), 3);
  for (std::size_t c = 0; c < m.num_cells(); ++c)
    cells.row(c) << m.cells[c][0], m.cells[c][1], m.cells[c][2];
  py::dict d;
  d["mu"] = e.mu;
  d["u"] = e.u;
  d["vertices"] = xy;
  d["cells"] = cells;
  d["h"] = m.h();
  d["residual"] = e.residual;
  return d;
}

py::dict verify(double alpha_deg, double beta_deg, int n, double grading, int positivity_grid) {
  const auto s = spec_deg(alpha_deg, beta_deg);
  const auto m = mesh_for(s, n, grading);
  const auto e = fem::solve_eigenproblem(m);
  qualify::QualifyOptions o;
  o.positivity_grid = positivity_grid;
  const auto r = qualify::qualify_all(s, m, e, o);
  py::dict d;
  d["mu"] = r.mu;
  d["all_pass"] = r.all_pass();
  d["failures"] = r.failures();
  d["max_class"] = std::string(qualify::to_string(r.max_location.cls));
  d["predicted_max_class"] = std::string(qualify::to_string(qualify::predicted_max_class(s)));
  d["max_point"] = py::make_tuple(r.max_location.point.x, r.max_location.point.y);
  d["report"] = qualify::to_text(r);
  return d;
}

std::string sweep_csv(const std::vector<std::pair<double, double>>& grid_deg, int n, int workers) {
  std::vector<std::pair<double, double>> grid;
  grid.reserve(grid_deg.size());
  for (auto [a, b] : grid_deg) grid.emplace_back(deg2rad(a), deg2rad(b));
  sweep::SweepOptions o;
  o.n = n;
  o.workers = workers;
  std::vector<sweep::SweepRecord> recs;
  {
    py::gil_scoped_release release;
    recs = sweep::sweep_angles(grid, o);
  }
  std::ostringstream os;
  sweep::write_csv(os, recs);
  return os.str();
}

py::list continuation(double a, double b, const std::vector<double>& ts, int n) {
  const auto path = sweep::continuation_t(a, b, ts, n);
  py::list out;
  for (const auto& r : path.records) {
    py::dict d;
    d["t"] = r.t;
    d["gamma"] = r.gamma;
    d["mu"] = r.mu;
    d["monotone_pass"] = r.monotone.pass;
    d["monotone_worst"] = r.monotone.worst_value;
    d["max_class"] = std::string(qualify::to_string(r.max_class));
    out.append(d);
  }
  return out;
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> argv{"mixedtri"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = cli::run(argv, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mixed Dirichlet-Neumann triangles: eigenfunctions and their qualitative properties";

  py::register_exception<Error>(m, "Error");

  m.def("triangle", &triangle, py::arg("alpha_deg"), py::arg("beta_deg"),
        "Vertices, side lengths and classification of the triangle.");
  m.def("eigen", &eigen, py::arg("alpha_deg"), py::arg("beta_deg"), py::arg("n") = 64,
        py::arg("grading") = 0.0, "Principal eigenpair with the mesh as arrays.");
  m.def("verify", &verify, py::arg("alpha_deg"), py::arg("beta_deg"), py::arg("n") = 64,
        py::arg("grading") = 0.0, py::arg("positivity_grid") = 4,
        "Qualitative report of the principal eigenfunction.");
  m.def("sweep_csv", &sweep_csv, py::arg("grid_deg"), py::arg("n") = 64, py::arg("workers") = 0,
        "Sweep over (alpha, beta) pairs in degrees; returns the CSV text.");
  m.def("continuation", &continuation, py::arg("a"), py::arg("b"), py::arg("t"),
        py::arg("n") = 64, "Deformation path records.");
  m.def("run_cli", &run_cli, py::arg("args"),
        "Runs the command line front end; returns (exit code, stdout, stderr).");
}
