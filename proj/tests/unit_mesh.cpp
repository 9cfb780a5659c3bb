#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mixedtri/error.hpp"
#include "mixedtri/mesh.hpp"

using namespace mixedtri;
using namespace mixedtri::mesh;
using geometry::deg2rad;
using geometry::kPi;
using geometry::make_triangle;

namespace {

double tag_length(const Mesh& m, EdgeTag tag) {
  double s = 0.0;
  for (const auto& e : m.boundary_edges)
    if (e.tag == tag) s += geometry::distance(m.vertices[e.v[0]], m.vertices[e.v[1]]);
  return s;
}

double min_cell_diameter_near(const Mesh& m, geometry::Point p, double radius) {
  double best = 1e300;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    if (geometry::distance(m.barycenter(c), p) > radius) continue;
    const auto& t = m.cells[c];
    double d = 0.0;
    for (int k = 0; k < 3; ++k)
      d = std::max(d, geometry::distance(m.vertices[t[k]], m.vertices[t[(k + 1) % 3]]));
    best = std::min(best, d);
  }
  return best;
}

}  // namespace

TEST_CASE("generate counts") {
  const auto s = make_triangle(deg2rad(60), deg2rad(40));
  const auto m1 = generate(s, 1);
  CHECK(m1.num_vertices() == 3);
  CHECK(m1.num_cells() == 1);
  CHECK(m1.boundary_edges.size() == 3);
  const auto m4 = generate(s, 4);
  CHECK(m4.num_vertices() == 15);
  CHECK(m4.num_cells() == 16);
  for (int n : {2, 7, 16}) {
    const auto m = generate(s, n);
    CHECK(m.num_vertices() == static_cast<std::size_t>((n + 1) * (n + 2) / 2));
    CHECK(m.num_cells() == static_cast<std::size_t>(n * n));
    CHECK(m.boundary_edges.size() == static_cast<std::size_t>(3 * n));
  }
  CHECK_THROWS_AS(generate(s, 0), Error);
  CHECK_THROWS_AS(generate(s, 4, 0.5), Error);
}

TEST_CASE("structured mesh invariants") {
  for (auto [a, b] : {std::pair{45.0, 45.0}, {60.0, 40.0}, {48.0, 33.0}, {30.0, 30.0}, {80.0, 5.0}}) {
    const auto s = make_triangle(deg2rad(a), deg2rad(b));
    for (double grading : {1.0, default_grading(s), 1.7}) {
      const auto m = generate(s, 12, grading);
      const auto r = validate(m);
      CAPTURE(a);
      CAPTURE(b);
      CAPTURE(grading);
      for (const auto& v : r.violations) MESSAGE(v);
      CHECK(r.ok());
      double area = 0.0;
      for (std::size_t c = 0; c < m.num_cells(); ++c) area += m.cell_area(c);
      CHECK(std::abs(area - s.area()) <= 1e-12 * s.area());
      CHECK(std::abs(tag_length(m, EdgeTag::Dirichlet) - s.dirichlet_len) <= 1e-10 * s.dirichlet_len);
      CHECK(std::abs(tag_length(m, EdgeTag::NeumannLower) - s.phi0) <= 1e-10 * s.phi0);
      CHECK(std::abs(tag_length(m, EdgeTag::NeumannUpper) - s.psi0) <= 1e-10 * s.psi0);
    }
  }
}

TEST_CASE("uniform right isosceles n = 8 has minimum angle 45 degrees") {
  const auto r = validate(generate(make_triangle(kPi / 4, kPi / 4), 8));
  CHECK(r.ok());
  CHECK(std::abs(r.min_angle - kPi / 4) < 1e-12);
}

TEST_CASE("flipped cell is reported") {
  auto m = generate(make_triangle(kPi / 4, kPi / 4), 4);
  std::swap(m.cells[5][1], m.cells[5][2]);
  const auto r = validate(m);
  CHECK_FALSE(r.ok());
  bool orientation = false;
  for (const auto& v : r.violations)
    if (v.find("area") != std::string::npos || v.find("orient") != std::string::npos) orientation = true;
  CHECK(orientation);
}

TEST_CASE("validate never throws on garbage") {
  Mesh m;
  m.vertices = {{0, 0}, {1, 0}};
  m.cells = {{0, 1, 7}};
  ValidationReport r;
  CHECK_NOTHROW(r = validate(m));
  CHECK_FALSE(r.ok());
}

TEST_CASE("grading default") {
  CHECK(default_grading(make_triangle(deg2rad(60), deg2rad(40))) == 1.0);
  CHECK(default_grading(make_triangle(kPi / 4, kPi / 4)) == 1.0);
  // gamma = 120 deg: omega = 1.5, s = 4/3
  CHECK(std::abs(default_grading(make_triangle(deg2rad(30), deg2rad(30))) - 4.0 / 3.0) < 1e-14);
}

TEST_CASE("graded mesh shrinks cells near O by about n^(1-s)") {
  const auto s = make_triangle(deg2rad(30), deg2rad(30));
  const double g = default_grading(s);
  for (int n : {16, 32, 64}) {
    const auto uni = generate(s, n, 1.0);
    const auto grd = generate(s, n, g);
    const double r = 1.5 / n;
    const double ratio = min_cell_diameter_near(grd, s.O, 2 * r) / min_cell_diameter_near(uni, s.O, 2 * r);
    const double expect = std::pow(static_cast<double>(n), 1.0 - g);
    CAPTURE(n);
    CHECK(ratio < 1.0);
    CHECK(ratio == doctest::Approx(expect).epsilon(0.5));
  }
}

TEST_CASE("graded mesh minimum angle bounded independently of n") {
  const auto s = make_triangle(deg2rad(30), deg2rad(30));
  const double g = default_grading(s);
  double lo = 1e9, hi = 0;
  for (int n : {8, 16, 32, 64}) {
    const auto r = validate(generate(s, n, g));
    CHECK(r.ok());
    lo = std::min(lo, r.min_angle);
    hi = std::max(hi, r.min_angle);
  }
  CHECK(lo > 0.2 * hi);
  CHECK(lo > deg2rad(5));
}

TEST_CASE("refine") {
  const auto s = make_triangle(deg2rad(60), deg2rad(40));
  const auto m1 = generate(s, 1);
  const auto m2 = refine(m1);
  CHECK(m2.num_vertices() == 6);
  CHECK(m2.num_cells() == 4);
  CHECK(validate(m2).ok());
  const auto a = generate(s, 2);
  const auto a4 = refine(refine(a));
  CHECK(a4.num_cells() == 16 * a.num_cells());
  CHECK(validate(a4).ok());
  for (std::size_t v = 0; v < a.num_vertices(); ++v) CHECK(a4.vertices[v] == a.vertices[v]);
  // areas exactly quartered on ungraded meshes
  const auto r = refine(a);
  for (std::size_t c = 0; c < r.num_cells(); ++c)
    CHECK(std::abs(r.cell_area(c) - a.cell_area(c / 4) / 4.0) <= 1e-15 * s.area());
  // tags inherited
  CHECK(std::abs(tag_length(r, EdgeTag::Dirichlet) - s.dirichlet_len) < 1e-12);
}

TEST_CASE("refined meshes stay symmetric for isosceles specs") {
  const auto m = refine(generate(make_triangle(deg2rad(30), deg2rad(30)), 6, 4.0 / 3.0));
  const auto map = mirror_map(m);
  CHECK(std::none_of(map.begin(), map.end(), [](int v) { return v < 0; }));
}

TEST_CASE("isosceles mesh is exactly mirror symmetric") {
  for (double a : {20.0, 30.0, 44.0, 45.0}) {
    const auto s = make_triangle(deg2rad(a), deg2rad(a));
    const auto m = generate(s, 16, default_grading(s));
    const auto map = mirror_map(m, 0.0);
    for (std::size_t v = 0; v < map.size(); ++v) {
      REQUIRE(map[v] >= 0);
      CHECK(map[map[v]] == static_cast<int>(v));
    }
    std::set<std::array<int, 3>> cells;
    for (auto t : m.cells) {
      std::sort(t.begin(), t.end());
      cells.insert(t);
    }
    for (const auto& t : m.cells) {
      std::array<int, 3> u{map[t[0]], map[t[1]], map[t[2]]};
      std::sort(u.begin(), u.end());
      CHECK(cells.count(u) == 1);
    }
  }
  const auto m = generate(make_triangle(deg2rad(48), deg2rad(33)), 8);
  const auto map = mirror_map(m);
  CHECK(std::count(map.begin(), map.end(), -1) > 0);
}

TEST_CASE("text round trip is bit exact") {
  const auto s = make_triangle(deg2rad(48), deg2rad(33));
  const auto m = generate(s, 9, 1.4);
  std::stringstream ss;
  write_text(ss, m);
  const auto first = ss.str();
  CHECK(first.rfind("vertices 55 cells 81\n", 0) == 0);
  const auto back = read_text(ss);
  CHECK(back.vertices == m.vertices);
  CHECK(back.cells == m.cells);
  CHECK(back.boundary_edges == m.boundary_edges);
  CHECK(back.n == m.n);
  CHECK(back.grading == m.grading);
  std::stringstream again;
  write_text(again, back);
  CHECK(again.str() == first);

  std::vector<double> nodal(m.num_vertices());
  for (std::size_t v = 0; v < nodal.size(); ++v) nodal[v] = std::sin(1.0 + v) / 3.0;
  std::stringstream sol;
  write_text(sol, m, nodal);
  std::vector<double> back_nodal;
  const auto back2 = read_text(sol, &back_nodal);
  CHECK(back_nodal == nodal);
  CHECK(back2.vertices == m.vertices);

  std::stringstream bad("vertices 3 cells");
  CHECK_THROWS_AS(read_text(bad), Error);
}

TEST_CASE("dirichlet mask and neighbors") {
  const auto m = generate(make_triangle(kPi / 4, kPi / 4), 4);
  const auto mask = m.dirichlet_mask();
  CHECK(std::count(mask.begin(), mask.end(), true) == 5);
  const auto nb = vertex_neighbors(m);
  CHECK(nb[0].size() == 2);
}
