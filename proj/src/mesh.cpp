#include "mixedtri/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mixedtri/error.hpp"

namespace mixedtri::mesh {

using geometry::cross;
using geometry::distance;
using geometry::dot;
using geometry::norm;

std::string_view to_string(EdgeTag tag) {
  switch (tag) {
    case EdgeTag::Dirichlet: return "Dirichlet";
    case EdgeTag::NeumannLower: return "NeumannLower";
    case EdgeTag::NeumannUpper: return "NeumannUpper";
  }
  return "?";
}

EdgeTag edge_tag_from_string(std::string_view s) {
  if (s == "Dirichlet") return EdgeTag::Dirichlet;
  if (s == "NeumannLower") return EdgeTag::NeumannLower;
  if (s == "NeumannUpper") return EdgeTag::NeumannUpper;
  throw Error(ErrorKind::Io, "unknown boundary tag '" + std::string(s) + "'");
}

double Mesh::cell_area(std::size_t c) const {
  const auto& t = cells[c];
  return 0.5 * cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
}

Point Mesh::barycenter(std::size_t c) const {
  const auto& t = cells[c];
  return (1.0 / 3.0) * (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]);
}

double Mesh::h() const {
  double h = 0.0;
  for (const auto& t : cells)
    for (int k = 0; k < 3; ++k) h = std::max(h, distance(vertices[t[k]], vertices[t[(k + 1) % 3]]));
  return h;
}

std::vector<bool> Mesh::dirichlet_mask() const {
  std::vector<bool> mask(vertices.size(), false);
  for (const auto& e : boundary_edges)
    if (e.tag == EdgeTag::Dirichlet) mask[e.v[0]] = mask[e.v[1]] = true;
  return mask;
}

double default_grading(const geometry::TriangleSpec& spec) {
  if (spec.gamma <= geometry::kPi / 2) return 1.0;
  const double omega = geometry::kPi / spec.gamma;
  return std::max(1.0, 2.0 / omega);
}

Mesh generate(const geometry::TriangleSpec& spec, int n, double grading) {
  if (n < 1) throw Error(ErrorKind::ParamDomain, "mesh needs n >= 1");
  if (!(grading >= 1.0) || !std::isfinite(grading))
    throw Error(ErrorKind::ParamDomain, "mesh needs grading >= 1");

  Mesh m;
  m.n = n;
  m.grading = grading;
  m.corners = spec.corners();
  const bool mirror = geometry::classify(spec).isosceles;

  std::vector<int> offset(n + 2, 0);
  for (int i = 0; i <= n; ++i) offset[i + 1] = offset[i] + (n - i + 1);
  auto idx = [&](int i, int j) { return offset[i] + j; };

  m.vertices.resize(static_cast<std::size_t>(offset[n + 1]));
  const double dn = n;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; i + j <= n; ++j) {
      if (i + j == 0) {
        m.vertices[idx(i, j)] = spec.O;
        continue;
      }
      const double rho = (i + j) / dn;
      const double scale = grading == 1.0 ? 1.0 : std::pow(rho, grading - 1.0);
      m.vertices[idx(i, j)] = scale * ((i / dn) * spec.A + (j / dn) * spec.B);
    }
  }
  if (mirror) {
    for (int i = 0; i <= n; ++i)
      for (int j = i + 1; i + j <= n; ++j) {
        const Point p = m.vertices[idx(j, i)];
        m.vertices[idx(i, j)] = {p.x, -p.y};
      }
    for (int i = 0; 2 * i <= n; ++i) m.vertices[idx(i, i)].y = 0.0;
  }

  m.cells.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; i + j < n; ++j) {
      m.cells.push_back({idx(i, j), idx(i + 1, j), idx(i, j + 1)});
      if (i + j + 1 < n) m.cells.push_back({idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)});
    }
  }

  for (int i = 0; i < n; ++i) m.boundary_edges.push_back({{idx(i, 0), idx(i + 1, 0)}, EdgeTag::NeumannLower});
  for (int i = n - 1; i >= 0; --i)
    m.boundary_edges.push_back({{idx(i + 1, n - i - 1), idx(i, n - i)}, EdgeTag::Dirichlet});
  for (int j = n - 1; j >= 0; --j) m.boundary_edges.push_back({{idx(0, j + 1), idx(0, j)}, EdgeTag::NeumannUpper});
  return m;
}

Mesh refine(const Mesh& mesh) {
  Mesh out;
  out.n = mesh.n * 2;
  out.grading = mesh.grading;
  out.corners = mesh.corners;
  out.vertices = mesh.vertices;

  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
    midpoint.emplace(key, id);
    return id;
  };

  out.cells.reserve(mesh.cells.size() * 4);
  for (const auto& t : mesh.cells) {
    const int ab = mid(t[0], t[1]);
    const int bc = mid(t[1], t[2]);
    const int ca = mid(t[2], t[0]);
    out.cells.push_back({t[0], ab, ca});
    out.cells.push_back({ab, t[1], bc});
    out.cells.push_back({ca, bc, t[2]});
    out.cells.push_back({ab, bc, ca});
  }
  for (const auto& e : mesh.boundary_edges) {
    const int m = mid(e.v[0], e.v[1]);
    out.boundary_edges.push_back({{e.v[0], m}, e.tag});
    out.boundary_edges.push_back({{m, e.v[1]}, e.tag});
  }
  return out;
}

ValidationReport validate(const Mesh& mesh) {
  ValidationReport r;
  auto fail = [&](const std::string& msg) {
    if (r.violations.size() < 64) r.violations.push_back(msg);
  };
  const int nv = static_cast<int>(mesh.vertices.size());

  if (mesh.n > 0) {
    const std::size_t expect_v = static_cast<std::size_t>(mesh.n + 1) * (mesh.n + 2) / 2;
    const std::size_t expect_c = static_cast<std::size_t>(mesh.n) * mesh.n;
    if (mesh.vertices.size() != expect_v)
      fail("vertex count " + std::to_string(mesh.vertices.size()) + " != (n+1)(n+2)/2");
    if (mesh.cells.size() != expect_c)
      fail("cell count " + std::to_string(mesh.cells.size()) + " != n^2");
  }

  double min_angle = geometry::kPi;
  double max_aspect = 0.0;
  double total_area = 0.0;
  std::map<std::pair<int, int>, int> edge_count;
  bool indices_ok = true;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& t = mesh.cells[c];
    if (std::any_of(t.begin(), t.end(), [&](int v) { return v < 0 || v >= nv; })) {
      fail("cell " + std::to_string(c) + " has an out-of-range vertex index");
      indices_ok = false;
      continue;
    }
    const double area = mesh.cell_area(c);
    total_area += area;
    if (!(area > 0.0)) fail("cell " + std::to_string(c) + " has non-positive signed area (orientation)");
    double perim = 0.0;
    double longest = 0.0;
    for (int k = 0; k < 3; ++k) {
      const Point p = mesh.vertices[t[k]];
      const Point a = mesh.vertices[t[(k + 1) % 3]] - p;
      const Point b = mesh.vertices[t[(k + 2) % 3]] - p;
      const double ang = std::acos(std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0));
      min_angle = std::min(min_angle, ang);
      perim += norm(a);
      longest = std::max(longest, norm(a));
      ++edge_count[std::minmax(t[k], t[(k + 1) % 3])];
    }
    if (area > 0.0) {
      const double inradius = 2.0 * std::abs(area) / perim;
      max_aspect = std::max(max_aspect, longest / (2.0 * std::sqrt(3.0) * inradius));
    }
  }
  r.min_angle = min_angle;
  r.max_aspect = max_aspect;

  std::map<std::pair<int, int>, int> boundary;
  for (const auto& e : mesh.boundary_edges) {
    if (e.v[0] < 0 || e.v[0] >= nv || e.v[1] < 0 || e.v[1] >= nv) {
      fail("boundary edge with out-of-range vertex index");
      indices_ok = false;
      continue;
    }
    ++boundary[std::minmax(e.v[0], e.v[1])];
  }
  for (const auto& [edge, count] : edge_count) {
    if (count > 2) fail("edge shared by more than two cells");
    const bool is_boundary = boundary.count(edge) > 0;
    if (count == 1 && !is_boundary) fail("edge on a single cell is not a boundary edge");
    if (count == 2 && is_boundary) fail("interior edge tagged as boundary");
  }
  for (const auto& [edge, count] : boundary) {
    if (count > 1) fail("duplicate boundary edge");
    if (!edge_count.count(edge)) fail("boundary edge not present in any cell");
  }
  if (!indices_ok) return r;

  // Geometry of the sides.
  const auto [O, A, B] = mesh.corners;
  struct SideGeom {
    Point a, b;
  };
  auto side_of = [&](EdgeTag tag) -> SideGeom {
    switch (tag) {
      case EdgeTag::Dirichlet: return {A, B};
      case EdgeTag::NeumannLower: return {O, A};
      case EdgeTag::NeumannUpper: return {O, B};
    }
    return {O, A};
  };
  const double scale = std::max({norm(A), norm(B), 1.0});
  std::map<EdgeTag, double> tag_len;
  for (const auto& e : mesh.boundary_edges) {
    const SideGeom s = side_of(e.tag);
    const Point d = s.b - s.a;
    const double len = norm(d);
    for (int v : e.v) {
      const Point p = mesh.vertices[v];
      const double off = std::abs(cross(d, p - s.a)) / len;
      const double t = dot(d, p - s.a) / (len * len);
      if (off > 1e-10 * scale || t < -1e-10 || t > 1.0 + 1e-10) {
        fail("boundary edge tagged " + std::string(to_string(e.tag)) + " is off its side");
        break;
      }
    }
    tag_len[e.tag] += distance(mesh.vertices[e.v[0]], mesh.vertices[e.v[1]]);
  }
  for (EdgeTag tag : {EdgeTag::Dirichlet, EdgeTag::NeumannLower, EdgeTag::NeumannUpper}) {
    const SideGeom s = side_of(tag);
    const double expect = distance(s.a, s.b);
    if (std::abs(tag_len[tag] - expect) > 1e-10 * expect)
      fail("boundary tagged " + std::string(to_string(tag)) + " does not cover its side");
  }
  const double expect_area = 0.5 * std::abs(cross(A - O, B - O));
  if (std::abs(total_area - expect_area) > 1e-12 * expect_area)
    fail("cell areas do not sum to the triangle area");
  return r;
}

void write_text(std::ostream& os, const Mesh& mesh) { write_text(os, mesh, {}); }

void write_text(std::ostream& os, const Mesh& mesh, std::span<const double> nodal) {
  if (!nodal.empty() && nodal.size() != mesh.vertices.size())
    throw Error(ErrorKind::ParamDomain, "nodal field size does not match the mesh");
  char buf[128];
  os << "vertices " << mesh.vertices.size() << " cells " << mesh.cells.size() << '\n';
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Point p = mesh.vertices[v];
    if (nodal.empty())
      std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    else
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x, p.y, nodal[v]);
    os << buf;
  }
  for (const auto& t : mesh.cells) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", mesh.grading);
  os << "boundary " << mesh.boundary_edges.size() << " n " << mesh.n << " grading " << buf << '\n';
  for (const auto& e : mesh.boundary_edges)
    os << e.v[0] << ' ' << e.v[1] << ' ' << to_string(e.tag) << '\n';
  os << "corners";
  for (const Point& p : mesh.corners) {
    std::snprintf(buf, sizeof buf, " %.17g %.17g", p.x, p.y);
    os << buf;
  }
  os << '\n';
}

namespace {

void expect_word(std::istream& is, const char* word) {
  std::string w;
  if (!(is >> w) || w != word)
    throw Error(ErrorKind::Io, std::string("mesh text: expected '") + word + "', got '" + w + "'");
}

}  // namespace

Mesh read_text(std::istream& is) { return read_text(is, nullptr); }

Mesh read_text(std::istream& is, std::vector<double>* nodal) {
  Mesh m;
  std::size_t nv = 0;
  std::size_t nc = 0;
  expect_word(is, "vertices");
  is >> nv;
  expect_word(is, "cells");
  is >> nc;
  if (!is) throw Error(ErrorKind::Io, "mesh text: bad header");
  m.vertices.resize(nv);
  if (nodal) nodal->resize(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    is >> m.vertices[v].x >> m.vertices[v].y;
    if (nodal) is >> (*nodal)[v];
  }
  m.cells.resize(nc);
  for (auto& t : m.cells) is >> t[0] >> t[1] >> t[2];
  std::size_t nb = 0;
  expect_word(is, "boundary");
  is >> nb;
  expect_word(is, "n");
  is >> m.n;
  expect_word(is, "grading");
  is >> m.grading;
  m.boundary_edges.resize(nb);
  for (auto& e : m.boundary_edges) {
    std::string tag;
    is >> e.v[0] >> e.v[1] >> tag;
    e.tag = edge_tag_from_string(tag);
  }
  expect_word(is, "corners");
  for (auto& p : m.corners) is >> p.x >> p.y;
  if (!is) throw Error(ErrorKind::Io, "mesh text: truncated input");
  return m;
}

std::vector<int> mirror_map(const Mesh& mesh, double tol) {
  const std::size_t nv = mesh.vertices.size();
  std::vector<int> order(nv);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Point p = mesh.vertices[a];
    const Point q = mesh.vertices[b];
    return p.x < q.x || (p.x == q.x && p.y < q.y);
  });
  std::vector<int> map(nv, -1);
  for (std::size_t v = 0; v < nv; ++v) {
    const Point target{mesh.vertices[v].x, -mesh.vertices[v].y};
    auto lo = std::lower_bound(order.begin(), order.end(), target.x - tol,
                               [&](int a, double x) { return mesh.vertices[a].x < x; });
    for (auto it = lo; it != order.end() && mesh.vertices[*it].x <= target.x + tol; ++it) {
      if (distance(mesh.vertices[*it], target) <= tol) {
        map[v] = *it;
        break;
      }
    }
  }
  return map;
}

std::vector<std::vector<int>> vertex_neighbors(const Mesh& mesh) {
  std::vector<std::vector<int>> nb(mesh.vertices.size());
  for (const auto& t : mesh.cells)
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        if (k != l) nb[t[k]].push_back(t[l]);
  for (auto& v : nb) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return nb;
}

}  // namespace mixedtri::mesh
