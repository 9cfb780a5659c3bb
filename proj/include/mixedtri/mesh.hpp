#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mixedtri/geometry.hpp"

namespace mixedtri::mesh {

using geometry::Point;

enum class EdgeTag { Dirichlet, NeumannLower, NeumannUpper };
std::string_view to_string(EdgeTag tag);
EdgeTag edge_tag_from_string(std::string_view s);

struct BoundaryEdge {
  std::array<int, 2> v{};
  EdgeTag tag = EdgeTag::Dirichlet;

  friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

/// Conforming P1 triangulation of a TriangleSpec domain.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> cells;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;
  int n = 0;             // subdivisions per side of the structured lattice
  double grading = 1.0;  // radial exponent toward the Neumann vertex
  std::array<Point, 3> corners{};  // O, A, B

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_cells() const { return cells.size(); }

  double cell_area(std::size_t c) const;
  Point barycenter(std::size_t c) const;
  /// Longest edge over all cells.
  double h() const;
  /// Flags vertices lying on the Dirichlet side.
  std::vector<bool> dirichlet_mask() const;
};

/// max{1, 2/omega} with omega = pi/gamma when gamma > pi/2, else 1.
double default_grading(const geometry::TriangleSpec& spec);

/// Structured barycentric lattice on OAB. For grading s > 1 the lattice level
/// rho = i + j over n is mapped to rho^s, pulling rows toward O. Isosceles
/// specs get a lattice that is exactly mirror-symmetric about x2 = 0.
/// Throws ParamDomain unless n >= 1 and grading >= 1.
Mesh generate(const geometry::TriangleSpec& spec, int n, double grading = 1.0);

/// Midpoint 4-to-1 subdivision; existing vertices keep their indices.
Mesh refine(const Mesh& mesh);

struct ValidationReport {
  std::vector<std::string> violations;
  double min_angle = 0.0;   // radians
  double max_aspect = 0.0;  // longest edge / (2 sqrt(3) inradius); 1 for equilateral
  bool ok() const { return violations.empty(); }
};

/// Checks orientation, conformity, boundary coverage and tags. Never throws.
ValidationReport validate(const Mesh& mesh);

/// Line-oriented text: "vertices N cells M", N coordinate lines, M index
/// triples, "boundary K n N grading S", K lines "i j Tag", then the corners.
void write_text(std::ostream& os, const Mesh& mesh);
/// Same layout with a third column on each vertex line (solution export).
void write_text(std::ostream& os, const Mesh& mesh, std::span<const double> nodal);
Mesh read_text(std::istream& is);
Mesh read_text(std::istream& is, std::vector<double>* nodal);

/// For each vertex, the index of its mirror image across x2 = 0, or -1.
std::vector<int> mirror_map(const Mesh& mesh, double tol = 1e-12);

/// Vertex-to-vertex adjacency (sorted, without self).
std::vector<std::vector<int>> vertex_neighbors(const Mesh& mesh);

}  // namespace mixedtri::mesh
