#include "mixedtri/qualify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "mixedtri/error.hpp"

namespace mixedtri::qualify {

using geometry::kPi;
using geometry::TriangleSpec;
using mesh::EdgeTag;
using mesh::Mesh;

namespace {

double corner_distance(const Mesh& mesh, Point x) {
  double d = std::numeric_limits<double>::infinity();
  for (const Point& c : mesh.corners) d = std::min(d, geometry::distance(x, c));
  return d;
}

double segment_distance(Point x, Point a, Point b) {
  const Point ab = b - a;
  const double t = std::clamp(geometry::dot(x - a, ab) / geometry::dot(ab, ab), 0.0, 1.0);
  return geometry::distance(x, a + t * ab);
}

double max_abs(const Vector& u) { return u.size() ? u.cwiseAbs().maxCoeff() : 0.0; }

bool clears(Sign expected, double worst, double tol) {
  return expected == Sign::Negative ? worst < tol : worst > -tol;
}

// Keeps the least favourable value for the expected sign.
struct Worst {
  Sign expected;
  double value;
  Point at;
  int count = 0;

  explicit Worst(Sign s)
      : expected(s),
        value(s == Sign::Negative ? -std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::infinity()) {}

  void add(double v, Point x) {
    ++count;
    if (expected == Sign::Negative ? v > value : v < value) {
      value = v;
      at = x;
    }
  }

  Verdict verdict(double tol, double radius) const {
    Verdict v;
    v.expected = expected;
    v.tolerance = tol;
    v.excluded_radius = radius;
    v.samples = count;
    if (count == 0) {
      v.pass = true;
      return v;
    }
    v.worst_value = value;
    v.worst_location = at;
    v.pass = clears(expected, value, tol);
    return v;
  }
};

// max |grad u| over cells whose barycenter lies outside the corner balls.
double gradient_scale(const Mesh& mesh, const std::vector<Point>& grads, double radius) {
  double g = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    if (corner_distance(mesh, mesh.barycenter(c)) > radius) g = std::max(g, geometry::norm(grads[c]));
  return g;
}

std::pair<Point, Point> side_endpoints(const Mesh& mesh, EdgeTag tag) {
  switch (tag) {
    case EdgeTag::NeumannLower: return {mesh.corners[0], mesh.corners[1]};
    case EdgeTag::NeumannUpper: return {mesh.corners[0], mesh.corners[2]};
    case EdgeTag::Dirichlet: break;
  }
  return {mesh.corners[1], mesh.corners[2]};
}

struct Quadratic1D {
  double a = 0.0, b = 0.0, c = 0.0;  // a + b s + c s^2
  bool ok = false;
};

Quadratic1D fit_quadratic_1d(const std::vector<double>& s, const std::vector<double>& v) {
  Quadratic1D q;
  if (s.size() < 3) return q;
  Eigen::MatrixXd a(s.size(), 3);
  Eigen::VectorXd rhs(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = s[i];
    a(i, 2) = s[i] * s[i];
    rhs(i) = v[i];
  }
  const auto qr = a.colPivHouseholderQr();
  if (qr.rank() < 3) return q;
  const Eigen::Vector3d x = qr.solve(rhs);
  q.a = x(0);
  q.b = x(1);
  q.c = x(2);
  q.ok = true;
  return q;
}

// u ~ k0 + k1 dx + k2 dy + k3 dx^2 + k4 dx dy + k5 dy^2 about `center`.
std::optional<Eigen::Matrix<double, 6, 1>> fit_quadratic_2d(const std::vector<Point>& pts,
                                                           const std::vector<double>& vals,
                                                           Point center) {
  if (pts.size() < 6) return std::nullopt;
  Eigen::MatrixXd a(pts.size(), 6);
  Eigen::VectorXd rhs(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double dx = pts[i].x - center.x, dy = pts[i].y - center.y;
    a.row(i) << 1.0, dx, dy, dx * dx, dx * dy, dy * dy;
    rhs(i) = vals[i];
  }
  const auto qr = a.colPivHouseholderQr();
  if (qr.rank() < 6) return std::nullopt;
  return Eigen::Matrix<double, 6, 1>(qr.solve(rhs));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_point(Point p) { return fmt(p.x) + " " + fmt(p.y); }

}  // namespace

double exclusion_radius(const Mesh& mesh) { return kExclusionFactor * mesh.h(); }

Verdict directional_monotonicity(const Mesh& mesh, const Vector& u, double theta, double exclusion,
                                 Sign expected, double c) {
  const double radius = exclusion < 0.0 ? exclusion_radius(mesh) : exclusion;
  const auto grads = fem::gradient_field(mesh, u);
  const Point e{std::cos(theta), std::sin(theta)};
  Worst worst(expected);
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const Point x = mesh.barycenter(k);
    if (corner_distance(mesh, x) <= radius) continue;
    worst.add(geometry::dot(grads[k], e), x);
  }
  const double tol = c * mesh.h() * gradient_scale(mesh, grads, radius);
  return worst.verdict(tol, radius);
}

double middle_side_direction(const TriangleSpec& spec) {
  const auto cls = geometry::classify(spec);
  if (cls.isosceles) return 0.0;
  switch (cls.middle_side) {
    case geometry::SideId::NeumannUpper: return -spec.beta;
    case geometry::SideId::NeumannLower: return spec.alpha;
    case geometry::SideId::Dirichlet: break;
  }
  return 0.0;
}

Verdict normal_monotonicity_middle_side(const Mesh& mesh, const Vector& u, const TriangleSpec& spec,
                                        double c) {
  return directional_monotonicity(mesh, u, middle_side_direction(spec), -1.0, Sign::Negative, c);
}

std::vector<Point> polygon_samples(const std::vector<Point>& polygon, int samples) {
  std::vector<Point> out;
  if (polygon.size() < 3 || samples <= 0) return out;
  const double total = geometry::polygon_area(polygon);
  if (total <= 0.0) return out;
  for (std::size_t k = 1; k + 1 < polygon.size(); ++k) {
    const Point a = polygon[0], b = polygon[k], cc = polygon[k + 1];
    const double share = samples * std::abs(geometry::cross(b - a, cc - a)) / (2.0 * total);
    const int m = std::max(1, static_cast<int>(std::lround(std::sqrt(share))));
    // Centroids of the m^2 sub-triangles of the barycentric lattice.
    for (int i = 0; i < m; ++i)
      for (int j = 0; i + j < m; ++j) {
        for (int down = 0; down < 2; ++down) {
          if (down && i + j + 1 >= m) continue;
          const double s = (i + (down ? 2.0 : 1.0) / 3.0) / m;
          const double t = (j + (down ? 2.0 : 1.0) / 3.0) / m;
          out.push_back(a + s * (b - a) + t * (cc - a));
        }
      }
  }
  return out;
}

PositivityResult reflection_positivity(const Mesh& mesh, const Vector& u, const TriangleSpec& spec,
                                       double lambda, double vartheta, double vartheta1,
                                       int samples, double c) {
  const fem::Locator locator(mesh);
  return reflection_positivity(locator, u, spec, lambda, vartheta, vartheta1, samples, c);
}

namespace {

double interpolate_near(const fem::Locator& locator, const Vector& u, Point x) {
  if (locator.locate(x, 1e-10)) return locator.interpolate(u, x, 1e-10);
  return locator.interpolate(u, x, 1e-7);
}

}  // namespace

PositivityResult reflection_positivity(const fem::Locator& locator, const Vector& u,
                                       const TriangleSpec& spec, double lambda, double vartheta,
                                       double vartheta1, int samples, double c) {
  const Mesh& mesh = locator.mesh();
  const auto md = geometry::moving_domain(spec, lambda, vartheta, vartheta1);
  if (md.empty())
    throw Error(ErrorKind::EmptyDomain, "moving domain is empty at lambda = " + fmt(lambda) +
                                            ", vartheta = " + fmt(vartheta));
  const auto line = geometry::moving_line(spec, geometry::Family::Lower, lambda, vartheta);
  PositivityResult r;
  r.area = md.area();
  Worst worst(Sign::Positive);
  for (const Point& x : polygon_samples(md.polygon, samples)) {
    const double w = interpolate_near(locator, u, geometry::reflect_point(line, x)) -
                     interpolate_near(locator, u, x);
    worst.add(w, x);
  }
  constexpr int kLineSamples = 16;
  for (const auto& seg : md.segments) {
    if (seg.tag != geometry::BoundaryTag::Gamma0) continue;
    for (int k = 0; k <= kLineSamples; ++k) {
      const Point x = seg.a + (static_cast<double>(k) / kLineSamples) * (seg.b - seg.a);
      const double w = interpolate_near(locator, u, geometry::reflect_point(line, x)) -
                       interpolate_near(locator, u, x);
      r.max_abs_on_line = std::max(r.max_abs_on_line, std::abs(w));
    }
  }
  r.verdict = worst.verdict(c * mesh.h() * max_abs(u), 0.0);
  return r;
}

SymmetryReport symmetry_error(const Mesh& mesh, const Vector& u, double c) {
  const auto map = mesh::mirror_map(mesh);
  if (std::find(map.begin(), map.end(), -1) != map.end())
    throw Error(ErrorKind::AsymmetricMesh, "a vertex has no mirror image");
  std::set<std::array<int, 3>> cells;
  for (auto t : mesh.cells) {
    std::sort(t.begin(), t.end());
    cells.insert(t);
  }
  for (const auto& t : mesh.cells) {
    std::array<int, 3> m{map[t[0]], map[t[1]], map[t[2]]};
    std::sort(m.begin(), m.end());
    if (!cells.count(m)) throw Error(ErrorKind::AsymmetricMesh, "the mirror of a cell is not a cell");
  }
  SymmetryReport r;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    r.max_abs = std::max(r.max_abs, std::abs(u[v] - u[map[v]]));
  const double scale = max_abs(u);
  r.relative = scale > 0.0 ? r.max_abs / scale : r.max_abs;

  const double radius = exclusion_radius(mesh);
  const auto grads = fem::gradient_field(mesh, u);
  Worst worst(Sign::Negative);
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const Point x = mesh.barycenter(k);
    if (corner_distance(mesh, x) <= radius || std::abs(x.y) <= 1e-12) continue;
    worst.add((x.y > 0 ? 1.0 : -1.0) * grads[k].y, x);
  }
  r.axis_monotone = worst.verdict(c * mesh.h() * gradient_scale(mesh, grads, radius), radius);
  return r;
}

std::string_view to_string(MaxClass c) {
  switch (c) {
    case MaxClass::NeumannVertex: return "NeumannVertex";
    case MaxClass::LongerNeumannInterior: return "LongerNeumannInterior";
    case MaxClass::Other: return "Other";
  }
  return "?";
}

MaxClass max_class_from_string(std::string_view s) {
  for (auto c : {MaxClass::NeumannVertex, MaxClass::LongerNeumannInterior, MaxClass::Other})
    if (s == to_string(c)) return c;
  throw Error(ErrorKind::Usage, "unknown max class '" + std::string(s) + "'");
}

MaxClass predicted_max_class(const TriangleSpec& spec) {
  const auto cls = geometry::classify(spec);
  if (cls.neumann_vertex != geometry::VertexKind::Obtuse || cls.isosceles)
    return MaxClass::NeumannVertex;
  return MaxClass::LongerNeumannInterior;
}

MaxLocation locate_max(const Mesh& mesh, const Vector& u, const TriangleSpec& spec) {
  MaxLocation loc;
  Eigen::Index vmax = 0;
  loc.value = u.maxCoeff(&vmax);
  loc.vertex = static_cast<int>(vmax);
  loc.point = mesh.vertices[vmax];
  const double h = mesh.h();

  // Boundary side of the argmax, if any.
  std::optional<EdgeTag> side;
  std::vector<int> side_nb;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag == EdgeTag::Dirichlet) continue;
    for (int k = 0; k < 2; ++k)
      if (e.v[k] == loc.vertex) {
        side = e.tag;
        side_nb.push_back(e.v[1 - k]);
      }
  }
  const bool at_corner = corner_distance(mesh, loc.point) <= 1e-12;
  if (!at_corner && side && side_nb.size() == 2) {
    const auto [p0, p1] = side_endpoints(mesh, *side);
    const Point dir = (1.0 / geometry::distance(p0, p1)) * (p1 - p0);
    std::vector<double> s{geometry::dot(loc.point - p0, dir)}, v{loc.value};
    for (int nb : side_nb) {
      s.push_back(geometry::dot(mesh.vertices[nb] - p0, dir));
      v.push_back(u[nb]);
    }
    const auto q = fit_quadratic_1d(s, v);
    const auto [lo, hi] = std::minmax({s[1], s[2]});
    if (q.ok && q.c < 0.0) {
      const double sm = -q.b / (2.0 * q.c);
      if (sm >= lo && sm <= hi) {
        loc.point = p0 + sm * dir;
        loc.value = q.a + q.b * sm + q.c * sm * sm;
      }
    }
  } else if (!at_corner && !side) {
    const auto nbs = mesh::vertex_neighbors(mesh)[loc.vertex];
    std::vector<Point> pts{loc.point};
    std::vector<double> vals{loc.value};
    double reach = 0.0;
    for (int nb : nbs) {
      pts.push_back(mesh.vertices[nb]);
      vals.push_back(u[nb]);
      reach = std::max(reach, geometry::distance(mesh.vertices[nb], loc.point));
    }
    if (const auto k = fit_quadratic_2d(pts, vals, loc.point)) {
      Eigen::Matrix2d hess;
      hess << 2 * (*k)(3), (*k)(4), (*k)(4), 2 * (*k)(5);
      const Eigen::Vector2d g((*k)(1), (*k)(2));
      if (hess.determinant() > 0.0 && hess(0, 0) < 0.0) {
        const Eigen::Vector2d d = -hess.lu().solve(g);
        if (d.norm() <= reach) {
          loc.point = loc.point + Point{d(0), d(1)};
          loc.value = (*k)(0) + g.dot(d) + 0.5 * d.dot(hess * d);
        }
      }
    }
  }

  loc.distance_to_vertex = corner_distance(mesh, loc.point);
  const auto cls = geometry::classify(spec);
  const double d_lower = segment_distance(loc.point, spec.O, spec.A);
  const double d_upper = segment_distance(loc.point, spec.O, spec.B);
  Point far_end;
  switch (cls.longer_neumann_side) {
    case geometry::LongerSide::Lower:
      loc.distance_to_longer_side = d_lower;
      far_end = spec.A;
      break;
    case geometry::LongerSide::Upper:
      loc.distance_to_longer_side = d_upper;
      far_end = spec.B;
      break;
    case geometry::LongerSide::Equal:
      loc.distance_to_longer_side = std::min(d_lower, d_upper);
      far_end = d_lower <= d_upper ? spec.A : spec.B;
      break;
  }
  const double tol = kExclusionFactor * h;
  if (geometry::distance(loc.point, spec.O) <= tol) {
    loc.cls = MaxClass::NeumannVertex;
  } else if (loc.distance_to_longer_side <= tol && geometry::distance(loc.point, far_end) > tol) {
    loc.cls = MaxClass::LongerNeumannInterior;
  } else {
    loc.cls = MaxClass::Other;
  }
  return loc;
}

std::vector<CriticalCluster> critical_points(const Mesh& mesh, const Vector& u, double grad_tol) {
  const double h = mesh.h();
  const double radius = exclusion_radius(mesh);
  const auto grads = fem::gradient_field(mesh, u);
  const double gscale = gradient_scale(mesh, grads, radius);
  const std::size_t nc = mesh.num_cells();
  std::vector<bool> low(nc, false);
  for (std::size_t k = 0; k < nc; ++k)
    low[k] = corner_distance(mesh, mesh.barycenter(k)) > radius &&
             geometry::norm(grads[k]) <= grad_tol * gscale;

  // Cells sharing a vertex are connected.
  std::vector<std::vector<int>> vertex_cells(mesh.num_vertices());
  for (std::size_t k = 0; k < nc; ++k)
    if (low[k])
      for (int v : mesh.cells[k]) vertex_cells[v].push_back(static_cast<int>(k));

  std::map<std::pair<int, int>, EdgeTag> edge_tag;
  for (const auto& e : mesh.boundary_edges)
    edge_tag[{std::min(e.v[0], e.v[1]), std::max(e.v[0], e.v[1])}] = e.tag;

  const double umax = max_abs(u);
  double diam = 0.0;
  for (int i = 0; i < 3; ++i)
    diam = std::max(diam, geometry::distance(mesh.corners[i], mesh.corners[(i + 1) % 3]));
  const double curvature_floor = kNondegenerateConst * umax / (diam * diam);

  std::vector<CriticalCluster> out;
  std::vector<bool> seen(nc, false);
  for (std::size_t start = 0; start < nc; ++start) {
    if (!low[start] || seen[start]) continue;
    CriticalCluster cl;
    std::vector<int> stack{static_cast<int>(start)};
    seen[start] = true;
    while (!stack.empty()) {
      const int k = stack.back();
      stack.pop_back();
      cl.cells.push_back(k);
      for (int v : mesh.cells[k])
        for (int nb : vertex_cells[v])
          if (!seen[nb]) {
            seen[nb] = true;
            stack.push_back(nb);
          }
    }
    int argmin = cl.cells.front();
    for (int k : cl.cells)
      if (geometry::norm(grads[k]) < geometry::norm(grads[argmin])) argmin = k;
    const Point center = mesh.barycenter(argmin);
    // Minimum within one cell of a vertex ball: the set belongs to that corner.
    double cell_size = 0.0;
    for (int e = 0; e < 3; ++e)
      cell_size = std::max(cell_size, geometry::distance(mesh.vertices[mesh.cells[argmin][e]],
                                                         mesh.vertices[mesh.cells[argmin][(e + 1) % 3]]));
    if (corner_distance(mesh, center) <= radius + cell_size) continue;
    cl.location = center;
    cl.min_gradient = geometry::norm(grads[argmin]) / gscale;

    const double d_lower = segment_distance(center, mesh.corners[0], mesh.corners[1]);
    const double d_upper = segment_distance(center, mesh.corners[0], mesh.corners[2]);
    cl.on_boundary = std::min(d_lower, d_upper) <= h;
    if (cl.on_boundary) {
      cl.side = d_lower <= d_upper ? EdgeTag::NeumannLower : EdgeTag::NeumannUpper;
      const auto [p0, p1] = side_endpoints(mesh, cl.side);
      const Point dir = (1.0 / geometry::distance(p0, p1)) * (p1 - p0);
      const double s_center = geometry::dot(center - p0, dir);
      std::set<int> ids;
      for (const auto& e : mesh.boundary_edges)
        if (e.tag == cl.side) ids.insert(e.v.begin(), e.v.end());
      std::vector<double> s, vals;
      double window = 3.0 * h;
      for (int grow = 0; grow < 8 && s.size() < 5; ++grow, window *= 1.5) {
        s.clear();
        vals.clear();
        for (int v : ids) {
          const double sv = geometry::dot(mesh.vertices[v] - p0, dir);
          if (std::abs(sv - s_center) > window) continue;
          s.push_back(sv);
          vals.push_back(u[v]);
        }
      }
      const auto q = fit_quadratic_1d(s, vals);
      if (q.ok) {
        cl.second_derivative = 2.0 * q.c;
        cl.fit_point = q.c != 0.0 ? -q.b / (2.0 * q.c) : s_center;
        cl.nondegenerate = std::abs(cl.second_derivative) >= curvature_floor;
      }
    } else {
      std::vector<Point> pts;
      std::vector<double> vals;
      double window = 3.0 * h;
      for (int grow = 0; grow < 8 && pts.size() < 10; ++grow, window *= 1.5) {
        pts.clear();
        vals.clear();
        for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
          if (geometry::distance(mesh.vertices[v], center) <= window) {
            pts.push_back(mesh.vertices[v]);
            vals.push_back(u[v]);
          }
      }
      if (const auto k = fit_quadratic_2d(pts, vals, center)) {
        const double det = 4 * (*k)(3) * (*k)(5) - (*k)(4) * (*k)(4);
        cl.second_derivative = det;
        cl.nondegenerate = std::abs(det) >= curvature_floor * curvature_floor;
      }
    }
    out.push_back(std::move(cl));
  }
  return out;
}

namespace {

struct CornerSamples {
  std::vector<double> r, phi, u;
};

struct LinearFit {
  Eigen::Vector4d coef;
  double rms = std::numeric_limits<double>::infinity();
};

// Columns 1, -r^w cos(w phi), -r^2 / 2 and r^(2w) cos(2 w phi). The last one
// is the leading symmetric corner harmonic; without it c1 = 0 (isosceles)
// leaves omega undetermined.
LinearFit corner_linear_fit(const CornerSamples& s, double omega) {
  const auto m = static_cast<Eigen::Index>(s.r.size());
  Eigen::MatrixXd a(m, 4);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = -std::pow(s.r[i], omega) * std::cos(omega * s.phi[i]);
    a(i, 2) = -0.5 * s.r[i] * s.r[i];
    a(i, 3) = std::pow(s.r[i], 2 * omega) * std::cos(2 * omega * s.phi[i]);
    rhs(i) = s.u[i];
  }
  LinearFit f;
  f.coef = a.colPivHouseholderQr().solve(rhs);
  f.rms = std::sqrt((a * f.coef - rhs).squaredNorm() / static_cast<double>(m));
  return f;
}

}  // namespace

CornerFit corner_fit(const Mesh& mesh, const Vector& u, const TriangleSpec& spec, double r_window) {
  if (spec.gamma <= kPi / 2 + geometry::kRightAngleTol)
    throw Error(ErrorKind::ParamDomain,
                "corner fit needs an obtuse Neumann vertex, gamma = " + fmt(spec.gamma));
  const double h = mesh.h();
  CornerSamples s;
  const double phase = spec.alpha - kPi / 2;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const Point x = mesh.vertices[v];
    const double r = geometry::norm(x);
    if (r < h || r > r_window) continue;
    s.r.push_back(r);
    s.phi.push_back(std::atan2(x.y, x.x) - phase);
    s.u.push_back(u[v]);
  }
  if (static_cast<int>(s.r.size()) < kCornerFitMinSamples)
    throw Error(ErrorKind::IllConditioned, "corner window holds " + std::to_string(s.r.size()) +
                                               " samples, need " +
                                               std::to_string(kCornerFitMinSamples));
  constexpr double kLo = 1.01, kHi = 1.99;
  constexpr int kScan = 99;
  double best = kLo, best_rms = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kScan; ++i) {
    const double w = kLo + (kHi - kLo) * i / (kScan - 1);
    const double rms = corner_linear_fit(s, w).rms;
    if (rms < best_rms) {
      best_rms = rms;
      best = w;
    }
  }
  const double step = (kHi - kLo) / (kScan - 1);
  double a = std::max(kLo, best - step), b = std::min(kHi, best + step);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = corner_linear_fit(s, x1).rms, f2 = corner_linear_fit(s, x2).rms;
  while (b - a > 1e-10) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = corner_linear_fit(s, x1).rms;
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = corner_linear_fit(s, x2).rms;
    }
  }
  CornerFit out;
  out.omega = 0.5 * (a + b);
  const auto fit = corner_linear_fit(s, out.omega);
  out.c0 = fit.coef(0);
  out.c1 = fit.coef(1);
  out.c2 = fit.coef(2);
  out.c3 = fit.coef(3);
  const double scale = max_abs(u);
  out.residual = scale > 0.0 ? fit.rms / scale : fit.rms;
  out.samples = static_cast<int>(s.r.size());
  return out;
}

std::vector<double> angular_derivative(const std::vector<Point>& points,
                                       const std::vector<Point>& gradients, Point xbar) {
  if (points.size() != gradients.size())
    throw Error(ErrorKind::Usage, "points and gradients differ in length");
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    out[i] = (points[i].x - xbar.x) * gradients[i].y - (points[i].y - xbar.y) * gradients[i].x;
  return out;
}

std::vector<double> angular_derivative(const Mesh& mesh, const Vector& u, Point xbar) {
  std::vector<Point> pts(mesh.num_cells());
  for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = mesh.barycenter(k);
  return angular_derivative(pts, fem::gradient_field(mesh, u), xbar);
}

std::vector<Point> recovered_gradient(const Mesh& mesh, const Vector& u) {
  const auto grads = fem::gradient_field(mesh, u);
  std::vector<Point> out(mesh.num_vertices());
  std::vector<double> weight(mesh.num_vertices(), 0.0);
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const double a = mesh.cell_area(k);
    for (int v : mesh.cells[k]) {
      out[v] = out[v] + a * grads[k];
      weight[v] += a;
    }
  }
  for (std::size_t v = 0; v < out.size(); ++v)
    if (weight[v] > 0.0) out[v] = (1.0 / weight[v]) * out[v];
  // Boundary conditions: no normal part on Neumann sides, no tangential part
  // on the Dirichlet side, and a vanishing gradient at the corners.
  for (const auto& e : mesh.boundary_edges) {
    const auto [p0, p1] = side_endpoints(mesh, e.tag);
    const Point t = (1.0 / geometry::distance(p0, p1)) * (p1 - p0);
    for (int v : e.v) {
      const double along = geometry::dot(out[v], t);
      out[v] = e.tag == EdgeTag::Dirichlet ? out[v] - along * t : along * t;
    }
  }
  for (std::size_t v = 0; v < out.size(); ++v)
    if (corner_distance(mesh, mesh.vertices[v]) <= 1e-12) out[v] = Point{};
  return out;
}

CircleTrace angular_trace(const fem::Locator& locator, const Vector& u, Point xbar, double radius,
                          int samples) {
  const Mesh& mesh = locator.mesh();
  const auto grad = recovered_gradient(mesh, u);
  CircleTrace tr;
  // Runs of consecutive in-domain samples; start at an outside angle when one exists.
  std::vector<std::optional<double>> ring(samples);
  int first_out = -1;
  for (int k = 0; k < samples; ++k) {
    const double phi = 2.0 * kPi * k / samples;
    const Point x = xbar + radius * Point{std::cos(phi), std::sin(phi)};
    const auto hit = locator.locate(x, 1e-12);
    if (!hit) {
      if (first_out < 0) first_out = k;
      continue;
    }
    Point g;
    for (int i = 0; i < 3; ++i) g = g + hit->bary[i] * grad[mesh.cells[hit->cell][i]];
    ring[k] = (x.x - xbar.x) * g.y - (x.y - xbar.y) * g.x;
  }
  const int start = std::max(first_out, 0);
  double vmax = 0.0;
  for (const auto& v : ring)
    if (v) vmax = std::max(vmax, std::abs(*v));
  int last_sign = 0;
  for (int i = 0; i < samples; ++i) {
    const int k = (start + i) % samples;
    if (!ring[k]) {
      last_sign = 0;
      continue;
    }
    tr.angles.push_back(2.0 * kPi * k / samples);
    tr.values.push_back(*ring[k]);
    if (std::abs(*ring[k]) <= 1e-3 * vmax) continue;
    const int sg = *ring[k] > 0 ? 1 : -1;
    if (tr.sign == 0) tr.sign = sg;
    if (last_sign != 0 && sg != last_sign) ++tr.sign_changes;
    last_sign = sg;
  }
  tr.index = tr.sign_changes + 1;
  return tr;
}

QuotientReport difference_quotient_coeff(const Mesh& mesh, const Vector& u,
                                         const fem::Nonlinearity& nl, const TriangleSpec& spec,
                                         double lambda, double vartheta, double vartheta1,
                                         int samples) {
  const auto md = geometry::moving_domain(spec, lambda, vartheta, vartheta1);
  if (md.empty())
    throw Error(ErrorKind::EmptyDomain, "moving domain is empty at lambda = " + fmt(lambda) +
                                            ", vartheta = " + fmt(vartheta));
  const auto line = geometry::moving_line(spec, geometry::Family::Lower, lambda, vartheta);
  const fem::Locator locator(mesh);
  QuotientReport r;
  for (const Point& x : polygon_samples(md.polygon, samples)) {
    const double a = interpolate_near(locator, u, x);
    const double b = interpolate_near(locator, u, geometry::reflect_point(line, x));
    const double c = std::abs(b - a) < 1e-12 ? nl.fprime(a) : (nl.f(b) - nl.f(a)) / (b - a);
    r.values.push_back(c);
    r.sup = std::max(r.sup, std::abs(c));
  }
  r.samples = static_cast<int>(r.values.size());
  return r;
}

TangentialReport tangential_neumann(const Mesh& mesh, const Vector& u, const TriangleSpec& spec,
                                    double c) {
  const auto th = geometry::thresholds(spec);
  const double radius = exclusion_radius(mesh);
  const auto grads = fem::gradient_field(mesh, u);
  const double tol = c * mesh.h() * gradient_scale(mesh, grads, radius);

  std::map<std::pair<int, int>, EdgeTag> edge_tag;
  for (const auto& e : mesh.boundary_edges)
    edge_tag[{std::min(e.v[0], e.v[1]), std::max(e.v[0], e.v[1])}] = e.tag;

  auto run = [&](EdgeTag tag, double threshold, Point dir) {
    Worst worst(Sign::Negative);
    for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
      const auto& t = mesh.cells[k];
      for (int e = 0; e < 3; ++e) {
        const int v0 = t[e], v1 = t[(e + 1) % 3];
        const auto it = edge_tag.find({std::min(v0, v1), std::max(v0, v1)});
        if (it == edge_tag.end() || it->second != tag) continue;
        const Point mid = 0.5 * (mesh.vertices[v0] + mesh.vertices[v1]);
        if (geometry::norm(mid) < threshold || corner_distance(mesh, mid) <= radius) continue;
        worst.add(geometry::dot(grads[k], dir), mid);
      }
    }
    return worst.verdict(tol, radius);
  };
  TangentialReport r;
  if (th.phi1)
    r.lower = run(EdgeTag::NeumannLower, *th.phi1, {std::sin(spec.alpha), -std::cos(spec.alpha)});
  if (th.psi1)
    r.upper = run(EdgeTag::NeumannUpper, *th.psi1, {std::sin(spec.beta), std::cos(spec.beta)});
  return r;
}

namespace {

// Guaranteed verdicts for the principal eigenfunction, by name.
std::vector<std::pair<std::string, bool>> guaranteed(const QualReport& r) {
  std::vector<std::pair<std::string, bool>> g;
  const auto spec = geometry::make_triangle(r.alpha, r.beta);
  const auto cls = geometry::classify(spec);
  const bool obtuse = cls.neumann_vertex == geometry::VertexKind::Obtuse;
  g.push_back({"positivity", r.positivity.pass});
  if (!obtuse || cls.isosceles) g.push_back({"monotone_dirichlet_normal", r.monotone_dirichlet_normal.pass});
  if (obtuse) g.push_back({"monotone_middle_normal", r.monotone_middle_normal.pass});
  if (r.symmetry) {
    g.push_back({"symmetry.axis_monotone", r.symmetry->axis_monotone.pass});
    g.push_back({"symmetry.relative", r.symmetry->relative <= 1e-8});
  }
  g.push_back({"max_location.class", r.max_location.cls == predicted_max_class(spec)});
  if (obtuse && !cls.isosceles) {
    const auto& cps = r.critical_points;
    g.push_back({"critical_points", cps.size() == 1 && cps[0].on_boundary && cps[0].nondegenerate});
  }
  if (r.reflection_positivity) g.push_back({"reflection_positivity", r.reflection_positivity->pass});
  if (r.tangential_neumann.lower) g.push_back({"tangential_neumann.lower", r.tangential_neumann.lower->pass});
  if (r.tangential_neumann.upper) g.push_back({"tangential_neumann.upper", r.tangential_neumann.upper->pass});
  return g;
}

}  // namespace

bool QualReport::all_pass() const { return failures().empty(); }

std::vector<std::string> QualReport::failures() const {
  std::vector<std::string> out;
  for (const auto& [name, ok] : guaranteed(*this))
    if (!ok) out.push_back(name);
  return out;
}

QualReport qualify_all(const TriangleSpec& spec, const Mesh& mesh, const fem::EigenResult& eig,
                       const QualifyOptions& opts) {
  QualReport r;
  r.alpha = spec.alpha;
  r.beta = spec.beta;
  r.gamma = spec.gamma;
  r.n = mesh.n;
  r.h = mesh.h();
  r.mu = eig.mu;
  r.eigen_residual = eig.residual;
  r.positive = eig.positive();
  const Vector& u = eig.u;
  {
    Worst worst(Sign::Positive);
    const auto mask = mesh.dirichlet_mask();
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
      if (!mask[v]) worst.add(u[v], mesh.vertices[v]);
    r.positivity = worst.verdict(opts.c * r.h * max_abs(u), 0.0);
  }
  r.monotone_dirichlet_normal = directional_monotonicity(mesh, u, 0.0, -1.0, Sign::Negative, opts.c);
  r.middle_direction = middle_side_direction(spec);
  r.monotone_middle_normal =
      directional_monotonicity(mesh, u, r.middle_direction, -1.0, Sign::Negative, opts.c);
  if (geometry::classify(spec).isosceles) {
    try {
      r.symmetry = symmetry_error(mesh, u, opts.c);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::AsymmetricMesh) throw;
    }
  }
  r.max_location = locate_max(mesh, u, spec);
  r.critical_points = critical_points(mesh, u, opts.grad_tol);
  if (spec.gamma > kPi / 2) {
    const double window =
        opts.corner_window > 0.0 ? opts.corner_window : 0.2 * std::min(spec.phi0, spec.psi0);
    try {
      r.corner_fit = corner_fit(mesh, u, spec, window);
    } catch (const Error& e) {
      r.corner_fit_error = e.what();
    }
  }
  const auto th = geometry::thresholds(spec);
  if (opts.positivity_grid > 0 && th.phi2 && th.alpha_star) {
    const fem::Locator locator(mesh);
    std::optional<Verdict> worst;
    const int m = opts.positivity_grid;
    const double t_lo = kPi / 2 - spec.alpha, t_hi = *th.alpha_star;
    for (int i = 0; i < m; ++i) {
      const double vt = m == 1 ? t_hi : t_lo + (t_hi - t_lo) * i / (m - 1);
      if (vt <= 0.0 || vt >= kPi) continue;
      const double lmax = geometry::lambda_max(spec, vt);
      for (int j = 0; j < m; ++j) {
        const double lam = *th.phi2 + (lmax - *th.phi2) * j / m;
        try {
          const auto p = reflection_positivity(locator, u, spec, lam, vt,
                                               std::max(0.0, 2 * vt - kPi), 400, opts.c);
          if (!worst || p.verdict.worst_value < worst->worst_value) worst = p.verdict;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::EmptyDomain) throw;
        }
      }
    }
    r.reflection_positivity = worst;
  }
  r.tangential_neumann = tangential_neumann(mesh, u, spec, opts.c);
  return r;
}

namespace {

void put_verdict(std::ostringstream& os, const std::string& key, const Verdict& v) {
  os << key << ".pass = " << (v.pass ? "true" : "false") << '\n'
     << key << ".worst_value = " << fmt(v.worst_value) << '\n'
     << key << ".worst_location = " << fmt_point(v.worst_location) << '\n'
     << key << ".tolerance = " << fmt(v.tolerance) << '\n'
     << key << ".excluded_radius = " << fmt(v.excluded_radius) << '\n'
     << key << ".samples = " << v.samples << '\n';
}

}  // namespace

std::string to_text(const QualReport& r) {
  std::ostringstream os;
  os << "triangle.alpha_deg = " << fmt(geometry::rad2deg(r.alpha)) << '\n'
     << "triangle.beta_deg = " << fmt(geometry::rad2deg(r.beta)) << '\n'
     << "triangle.gamma_deg = " << fmt(geometry::rad2deg(r.gamma)) << '\n'
     << "mesh.n = " << r.n << '\n'
     << "mesh.h = " << fmt(r.h) << '\n'
     << "eigen.mu = " << fmt(r.mu) << '\n'
     << "eigen.residual = " << fmt(r.eigen_residual) << '\n'
     << "eigen.positive = " << (r.positive ? "true" : "false") << '\n';
  put_verdict(os, "positivity", r.positivity);
  put_verdict(os, "monotone_dirichlet_normal", r.monotone_dirichlet_normal);
  os << "monotone_middle_normal.theta = " << fmt(r.middle_direction) << '\n';
  put_verdict(os, "monotone_middle_normal", r.monotone_middle_normal);
  if (r.symmetry) {
    os << "symmetry.max_abs = " << fmt(r.symmetry->max_abs) << '\n'
       << "symmetry.relative = " << fmt(r.symmetry->relative) << '\n';
    put_verdict(os, "symmetry.axis_monotone", r.symmetry->axis_monotone);
  }
  os << "max_location.point = " << fmt_point(r.max_location.point) << '\n'
     << "max_location.value = " << fmt(r.max_location.value) << '\n'
     << "max_location.class = " << to_string(r.max_location.cls) << '\n'
     << "max_location.distance_to_vertex = " << fmt(r.max_location.distance_to_vertex) << '\n'
     << "critical_points.count = " << r.critical_points.size() << '\n';
  for (std::size_t i = 0; i < r.critical_points.size(); ++i) {
    const auto& c = r.critical_points[i];
    const std::string k = "critical_points." + std::to_string(i);
    os << k << ".location = " << fmt_point(c.location) << '\n'
       << k << ".cells = " << c.cells.size() << '\n'
       << k << ".on_boundary = " << (c.on_boundary ? mesh::to_string(c.side) : "interior") << '\n'
       << k << ".second_derivative = " << fmt(c.second_derivative) << '\n'
       << k << ".nondegenerate = " << (c.nondegenerate ? "true" : "false") << '\n';
  }
  if (r.corner_fit) {
    os << "corner_fit.c0 = " << fmt(r.corner_fit->c0) << '\n'
       << "corner_fit.c1 = " << fmt(r.corner_fit->c1) << '\n'
       << "corner_fit.c2 = " << fmt(r.corner_fit->c2) << '\n'
       << "corner_fit.omega = " << fmt(r.corner_fit->omega) << '\n'
       << "corner_fit.residual = " << fmt(r.corner_fit->residual) << '\n'
       << "corner_fit.samples = " << r.corner_fit->samples << '\n';
  } else if (!r.corner_fit_error.empty()) {
    os << "corner_fit.error = " << r.corner_fit_error << '\n';
  }
  if (r.reflection_positivity) put_verdict(os, "reflection_positivity", *r.reflection_positivity);
  if (r.tangential_neumann.lower) put_verdict(os, "tangential_neumann.lower", *r.tangential_neumann.lower);
  if (r.tangential_neumann.upper) put_verdict(os, "tangential_neumann.upper", *r.tangential_neumann.upper);
  const auto f = r.failures();
  os << "summary.all_pass = " << (f.empty() ? "true" : "false") << '\n';
  for (const auto& name : f) os << "summary.failed = " << name << '\n';
  return os.str();
}

std::string csv_header() {
  return "alpha_deg,beta_deg,gamma_deg,n,h,mu,positive,dirichlet_pass,dirichlet_worst,"
         "middle_pass,middle_worst,symmetry_rel,max_class,max_x,max_y,critical_count,omega_fit,"
         "positivity_worst,all_pass";
}

std::string to_csv_row(const QualReport& r) {
  auto b = [](bool v) { return std::string(v ? "1" : "0"); };
  std::ostringstream os;
  os << fmt(geometry::rad2deg(r.alpha)) << ',' << fmt(geometry::rad2deg(r.beta)) << ','
     << fmt(geometry::rad2deg(r.gamma)) << ',' << r.n << ',' << fmt(r.h) << ',' << fmt(r.mu) << ','
     << b(r.positive) << ',' << b(r.monotone_dirichlet_normal.pass) << ','
     << fmt(r.monotone_dirichlet_normal.worst_value) << ',' << b(r.monotone_middle_normal.pass) << ','
     << fmt(r.monotone_middle_normal.worst_value) << ','
     << (r.symmetry ? fmt(r.symmetry->relative) : "") << ',' << to_string(r.max_location.cls) << ','
     << fmt(r.max_location.point.x) << ',' << fmt(r.max_location.point.y) << ','
     << r.critical_points.size() << ',' << (r.corner_fit ? fmt(r.corner_fit->omega) : "") << ','
     << (r.reflection_positivity ? fmt(r.reflection_positivity->worst_value) : "") << ','
     << b(r.all_pass());
  return os.str();
}

}  // namespace mixedtri::qualify
