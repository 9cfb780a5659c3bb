#include "mixedtri/geometry.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "mixedtri/error.hpp"

namespace mixedtri::geometry {

namespace {

std::string describe(double a, double b) {
  std::ostringstream os;
  os.precision(17);
  os << "alpha=" << a << " beta=" << b;
  return os.str();
}

// Drops consecutive duplicates (within kVertexMergeTol) of a closed polygon.
std::vector<Point> merge_vertices(std::vector<Point> poly) {
  std::vector<Point> out;
  out.reserve(poly.size());
  for (const Point& p : poly) {
    if (out.empty() || distance(out.back(), p) > kVertexMergeTol) out.push_back(p);
  }
  while (out.size() > 1 && distance(out.front(), out.back()) <= kVertexMergeTol) out.pop_back();
  return out;
}

// Drops vertices lying on the segment between their neighbours (clipping by a
// line that carries an existing edge leaves such points behind).
std::vector<Point> drop_collinear(std::vector<Point> poly) {
  bool changed = true;
  while (changed && poly.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point a = poly[(i + poly.size() - 1) % poly.size()];
      const Point b = poly[i];
      const Point c = poly[(i + 1) % poly.size()];
      if (std::abs(cross(b - a, c - b)) <= kVertexMergeTol * norm(b - a) * norm(c - b) &&
          dot(b - a, c - b) > 0.0) {
        poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return poly;
}

std::vector<Point> make_ccw(std::vector<Point> poly) {
  if (polygon_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

// Half-planes bounding a ccw convex polygon: the interior is where the
// returned line has negative signed distance.
std::vector<Line> outward_edges(std::span<const Point> ccw) {
  std::vector<Line> lines;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    Point a = ccw[i];
    Point b = ccw[(i + 1) % ccw.size()];
    Point d = b - a;
    double len = norm(d);
    lines.push_back({a, {d.y / len, -d.x / len}});
  }
  return lines;
}

}  // namespace

TriangleSpec make_triangle(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(alpha + beta < kPi) || !std::isfinite(alpha) ||
      !std::isfinite(beta)) {
    throw Error(ErrorKind::AngleDomain, "need alpha, beta > 0 and alpha + beta < pi (" +
                                            describe(alpha, beta) + ")");
  }
  TriangleSpec s;
  s.alpha = alpha;
  s.beta = beta;
  s.gamma = kPi - alpha - beta;
  const double cot_a = std::cos(alpha) / std::sin(alpha);
  const double cot_b = std::cos(beta) / std::sin(beta);
  s.O = {0.0, 0.0};
  s.A = {1.0, -cot_a};
  s.B = {1.0, cot_b};
  s.phi0 = 1.0 / std::sin(alpha);
  s.psi0 = 1.0 / std::sin(beta);
  s.dirichlet_len = cot_a + cot_b;
  if (!(s.gamma > 0.0) || !(s.dirichlet_len > 0.0)) {
    throw Error(ErrorKind::AngleDomain, "degenerate triangle (" + describe(alpha, beta) + ")");
  }
  return s;
}

TriangleSpec triangle_from_ordinates(double a, double b) {
  if (!(a < b)) throw Error(ErrorKind::AngleDomain, "need a < b for vertices (1,a), (1,b)");
  return make_triangle(std::atan2(1.0, -a), std::atan2(1.0, b));
}

std::string_view to_string(VertexKind kind) {
  switch (kind) {
    case VertexKind::Acute: return "acute";
    case VertexKind::Right: return "right";
    case VertexKind::Obtuse: return "obtuse";
  }
  return "?";
}

std::string_view to_string(SideId side) {
  switch (side) {
    case SideId::Dirichlet: return "Dirichlet";
    case SideId::NeumannLower: return "NeumannLower";
    case SideId::NeumannUpper: return "NeumannUpper";
  }
  return "?";
}

std::string_view to_string(LongerSide side) {
  switch (side) {
    case LongerSide::Lower: return "Lower";
    case LongerSide::Upper: return "Upper";
    case LongerSide::Equal: return "Equal";
  }
  return "?";
}

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Gamma0: return "Gamma0";
    case BoundaryTag::Gamma1: return "Gamma1";
    case BoundaryTag::Gamma2A: return "Gamma2A";
    case BoundaryTag::Gamma2B: return "Gamma2B";
  }
  return "?";
}

Classification classify(const TriangleSpec& spec) {
  Classification c;
  const double d = spec.gamma - kPi / 2;
  c.neumann_vertex = std::abs(d) <= kRightAngleTol ? VertexKind::Right
                     : d < 0.0                     ? VertexKind::Acute
                                                   : VertexKind::Obtuse;
  c.isosceles = std::abs(spec.alpha - spec.beta) <= kIsoscelesTol;
  if (c.isosceles) {
    c.longer_neumann_side = LongerSide::Equal;
  } else {
    c.longer_neumann_side = spec.phi0 > spec.psi0 ? LongerSide::Lower : LongerSide::Upper;
  }
  // Ties keep the order Dirichlet, lower, upper.
  std::array<std::pair<double, SideId>, 3> sides{{{spec.dirichlet_len, SideId::Dirichlet},
                                                  {spec.phi0, SideId::NeumannLower},
                                                  {spec.psi0, SideId::NeumannUpper}}};
  std::stable_sort(sides.begin(), sides.end(),
                   [](const auto& l, const auto& r) { return l.first < r.first; });
  c.middle_side = sides[1].second;
  return c;
}

bool condition_13(double alpha, double beta) {
  return std::max(alpha, beta) >= std::min(kPi / 4, 2 * alpha + 2 * beta - kPi / 2);
}

std::optional<Point> intersect(const Line& l1, const Line& l2) {
  const double det = cross(l1.normal, l2.normal);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double c1 = dot(l1.base, l1.normal);
  const double c2 = dot(l2.base, l2.normal);
  return Point{(c1 * l2.normal.y - c2 * l1.normal.y) / det,
               (l1.normal.x * c2 - l2.normal.x * c1) / det};
}

Point lower_base(const TriangleSpec& spec, double lambda) {
  return {lambda * std::sin(spec.alpha), -lambda * std::cos(spec.alpha)};
}

Point upper_base(const TriangleSpec& spec, double lambda) {
  return {lambda * std::sin(spec.beta), lambda * std::cos(spec.beta)};
}

MovingLine moving_line_unchecked(const TriangleSpec& spec, Family family, double lambda,
                                 double vartheta) {
  MovingLine m;
  m.family = family;
  m.lambda = lambda;
  m.vartheta = vartheta;
  if (family == Family::Lower) {
    m.base = lower_base(spec, lambda);
    m.normal = DirectionVector::from_angle(vartheta + spec.alpha);
  } else {
    m.base = upper_base(spec, lambda);
    m.normal = DirectionVector::from_angle(-vartheta - spec.beta);
  }
  return m;
}

MovingLine moving_line(const TriangleSpec& spec, Family family, double lambda, double vartheta) {
  if (!(lambda >= 0.0) || !(vartheta >= 0.0) || !(vartheta <= kPi)) {
    throw Error(ErrorKind::AngleDomain, "moving line needs lambda >= 0 and vartheta in [0, pi]");
  }
  return moving_line_unchecked(spec, family, lambda, vartheta);
}

Point reflect_point(const MovingLine& line, Point x) { return line.line().reflect(x); }

double lambda_max(const TriangleSpec& spec, double vartheta) {
  const Point e = DirectionVector::from_angle(vartheta + spec.alpha).components;
  double lo = std::numeric_limits<double>::infinity();
  for (Point v : spec.corners()) lo = std::min(lo, dot(v, e));
  return -lo / std::sin(vartheta);
}

double MovingDomain::area() const { return polygon_area(polygon); }

double MovingDomain::perimeter() const {
  double p = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i)
    p += distance(polygon[i], polygon[(i + 1) % polygon.size()]);
  return p;
}

double MovingDomain::tagged_length(BoundaryTag tag) const {
  double p = 0.0;
  for (const auto& s : segments)
    if (s.tag == tag) p += distance(s.a, s.b);
  return p;
}

MovingDomain moving_domain(const TriangleSpec& spec, double lambda, double vartheta,
                           double vartheta1) {
  if (!(lambda >= 0.0) || !(vartheta1 >= 0.0) || !(vartheta1 < vartheta) || !(vartheta <= kPi)) {
    throw Error(ErrorKind::ParamDomain,
                "moving domain needs lambda >= 0 and 0 <= vartheta1 < vartheta <= pi");
  }
  MovingDomain d;
  d.lambda = lambda;
  d.vartheta = vartheta;
  d.vartheta1 = vartheta1;
  d.gamma1_equality = std::abs(vartheta - (kPi / 2 - spec.alpha)) <= 1e-12;

  const Line cut = moving_line_unchecked(spec, Family::Lower, lambda, vartheta).line();
  const Line side = moving_line_unchecked(spec, Family::Lower, lambda, vartheta1).line();

  std::vector<Point> poly = make_ccw({spec.O, spec.A, spec.B});
  std::vector<Point> mirrored;
  for (Point p : poly) mirrored.push_back(cut.reflect(p));
  mirrored = make_ccw(std::move(mirrored));

  poly = clip_half_plane(poly, cut, false);
  poly = clip_half_plane(poly, side, true);
  for (const Line& l : outward_edges(mirrored)) poly = clip_half_plane(poly, l, false);
  poly = drop_collinear(merge_vertices(std::move(poly)));
  if (poly.size() < 3 || polygon_area(poly) < kEmptyArea) return d;
  d.polygon = make_ccw(std::move(poly));

  // Carrier lines used for tagging; a point belongs to a primed set when its
  // reflection across the cut lies on the original carrier.
  const Line dirichlet{{1.0, 0.0}, {1.0, 0.0}};
  const Line lower{spec.O, DirectionVector::from_angle(spec.alpha).components};
  const Line upper{spec.O, DirectionVector::from_angle(kPi - spec.beta).components};
  auto on = [&](const Line& l, Point m) {
    return std::abs(l.signed_distance(m)) <= kTagTol ||
           std::abs(l.signed_distance(cut.reflect(m))) <= kTagTol;
  };
  for (std::size_t i = 0; i < d.polygon.size(); ++i) {
    Point a = d.polygon[i];
    Point b = d.polygon[(i + 1) % d.polygon.size()];
    Point m = 0.5 * (a + b);
    BoundaryTag tag;
    if (std::abs(cut.signed_distance(m)) <= kTagTol) {
      tag = BoundaryTag::Gamma0;
    } else if (on(dirichlet, m)) {
      tag = BoundaryTag::Gamma1;
    } else if (on(lower, m) || std::abs(side.signed_distance(m)) <= kTagTol) {
      tag = BoundaryTag::Gamma2A;
    } else if (on(upper, m)) {
      tag = BoundaryTag::Gamma2B;
    } else {
      // Every edge of the clipped polygon lies on one of the carriers above;
      // fall back to the nearest in case of round-off beyond the tag tolerance.
      const std::array<std::pair<double, BoundaryTag>, 4> cand{{
          {std::abs(cut.signed_distance(m)), BoundaryTag::Gamma0},
          {std::min(std::abs(dirichlet.signed_distance(m)),
                    std::abs(dirichlet.signed_distance(cut.reflect(m)))),
           BoundaryTag::Gamma1},
          {std::min({std::abs(lower.signed_distance(m)),
                     std::abs(lower.signed_distance(cut.reflect(m))),
                     std::abs(side.signed_distance(m))}),
           BoundaryTag::Gamma2A},
          {std::min(std::abs(upper.signed_distance(m)),
                    std::abs(upper.signed_distance(cut.reflect(m)))),
           BoundaryTag::Gamma2B},
      }};
      tag = std::min_element(cand.begin(), cand.end(),
                             [](const auto& l, const auto& r) { return l.first < r.first; })
                ->second;
    }
    d.segments.push_back({a, b, tag});
  }
  return d;
}

MovingDomain moving_domain(const TriangleSpec& spec, double lambda, double vartheta) {
  return moving_domain(spec, lambda, vartheta, std::max(0.0, 2 * vartheta - kPi));
}

namespace {
constexpr double kSingularSin = 1e-14;
}

double hat_lambda(const TriangleSpec& spec, double lambda, double vartheta) {
  const double s = std::sin(vartheta - spec.gamma);
  if (std::abs(s) < kSingularSin) throw Error(ErrorKind::Singular, "sin(vartheta - gamma) = 0");
  return lambda * std::sin(vartheta) / s;
}

double check_lambda(const TriangleSpec& spec, double lambda, double vartheta) {
  const double s = std::sin(2 * vartheta - spec.gamma);
  if (std::abs(s) < kSingularSin) throw Error(ErrorKind::Singular, "sin(2 vartheta - gamma) = 0");
  return lambda + lambda * std::sin(spec.gamma) / s;
}

HatCheck hat_check_map(const TriangleSpec& spec, double lambda, double vartheta) {
  const double g = spec.gamma;
  const bool hat_ok = std::abs(std::sin(vartheta - g)) >= kSingularSin;
  const bool check_ok = std::abs(std::sin(2 * vartheta - g)) >= kSingularSin;
  if (!hat_ok && !check_ok)
    throw Error(ErrorKind::Singular, "sin(vartheta - gamma) = 0 and sin(2 vartheta - gamma) = 0");
  HatCheck h;
  if (hat_ok) h.lambda_hat = hat_lambda(spec, lambda, vartheta);
  h.vartheta_hat = kPi - 2 * vartheta + 2 * g;
  if (check_ok) h.lambda_check = check_lambda(spec, lambda, vartheta);
  h.vartheta_check = 2 * vartheta - g;
  return h;
}

std::optional<double> star_angle(double angle) {
  if (!(angle > 0.0) || !(angle < kPi / 2)) return std::nullopt;
  if (angle >= kPi / 4) return kPi / 2;
  if (angle >= kPi / 8) return 3 * kPi / 4;
  return kPi - 2 * angle;
}

Thresholds thresholds(const TriangleSpec& spec) {
  Thresholds t;
  const double g = spec.gamma;
  if (auto as = star_angle(spec.alpha)) {
    t.alpha_star = *as;
    t.phi1 = std::max(0.5 * spec.phi0, spec.psi0 * std::cos(g));
    t.phi2 = std::max(std::sin(*as - g) / std::sin(*as) * spec.psi0,
                      spec.phi0 / (1.0 + std::sin(g)));
  }
  if (auto bs = star_angle(spec.beta)) {
    t.beta_star = *bs;
    t.psi1 = std::max(0.5 * spec.psi0, spec.phi0 * std::cos(g));
    t.psi2 = std::max(std::sin(*bs - g) / std::sin(*bs) * spec.phi0,
                      spec.psi0 / (1.0 + std::sin(g)));
  }
  return t;
}

double upsilon(const TriangleSpec& spec, double phi, double vartheta) {
  if (!(vartheta > kPi / 2) || !(vartheta < kPi)) {
    throw Error(ErrorKind::Singular, "upsilon needs vartheta in (pi/2, pi)");
  }
  const double cot = 1.0 / std::tan(kPi - vartheta);
  return phi + (spec.phi0 - phi) * std::tan(spec.alpha) * cot;
}

double narrow_width(double c0) {
  if (!(c0 > 0.0)) throw Error(ErrorKind::NonPositive, "narrow width needs c0 > 0");
  return kPi / (2.0 * std::sqrt(c0));
}

double polygon_area(std::span<const Point> poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * a;
}

std::vector<Point> clip_half_plane(std::span<const Point> poly, const Line& line,
                                   bool keep_positive) {
  std::vector<Point> out;
  const double sign = keep_positive ? -1.0 : 1.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    Point p = poly[i];
    Point q = poly[(i + 1) % n];
    double dp = sign * line.signed_distance(p);
    double dq = sign * line.signed_distance(q);
    if (dp <= 0.0) out.push_back(p);
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
      double t = dp / (dp - dq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(),
            [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

bool point_in_triangle(const TriangleSpec& spec, Point x, double tol) {
  if (x.x > 1.0 + tol) return false;
  const Line lower{spec.O, DirectionVector::from_angle(spec.alpha + kPi).components};
  const Line upper{spec.O, DirectionVector::from_angle(-spec.beta + kPi).components};
  // Inward normals of the Neumann sides are e_alpha and e_{-beta}.
  return lower.signed_distance(x) <= tol && upper.signed_distance(x) <= tol;
}

}  // namespace mixedtri::geometry
