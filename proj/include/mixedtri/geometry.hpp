#pragma once

// Triangle family with one Dirichlet side on {x1 = 1} and two Neumann sides
// meeting at the origin, plus the moving-line apparatus used to compare a
// solution with its reflections.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mixedtri::geometry {

inline constexpr double kPi = std::numbers::pi;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Unit vector e_theta = (cos theta, sin theta).
struct DirectionVector {
  double theta = 0.0;
  Point components{1.0, 0.0};

  static DirectionVector from_angle(double theta) {
    return {theta, {std::cos(theta), std::sin(theta)}};
  }
};

/// Triangle OAB with O at the origin, the Dirichlet side AB on x1 = 1, A below
/// the axis and B above. alpha is the angle at A, beta at B, gamma at O.
struct TriangleSpec {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  Point O;
  Point A;
  Point B;
  double phi0 = 0.0;  // |OA| = csc alpha
  double psi0 = 0.0;  // |OB| = csc beta
  double dirichlet_len = 0.0;

  double area() const { return 0.5 * dirichlet_len; }
  std::array<Point, 3> corners() const { return {O, A, B}; }
};

/// Throws Error(AngleDomain) unless alpha, beta > 0 and alpha + beta < pi.
TriangleSpec make_triangle(double alpha, double beta);

/// Triangle with vertices (0,0), (1,a), (1,b), a < b. Throws AngleDomain otherwise.
TriangleSpec triangle_from_ordinates(double a, double b);

enum class VertexKind { Acute, Right, Obtuse };
enum class SideId { Dirichlet, NeumannLower, NeumannUpper };
enum class LongerSide { Lower, Upper, Equal };

std::string_view to_string(VertexKind kind);
std::string_view to_string(SideId side);
std::string_view to_string(LongerSide side);

struct Classification {
  VertexKind neumann_vertex = VertexKind::Acute;
  bool isosceles = false;
  LongerSide longer_neumann_side = LongerSide::Equal;
  SideId middle_side = SideId::Dirichlet;
};

inline constexpr double kIsoscelesTol = 1e-12;
inline constexpr double kRightAngleTol = 1e-12;

Classification classify(const TriangleSpec& spec);

/// max{alpha, beta} >= min{pi/4, 2 alpha + 2 beta - pi/2}.
bool condition_13(double alpha, double beta);

/// Oriented line {x : (x - base) . normal = 0}, |normal| = 1.
struct Line {
  Point base;
  Point normal;

  double signed_distance(Point x) const { return dot(x - base, normal); }
  Point direction() const { return {-normal.y, normal.x}; }
  Point reflect(Point x) const { return x - 2.0 * signed_distance(x) * normal; }
};

/// Returns nullopt for (numerically) parallel lines.
std::optional<Point> intersect(const Line& l1, const Line& l2);

enum class Family { Lower, Upper };

/// T_{lambda, vartheta} (Lower, through P_lambda on the lower Neumann carrier)
/// or its upper counterpart through Q_lambda. The stored normal points away
/// from the cap: the cap is {x : (x - base) . normal < 0}.
struct MovingLine {
  Family family = Family::Lower;
  double lambda = 0.0;
  double vartheta = 0.0;
  Point base;
  DirectionVector normal;

  Line line() const { return {base, normal.components}; }
};

/// P_lambda = lambda (sin alpha, -cos alpha).
Point lower_base(const TriangleSpec& spec, double lambda);
/// Q_lambda = lambda (sin beta, cos beta).
Point upper_base(const TriangleSpec& spec, double lambda);

/// Throws AngleDomain unless lambda >= 0 and vartheta in [0, pi].
MovingLine moving_line(const TriangleSpec& spec, Family family, double lambda, double vartheta);

/// Same line without the parameter-range check (used for derived parameters
/// such as the reflected-boundary lines, whose angles can leave [0, pi]).
MovingLine moving_line_unchecked(const TriangleSpec& spec, Family family, double lambda,
                                 double vartheta);

Point reflect_point(const MovingLine& line, Point x);

/// Smallest lambda beyond which the lower-family line at vartheta misses the
/// closed triangle (vartheta in (0, pi)).
double lambda_max(const TriangleSpec& spec, double vartheta);

enum class BoundaryTag { Gamma0, Gamma1, Gamma2A, Gamma2B };
std::string_view to_string(BoundaryTag tag);

struct TaggedSegment {
  Point a;
  Point b;
  BoundaryTag tag = BoundaryTag::Gamma0;
};

inline constexpr double kEmptyArea = 1e-14;
inline constexpr double kVertexMergeTol = 1e-12;
inline constexpr double kTagTol = 1e-10;

/// D_{lambda, vartheta, vartheta1}: the part of the cap cut by T_{lambda,
/// vartheta} whose reflection stays in the triangle, further restricted to the
/// positive side of T_{lambda, vartheta1}.
struct MovingDomain {
  std::vector<Point> polygon;  // counterclockwise, empty if degenerate
  std::vector<TaggedSegment> segments;
  double lambda = 0.0;
  double vartheta = 0.0;
  double vartheta1 = 0.0;
  bool gamma1_equality = false;  // vartheta == pi/2 - alpha: w vanishes on Gamma1

  bool empty() const { return polygon.empty(); }
  double area() const;
  double perimeter() const;
  double tagged_length(BoundaryTag tag) const;
};

/// Throws ParamDomain unless lambda >= 0 and 0 <= vartheta1 < vartheta <= pi.
MovingDomain moving_domain(const TriangleSpec& spec, double lambda, double vartheta,
                           double vartheta1);

/// D_{lambda, vartheta} = D_{lambda, vartheta, max(0, 2 vartheta - pi)}.
MovingDomain moving_domain(const TriangleSpec& spec, double lambda, double vartheta);

/// Parameters of the reflection of the upper Neumann carrier across
/// T_{lambda, vartheta}, in both the upper (hat) and lower (check) families.
/// A length is absent when its denominator vanishes.
struct HatCheck {
  std::optional<double> lambda_hat;
  double vartheta_hat = 0.0;
  std::optional<double> lambda_check;
  double vartheta_check = 0.0;
};

/// Throws Singular (naming the vanishing denominator) only when both
/// sin(vartheta - gamma) and sin(2 vartheta - gamma) vanish; use hat_lambda or
/// check_lambda to demand one of them.
HatCheck hat_check_map(const TriangleSpec& spec, double lambda, double vartheta);
/// lambda sin(vartheta) / sin(vartheta - gamma). Throws Singular.
double hat_lambda(const TriangleSpec& spec, double lambda, double vartheta);
/// lambda + lambda sin(gamma) / sin(2 vartheta - gamma). Throws Singular.
double check_lambda(const TriangleSpec& spec, double lambda, double vartheta);

struct Thresholds {
  std::optional<double> phi1;
  std::optional<double> psi1;
  std::optional<double> phi2;
  std::optional<double> psi2;
  std::optional<double> alpha_star;
  std::optional<double> beta_star;
};

/// Piecewise angle used by the lower-side threshold: pi/2 on [pi/4, pi/2),
/// 3pi/4 on [pi/8, pi/4), pi - 2 angle below pi/8. nullopt outside (0, pi/2).
std::optional<double> star_angle(double angle);

Thresholds thresholds(const TriangleSpec& spec);

/// The lambda at which T_{lambda, vartheta}, T_{phi, pi/2} and {x1 = 1} are
/// concurrent. Throws Singular for vartheta outside (pi/2, pi).
double upsilon(const TriangleSpec& spec, double phi, double vartheta);

/// Width below which the comparison principle holds for |c| < c0:
/// pi / (2 sqrt(c0)). Throws NonPositive for c0 <= 0.
double narrow_width(double c0);

// Convex polygon utilities.
double polygon_area(std::span<const Point> poly);
/// Keeps the part of a convex polygon with line.signed_distance(x) <= 0
/// (or >= 0 if keep_positive).
std::vector<Point> clip_half_plane(std::span<const Point> poly, const Line& line,
                                   bool keep_positive);
std::vector<Point> convex_hull(std::vector<Point> pts);
bool point_in_triangle(const TriangleSpec& spec, Point x, double tol = 1e-12);

}  // namespace mixedtri::geometry
