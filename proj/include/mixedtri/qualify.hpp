#pragma once

// Discrete verdicts for the qualitative statements about the principal
// eigenfunction (and positive solutions): monotonicity, symmetry, location of
// the maximum, critical points, corner behaviour and moving-plane positivity.
//
// Strict inequalities are checked on vertex-excluded sets (radius 2h by
// default) and pass when the worst value clears zero up to C h times the
// relevant field scale.

#include <optional>
#include <string>
#include <vector>

#include "mixedtri/fem.hpp"

namespace mixedtri::qualify {

using geometry::Point;
using fem::Vector;

/// Tolerance constant of the O(h) model. Measured on the closed-form right
/// isosceles case (see the calibration test) and frozen.
inline constexpr double kToleranceC = 0.3;
inline constexpr double kExclusionFactor = 2.0;

enum class Sign { Negative, Positive };

struct Verdict {
  bool pass = false;
  double worst_value = 0.0;  // least favourable value over the tested set
  Point worst_location;
  double tolerance = 0.0;  // pass iff worst_value < tol (Negative) or > -tol (Positive)
  double excluded_radius = 0.0;
  Sign expected = Sign::Negative;
  int samples = 0;
};

/// Radius excluded around the three corners: kExclusionFactor * h.
double exclusion_radius(const mesh::Mesh& mesh);

/// grad u . e_theta at barycenters farther than exclusion from every corner;
/// a negative radius means the default. Tolerance is C h max|grad u|.
Verdict directional_monotonicity(const mesh::Mesh& mesh, const Vector& u, double theta,
                                 double exclusion = -1.0, Sign expected = Sign::Negative,
                                 double c = kToleranceC);

/// Angle of the direction tested for the middle side: e_{-beta} (inward
/// normal) when the upper Neumann side is the middle one, e_alpha for the
/// lower, and e_0 when the middle side is the Dirichlet side or the triangle
/// is isosceles (the two Neumann sides tie).
double middle_side_direction(const geometry::TriangleSpec& spec);

Verdict normal_monotonicity_middle_side(const mesh::Mesh& mesh, const Vector& u,
                                        const geometry::TriangleSpec& spec, double c = kToleranceC);

struct PositivityResult {
  Verdict verdict;           // worst w over interior samples, expected Positive
  double max_abs_on_line = 0.0;  // |w| at samples placed on T_{lambda, vartheta}
  double area = 0.0;
};

/// w(x) = u(x reflected across T_{lambda, vartheta}) - u(x) sampled on a
/// quasi-uniform interior point set of D_{lambda, vartheta, vartheta1}.
/// Tolerance is C h max|u|. Throws EmptyDomain.
PositivityResult reflection_positivity(const mesh::Mesh& mesh, const Vector& u,
                                       const geometry::TriangleSpec& spec, double lambda,
                                       double vartheta, double vartheta1, int samples = 400,
                                       double c = kToleranceC);
PositivityResult reflection_positivity(const fem::Locator& locator, const Vector& u,
                                       const geometry::TriangleSpec& spec, double lambda,
                                       double vartheta, double vartheta1, int samples = 400,
                                       double c = kToleranceC);

struct SymmetryReport {
  double max_abs = 0.0;   // max over vertices of |u(x1, x2) - u(x1, -x2)|
  double relative = 0.0;  // max_abs / max|u|
  Verdict axis_monotone;  // sign(x2) d_{x2} u < 0 off the axis (same sign as x2 d_{x2} u)
};

/// Throws AsymmetricMesh unless x2 -> -x2 maps the mesh onto itself.
SymmetryReport symmetry_error(const mesh::Mesh& mesh, const Vector& u, double c = kToleranceC);

enum class MaxClass { NeumannVertex, LongerNeumannInterior, Other };
std::string_view to_string(MaxClass c);
MaxClass max_class_from_string(std::string_view s);

struct MaxLocation {
  Point point;
  double value = 0.0;
  MaxClass cls = MaxClass::Other;
  int vertex = -1;                  // argmax vertex before refinement
  double distance_to_vertex = 0.0;  // to the nearest corner
  double distance_to_longer_side = 0.0;
};

/// Argmax over vertices refined by a quadratic fit (3-point parabola along a
/// boundary side, 2D least squares on interior patches; corners are kept),
/// classified with tolerance 2h.
MaxLocation locate_max(const mesh::Mesh& mesh, const Vector& u, const geometry::TriangleSpec& spec);

struct CriticalCluster {
  std::vector<int> cells;
  Point location;  // barycenter of the cell with the smallest gradient
  double min_gradient = 0.0;  // relative to max|grad u|
  bool on_boundary = false;   // location within h of a Neumann side
  mesh::EdgeTag side = mesh::EdgeTag::Dirichlet;  // when on_boundary
  // Boundary clusters: u'' of the quadratic fitted along the side. Interior
  // clusters: determinant of the fitted Hessian.
  double second_derivative = 0.0;
  double fit_point = 0.0;  // arclength of the fitted stationary point
  bool nondegenerate = false;
};

inline constexpr double kDefaultGradTol = 0.05;
inline constexpr double kNondegenerateConst = 1e-3;

/// Connected components (sharing a vertex) of cells with |grad u| <=
/// grad_tol max|grad u| whose barycenter lies outside the 2h corner balls.
/// A component whose smallest gradient sits within one cell of a ball is the
/// corner itself and is dropped. Boundary clusters get a quadratic fit of u
/// along the side (window 3h) and are non-degenerate when |u''| >= 1e-3
/// max|u| / diam^2; interior clusters compare the Hessian determinant with the
/// square of that bound.
std::vector<CriticalCluster> critical_points(const mesh::Mesh& mesh, const Vector& u,
                                             double grad_tol = kDefaultGradTol);

struct CornerFit {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;  // r^(2 omega) cos(2 omega phi) coefficient
  double omega = 0.0;
  double residual = 0.0;  // RMS misfit relative to max|u|
  int samples = 0;
};

inline constexpr int kCornerFitMinSamples = 30;

/// Fits u = c0 - c1 r^omega cos(omega phi) - c2 r^2 / 2 + c3 r^(2 omega) cos(2 omega phi),
/// phi = theta - alpha + pi/2, to nodal values with h <= r <= r_window around
/// O: golden-section search on omega in (1, 2) with linear least squares for
/// the coefficients inside.
/// Throws ParamDomain for gamma <= pi/2 and IllConditioned below 30 samples.
CornerFit corner_fit(const mesh::Mesh& mesh, const Vector& u, const geometry::TriangleSpec& spec,
                     double r_window);

/// (R_xbar u)(x) = (x1 - xbar1) d2 u - (x2 - xbar2) d1 u per cell, at barycenters.
std::vector<double> angular_derivative(const mesh::Mesh& mesh, const Vector& u, Point xbar);
/// Same operator for given points and gradients.
std::vector<double> angular_derivative(const std::vector<Point>& points,
                                       const std::vector<Point>& gradients, Point xbar);

struct CircleTrace {
  std::vector<double> angles;  // polar angle about xbar of each in-domain sample
  std::vector<double> values;
  int sign_changes = 0;  // interior sign changes along the arc, small values ignored
  int index = 0;         // sign_changes + 1
  int sign = 0;          // sign of the first significant value
};

/// Area-weighted average of the cell gradients around each vertex, with the
/// boundary conditions imposed on boundary vertices.
std::vector<Point> recovered_gradient(const mesh::Mesh& mesh, const Vector& u);

/// Angular derivative along the part of the circle |x - xbar| = radius inside
/// the mesh, sampled at `samples` equally spaced angles, using the P1
/// interpolant of the recovered gradient. Values below 1e-3 of the arc
/// maximum are treated as zero.
CircleTrace angular_trace(const fem::Locator& locator, const Vector& u, Point xbar, double radius,
                          int samples = 720);

struct QuotientReport {
  std::vector<double> values;
  double sup = 0.0;  // c0 = sup |c|
  int samples = 0;
};

/// c(x) = (f(u(x')) - f(u(x))) / (u(x') - u(x)), x' the reflection across
/// T_{lambda, vartheta}, on D_{lambda, vartheta, vartheta1}; f'(u(x)) when the
/// denominator is below 1e-12. Throws EmptyDomain.
QuotientReport difference_quotient_coeff(const mesh::Mesh& mesh, const Vector& u,
                                         const fem::Nonlinearity& nl,
                                         const geometry::TriangleSpec& spec, double lambda,
                                         double vartheta, double vartheta1, int samples = 400);

/// Tangential derivative on a Neumann side beyond the thresholds Phi1, Psi1:
/// lower side grad u . e_{alpha - pi/2} < 0 for lambda >= Phi1, upper side
/// grad u . e_{pi/2 - beta} < 0 for lambda >= Psi1, evaluated on the cells
/// with an edge on that side. Absent when the threshold is.
struct TangentialReport {
  std::optional<Verdict> lower;
  std::optional<Verdict> upper;
};
TangentialReport tangential_neumann(const mesh::Mesh& mesh, const Vector& u,
                                    const geometry::TriangleSpec& spec, double c = kToleranceC);

/// Interior points of a convex polygon: barycentric lattices on a fan.
std::vector<Point> polygon_samples(const std::vector<Point>& polygon, int samples);

struct QualReport {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  int n = 0;
  double h = 0.0;
  double mu = 0.0;
  double eigen_residual = 0.0;
  bool positive = false;  // strict sign of the free nodal values
  Verdict positivity;     // min free value against -C h max|u|
  Verdict monotone_dirichlet_normal;
  Verdict monotone_middle_normal;
  double middle_direction = 0.0;
  std::optional<SymmetryReport> symmetry;
  MaxLocation max_location;
  std::vector<CriticalCluster> critical_points;
  std::optional<CornerFit> corner_fit;
  std::string corner_fit_error;
  std::optional<Verdict> reflection_positivity;  // worst over the (lambda, vartheta) grid
  TangentialReport tangential_neumann;

  /// Every verdict guaranteed for this triangle passes.
  bool all_pass() const;
  /// Names of guaranteed verdicts that failed.
  std::vector<std::string> failures() const;
};

struct QualifyOptions {
  double c = kToleranceC;
  double grad_tol = kDefaultGradTol;
  int positivity_grid = 4;  // per axis
  double corner_window = 0.0;  // 0: automatic
};

QualReport qualify_all(const geometry::TriangleSpec& spec, const mesh::Mesh& mesh,
                       const fem::EigenResult& eig, const QualifyOptions& opts = {});

/// NeumannVertex unless the Neumann vertex is obtuse and the triangle is not
/// isosceles, in which case LongerNeumannInterior.
MaxClass predicted_max_class(const geometry::TriangleSpec& spec);

/// `key = value` lines with dotted keys.
std::string to_text(const QualReport& r);
std::string csv_header();
std::string to_csv_row(const QualReport& r);

}  // namespace mixedtri::qualify
