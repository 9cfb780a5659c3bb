#pragma once

// P1 finite elements on a triangle mesh: assembly, Dirichlet reduction, the
// principal eigenpair of the mixed problem and a damped Newton solver for
// Laplace(u) + f(u) = 0.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mixedtri/mesh.hpp"

namespace mixedtri::fem {

using geometry::Point;
using Vector = Eigen::VectorXd;

/// Symmetric operator in row-compressed storage.
struct SparseOperator {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;

  Eigen::Index dimension() const { return matrix.rows(); }
  Vector apply(const Vector& x) const { return matrix * x; }
  /// max |A_ij - A_ji| over stored entries.
  double asymmetry() const;
};

enum class MassKind { Consistent, Lumped };

struct SystemMatrices {
  SparseOperator stiffness;
  SparseOperator mass;
};

using ElementMatrix = std::array<std::array<double, 3>, 3>;

struct ElementMatrices {
  ElementMatrix stiffness{};
  ElementMatrix mass{};
  double area = 0.0;
};

/// Exact P1 element matrices for the counterclockwise triangle (a, b, c).
/// Throws DegenerateCell for non-positive area.
ElementMatrices element_matrices(Point a, Point b, Point c, MassKind mass = MassKind::Consistent);

/// Stiffness and mass on all vertices; Neumann sides contribute nothing.
SystemMatrices assemble(const mesh::Mesh& mesh, MassKind mass = MassKind::Consistent);

/// Operators restricted to the non-Dirichlet vertices.
struct ReducedSystem {
  SparseOperator stiffness;
  SparseOperator mass;
  std::vector<int> free_to_full;
  std::vector<int> full_to_free;  // -1 on Dirichlet vertices
  Eigen::Index full_dimension = 0;

  Eigen::Index dimension() const { return static_cast<Eigen::Index>(free_to_full.size()); }
  /// Re-embeds a reduced field with exact zeros on Dirichlet vertices.
  Vector embed(const Vector& reduced) const;
  Vector restrict_to_free(const Vector& full) const;
};

ReducedSystem apply_dirichlet(const SystemMatrices& system, const mesh::Mesh& mesh);

/// Dimension up to which the inner solves use a sparse Cholesky factorization;
/// larger systems switch to preconditioned conjugate gradients.
inline constexpr Eigen::Index kDirectSolveLimit = 200000;
inline constexpr double kInnerCgTolerance = 1e-12;

/// Solves A x = b for a symmetric positive definite A, factoring once.
class SpdSolver {
 public:
  explicit SpdSolver(const SparseOperator& a);
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  Vector solve(const Vector& b) const;
  bool direct() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct EigenOptions {
  double tol = 1e-10;
  int max_iter = 1000;
  std::uint64_t seed = 1;
};

struct EigenPair {
  double mu = 0.0;
  Vector u;  // M-normalized, mean positive
  double residual = 0.0;
  int iterations = 0;
};

/// Smallest eigenpair of K u = mu M u by inverse iteration with zero shift.
/// Residual is ||K u - mu M u|| / ||M u||. Throws NoConvergence.
EigenPair smallest_eigenpair(const SparseOperator& k, const SparseOperator& m,
                             const EigenOptions& opts = {});

/// Principal mixed eigenpair as a nodal field on the whole mesh.
struct EigenResult {
  double mu = 0.0;
  Vector u;  // zero on Dirichlet vertices, integral of u^2 equal to 1
  double residual = 0.0;
  int iterations = 0;
  /// Smallest value over non-Dirichlet vertices; > 0 for a positive field.
  double min_free_value = 0.0;
  bool positive() const { return min_free_value > 0.0; }
};

EigenResult solve_eigenproblem(const mesh::Mesh& mesh, const EigenOptions& opts = {},
                               MassKind mass = MassKind::Consistent);

/// Nonlinearity f with derivative; the named kinds are the shipped menu.
struct Nonlinearity {
  enum class Kind { Linear, Power, Logistic, Zero, Custom };

  Kind kind = Kind::Zero;
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> fprime;

  double operator()(double u) const { return f(u); }

  /// f(u) = mu u.
  static Nonlinearity linear(double mu);
  /// f(u) = |u|^(p-1) u, p > 1.
  static Nonlinearity power(double p);
  /// f(u) = a u (1 - u / b), b > 0.
  static Nonlinearity logistic(double a, double b);
  /// f = 0.
  static Nonlinearity zero();
  static Nonlinearity custom(std::string name, std::function<double(double)> f,
                             std::function<double(double)> fprime);

  /// Parses "linear:MU", "power:P", "logistic:A,B" or "zero".
  static Nonlinearity parse(const std::string& text);

  /// Largest relative mismatch between fprime and a central difference of f
  /// over the sample points.
  double derivative_mismatch(const std::vector<double>& samples, double step = 1e-5) const;
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
  int max_halvings = 30;
  MassKind mass = MassKind::Consistent;
};

struct SemilinearResult {
  Vector u;  // full nodal field
  std::vector<double> newton_history;  // ||F|| per iterate, starting with F(u0)
  bool positivity = false;             // u > 0 at every non-Dirichlet vertex
  int iterations = 0;
};

/// F(u) = K u - M f(u) on the free vertices.
Vector semilinear_residual(const ReducedSystem& sys, const Nonlinearity& nl, const Vector& u);
/// J(u) v = K v - M diag(f'(u)) v.
Vector semilinear_jacobian_apply(const ReducedSystem& sys, const Nonlinearity& nl,
                                 const Vector& u, const Vector& v);

/// Damped Newton for Laplace(u) + f(u) = 0 with u = 0 on the Dirichlet side.
/// Converged iff ||F|| <= tol ||F(u0)||. Throws NoConvergence, or
/// NegativeBranch when the converged field changes sign.
SemilinearResult solve_semilinear(const mesh::Mesh& mesh, const Nonlinearity& nl,
                                  const Vector& u0, const NewtonOptions& opts = {});

/// Eigenfunction scaled so that mu c phi and c^p phi^p balance in the mean:
/// c^(p-1) = mu int(phi^2) / int(phi^(p+1)).
Vector power_initial_guess(const mesh::Mesh& mesh, const EigenResult& eig, double p);

/// Exact gradient of the P1 interpolant on each cell.
std::vector<Point> gradient_field(const mesh::Mesh& mesh, const Vector& u);

/// Integral of u^2 for a nodal field (consistent mass).
double l2_norm_squared(const mesh::Mesh& mesh, const Vector& u);

/// Bucket-grid point location on a fixed mesh.
class Locator {
 public:
  explicit Locator(const mesh::Mesh& mesh);

  struct Hit {
    int cell = -1;
    std::array<double, 3> bary{};
  };

  /// Cell containing x within the barycentric tolerance, if any.
  std::optional<Hit> locate(Point x, double tol = 1e-10) const;
  /// Barycentric P1 evaluation. Throws OutsideDomain.
  double interpolate(const Vector& u, Point x, double tol = 1e-10) const;

  const mesh::Mesh& mesh() const { return *mesh_; }

 private:
  const mesh::Mesh* mesh_;
  Point lo_;
  double cell_size_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

/// One-shot interpolation; builds a locator. Throws OutsideDomain.
double interpolate(const mesh::Mesh& mesh, const Vector& u, Point x);

}  // namespace mixedtri::fem
