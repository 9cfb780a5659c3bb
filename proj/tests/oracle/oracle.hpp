#pragma once

// Independent small-scale ground truth for the test suites. Nothing here calls
// into the solver paths it is used to check.

#include <array>
#include <utility>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace mixedtri::oracle {

inline constexpr Eigen::Index kDenseLimit = 2000;

struct DensePair {
  double mu = 0.0;
  Eigen::VectorXd u;  // u' M u = 1
};

/// Smallest pair of K u = mu M u for symmetric K and SPD M: Cholesky M = L L',
/// cyclic Jacobi on L^-1 K L^-T. Throws Error(TooLarge) above kDenseLimit.
DensePair dense_smallest_eigenpair(const Eigen::MatrixXd& k, const Eigen::MatrixXd& m);

template <typename Sparse>
DensePair dense_smallest_eigenpair(const Sparse& k, const Sparse& m) {
  return dense_smallest_eigenpair(Eigen::MatrixXd(k), Eigen::MatrixXd(m));
}

/// First mixed eigenpair of the triangle with unit legs on the axes, Neumann
/// on the legs and Dirichlet on x + y = 1: mu = pi^2 and
/// u = sqrt(2) (cos(pi x) + cos(pi y)), which has unit L2 norm. This is the
/// diamond eigenfunction cos(pi xi / sqrt 2) cos(pi eta / sqrt 2) restricted.
struct RightIsosceles {
  double mu = 0.0;
  double value(double x, double y) const;
  std::array<double, 2> gradient(double x, double y) const;

  // The same triangle placed with the Neumann vertex at the origin and the
  // Dirichlet side on x1 = 1 (legs sqrt 2): mu / 2 and the L2-normalized field.
  double layout_mu() const { return mu / 2.0; }
  double layout_value(double x1, double x2) const;
  std::array<double, 2> layout_gradient(double x1, double x2) const;
};

RightIsosceles closed_form_right_isosceles();

/// Line through a point with a direction (not necessarily unit).
struct PlainLine {
  std::array<double, 2> point{};
  std::array<double, 2> dir{};
};

/// Whether three lines meet in one point within tol. Throws
/// Error(ParallelLines) if any pair is parallel.
bool brute_concurrency(const std::array<PlainLine, 3>& lines, double tol = 1e-10);

}  // namespace mixedtri::oracle
