#include <cmath>

#include "doctest.h"
#include "mixedtri/error.hpp"
#include "mixedtri/fem.hpp"
#include "oracle.hpp"

using namespace mixedtri;
using geometry::deg2rad;
using geometry::kPi;

TEST_CASE("dense oracle: 1x1 and identity pencils") {
  const auto m1 = mesh::generate(geometry::make_triangle(kPi / 4, kPi / 4), 1);
  const auto rs = fem::apply_dirichlet(fem::assemble(m1), m1);
  REQUIRE(rs.dimension() == 1);
  const auto d = oracle::dense_smallest_eigenpair(rs.stiffness.matrix, rs.mass.matrix);
  CHECK(d.mu == rs.stiffness.matrix.coeff(0, 0) / rs.mass.matrix.coeff(0, 0));

  Eigen::MatrixXd a = Eigen::MatrixXd::Random(6, 6);
  Eigen::MatrixXd spd = a * a.transpose() + 6.0 * Eigen::MatrixXd::Identity(6, 6);
  const auto id = oracle::dense_smallest_eigenpair(spd, spd);
  CHECK(std::abs(id.mu - 1.0) < 1e-13);
  CHECK(std::abs(id.u.dot(spd * id.u) - 1.0) < 1e-12);
}

TEST_CASE("dense oracle: diagonal pencil") {
  Eigen::MatrixXd k = Eigen::Vector4d(4.0, 1.5, 9.0, 2.0).asDiagonal();
  Eigen::MatrixXd m = Eigen::Vector4d(1.0, 0.5, 1.0, 2.0).asDiagonal();
  const auto d = oracle::dense_smallest_eigenpair(k, m);
  CHECK(std::abs(d.mu - 1.0) < 1e-14);
  CHECK(std::abs(std::abs(d.u[3]) - std::sqrt(0.5)) < 1e-14);
}

TEST_CASE("dense oracle refuses large systems") {
  Eigen::MatrixXd big = Eigen::MatrixXd::Identity(2001, 2001);
  try {
    oracle::dense_smallest_eigenpair(big, big);
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooLarge);
  }
}

TEST_CASE("closed form right isosceles") {
  const auto cf = oracle::closed_form_right_isosceles();
  CHECK(std::abs(cf.mu - 9.869604401089358) < 1e-14);
  // maximum at the Neumann vertex
  for (double x = 0; x <= 1.0; x += 0.05)
    for (double y = 0; x + y <= 1.0; y += 0.05) CHECK(cf.value(x, y) <= cf.value(0, 0));
  for (double t = 0; t <= 1.0; t += 0.01) CHECK(std::abs(cf.value(t, 1 - t)) <= 1e-14);
  // PDE residual by 4th-order differences
  const double h = 1e-3;
  auto d2 = [&](double x, double y, double dx, double dy) {
    return (-cf.value(x + 2 * dx, y + 2 * dy) + 16 * cf.value(x + dx, y + dy) - 30 * cf.value(x, y) +
            16 * cf.value(x - dx, y - dy) - cf.value(x - 2 * dx, y - 2 * dy)) /
           (12 * h * h);
  };
  for (double x = 0.1; x < 0.8; x += 0.1)
    for (double y = 0.1; x + y < 0.9; y += 0.1) {
      const double lap = d2(x, y, h, 0) + d2(x, y, 0, h);
      CHECK(std::abs(lap + cf.mu * cf.value(x, y)) <= 1e-8 * cf.mu);
    }
  // unit L2 norm over the unit-leg triangle (midpoint rule on a fine grid)
  const int n = 800;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; i + j < n; ++j) {
      const double x = (i + 1.0 / 3) / n, y = (j + 1.0 / 3) / n;
      s += cf.value(x, y) * cf.value(x, y) * 0.5 / n / n;
      if (i + j + 1 < n) {
        const double xx = (i + 2.0 / 3) / n, yy = (j + 2.0 / 3) / n;
        s += cf.value(xx, yy) * cf.value(xx, yy) * 0.5 / n / n;
      }
    }
  CHECK(std::abs(s - 1.0) < 1e-5);
  // layout form is consistent with the unit-leg form
  CHECK(std::abs(cf.layout_value(1.0, 0.0) - cf.value(0.5, 0.5) / std::sqrt(2.0)) < 1e-15);
  const auto g = cf.layout_gradient(0.4, 0.1);
  const double e = 1e-6;
  CHECK(std::abs(g[0] - (cf.layout_value(0.4 + e, 0.1) - cf.layout_value(0.4 - e, 0.1)) / (2 * e)) < 1e-8);
  CHECK(std::abs(g[1] - (cf.layout_value(0.4, 0.1 + e) - cf.layout_value(0.4, 0.1 - e)) / (2 * e)) < 1e-8);
}

TEST_CASE("brute concurrency") {
  using oracle::PlainLine;
  const std::array<PlainLine, 3> through{PlainLine{{0.3, 0.4}, {1, 0}}, PlainLine{{0.3, 0.4}, {1, 2}},
                                         PlainLine{{1.3, 0.4 - 3}, {1, -3}}};
  CHECK(oracle::brute_concurrency(through));
  auto moved = through;
  moved[2].point[0] += 1e-3;
  CHECK_FALSE(oracle::brute_concurrency(moved));
  auto parallel = through;
  parallel[1].dir = {2, 0};
  try {
    oracle::brute_concurrency(parallel);
    FAIL("expected ParallelLines");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParallelLines);
  }
}

TEST_CASE("sparse and dense eigenpaths agree on small meshes") {
  for (auto [a, b] : {std::pair{45.0, 45.0}, {60.0, 40.0}, {48.0, 33.0}, {30.0, 30.0}, {80.0, 70.0}}) {
    const auto s = geometry::make_triangle(deg2rad(a), deg2rad(b));
    for (int n : {2, 4, 8}) {
      const auto m = mesh::generate(s, n, mesh::default_grading(s));
      const auto rs = fem::apply_dirichlet(fem::assemble(m), m);
      const auto sp = fem::smallest_eigenpair(rs.stiffness, rs.mass);
      const auto dn = oracle::dense_smallest_eigenpair(rs.stiffness.matrix, rs.mass.matrix);
      CAPTURE(a);
      CAPTURE(n);
      CHECK(std::abs(sp.mu - dn.mu) <= 1e-10 * dn.mu);
      CHECK((sp.u - dn.u).cwiseAbs().maxCoeff() <= 1e-6 * dn.u.cwiseAbs().maxCoeff());
    }
  }
}
