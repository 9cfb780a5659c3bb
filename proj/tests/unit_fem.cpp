#include <cmath>
#include <random>

#include "doctest.h"
#include "mixedtri/error.hpp"
#include "mixedtri/fem.hpp"
#include "oracle.hpp"

using namespace mixedtri;
using namespace mixedtri::fem;
using geometry::deg2rad;
using geometry::kPi;
using geometry::make_triangle;

namespace {

Vector nodal(const mesh::Mesh& m, auto&& fn) {
  Vector u(static_cast<Eigen::Index>(m.num_vertices()));
  for (std::size_t v = 0; v < m.num_vertices(); ++v) u[v] = fn(m.vertices[v]);
  return u;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Usage;
}

}  // namespace

TEST_CASE("element matrices on the unit right triangle") {
  const auto em = element_matrices({0, 0}, {1, 0}, {0, 1});
  const double k[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(em.stiffness[i][j] - k[i][j]) < 1e-15);
      CHECK(std::abs(em.mass[i][j] - (i == j ? 2.0 : 1.0) / 24.0) < 1e-16);
    }
  const auto lumped = element_matrices({0, 0}, {1, 0}, {0, 1}, MassKind::Lumped);
  CHECK(std::abs(lumped.mass[0][0] - 1.0 / 6.0) < 1e-16);
  CHECK(lumped.mass[0][1] == 0.0);
  CHECK(kind_of([] { element_matrices({0, 0}, {0, 1}, {1, 0}); }) == ErrorKind::DegenerateCell);
  CHECK(kind_of([] { element_matrices({0, 0}, {1, 1}, {2, 2}); }) == ErrorKind::DegenerateCell);
}

TEST_CASE("assembly: constants, symmetry, definiteness") {
  for (auto [a, b] : {std::pair{45.0, 45.0}, {48.0, 33.0}, {30.0, 30.0}}) {
    const auto s = make_triangle(deg2rad(a), deg2rad(b));
    const auto m = mesh::generate(s, 10, mesh::default_grading(s));
    const auto sys = assemble(m);
    CHECK(sys.stiffness.asymmetry() <= 1e-13);
    CHECK(sys.mass.asymmetry() <= 1e-13);
    const Vector c = Vector::Constant(static_cast<Eigen::Index>(m.num_vertices()), 2.5);
    CHECK(sys.stiffness.apply(c).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(c.dot(sys.mass.apply(c)) - 6.25 * s.area()) < 1e-12);
    // reduced stiffness is SPD: smallest dense eigenvalue of K against I
    const auto rs = apply_dirichlet(sys, m);
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(rs.dimension(), rs.dimension());
    const auto low = oracle::dense_smallest_eigenpair(Eigen::MatrixXd(rs.stiffness.matrix), id);
    CHECK(low.mu > 0.0);
  }
}

TEST_CASE("Dirichlet reduction") {
  const auto m1 = mesh::generate(make_triangle(kPi / 4, kPi / 4), 1);
  const auto rs = apply_dirichlet(assemble(m1), m1);
  CHECK(rs.dimension() == 1);
  CHECK(rs.free_to_full[0] == 0);

  const auto m = mesh::generate(make_triangle(deg2rad(60), deg2rad(40)), 8);
  const auto r = apply_dirichlet(assemble(m), m);
  Vector x = Vector::LinSpaced(r.dimension(), 1.0, 2.0);
  const Vector full = r.embed(x);
  const auto mask = m.dirichlet_mask();
  for (std::size_t v = 0; v < mask.size(); ++v)
    if (mask[v]) CHECK(full[v] == 0.0);
  CHECK(r.restrict_to_free(full) == x);
}

TEST_CASE("eigenpair basics on the right isosceles triangle") {
  const auto s = make_triangle(kPi / 4, kPi / 4);
  const auto cf = oracle::closed_form_right_isosceles();
  const auto m = mesh::generate(s, 32);
  const auto e = solve_eigenproblem(m);
  CHECK(e.residual <= 1e-10);
  CHECK(e.positive());
  CHECK(std::abs(l2_norm_squared(m, e.u) - 1.0) < 1e-10);
  CHECK(e.mu >= cf.layout_mu());
  CHECK(e.mu == doctest::Approx(cf.layout_mu()).epsilon(5e-3));
  // unit-leg rescaling recovers pi^2
  CHECK(e.mu * s.phi0 * s.phi0 == doctest::Approx(kPi * kPi).epsilon(5e-3));
  const auto mask = m.dirichlet_mask();
  for (std::size_t v = 0; v < mask.size(); ++v)
    if (mask[v]) CHECK(e.u[v] == 0.0);
}

TEST_CASE("eigenvalue decreases under nested refinement") {
  for (auto [a, b] : {std::pair{45.0, 45.0}, {48.0, 33.0}, {60.0, 40.0}}) {
    const auto s = make_triangle(deg2rad(a), deg2rad(b));
    auto m = mesh::generate(s, 4, mesh::default_grading(s));
    double prev = solve_eigenproblem(m).mu;
    for (int level = 0; level < 3; ++level) {
      m = mesh::refine(m);
      const double mu = solve_eigenproblem(m).mu;
      CHECK(mu <= prev + 1e-12);
      prev = mu;
    }
  }
}

TEST_CASE("seeded eigen solve is bit stable") {
  const auto m = mesh::generate(make_triangle(deg2rad(48), deg2rad(33)), 16);
  const auto a = solve_eigenproblem(m, {1e-10, 1000, 42});
  const auto b = solve_eigenproblem(m, {1e-10, 1000, 42});
  CHECK(a.mu == b.mu);
  CHECK(a.u == b.u);
  const auto c = solve_eigenproblem(m, {1e-10, 1000, 7});
  CHECK(std::abs(a.mu - c.mu) < 1e-12 * a.mu);
}

TEST_CASE("eigen solve reports non-convergence") {
  const auto m = mesh::generate(make_triangle(deg2rad(48), deg2rad(33)), 16);
  CHECK(kind_of([&] { solve_eigenproblem(m, {1e-10, 2, 1}); }) == ErrorKind::NoConvergence);
}

TEST_CASE("lumped mass also gives a positive principal pair") {
  const auto m = mesh::generate(make_triangle(deg2rad(60), deg2rad(40)), 16);
  const auto e = solve_eigenproblem(m, {}, MassKind::Lumped);
  CHECK(e.positive());
  const auto c = solve_eigenproblem(m);
  CHECK(e.mu < c.mu);  // lumping lowers the discrete eigenvalue on P1
}

TEST_CASE("isosceles eigenfunction is mirror symmetric") {
  const auto s = make_triangle(deg2rad(30), deg2rad(30));
  const auto m = mesh::generate(s, 24, mesh::default_grading(s));
  const auto e = solve_eigenproblem(m);
  const auto map = mesh::mirror_map(m);
  double err = 0.0;
  for (std::size_t v = 0; v < map.size(); ++v) err = std::max(err, std::abs(e.u[map[v]] - e.u[v]));
  CHECK(err <= 1e-8 * e.u.cwiseAbs().maxCoeff());
}

TEST_CASE("nonlinearity menu") {
  const auto p = Nonlinearity::power(3.0);
  CHECK(p(2.0) == 8.0);
  CHECK(p(-2.0) == -8.0);
  const auto l = Nonlinearity::logistic(2.0, 4.0);
  CHECK(l(2.0) == 2.0);
  CHECK(l.fprime(2.0) == 0.0);
  const std::vector<double> samples{-2.0, -0.5, 0.1, 0.7, 1.3, 3.0};
  for (const auto& nl : {Nonlinearity::linear(9.8), p, l, Nonlinearity::power(2.5), Nonlinearity::zero()})
    CHECK(nl.derivative_mismatch(samples) <= 1e-6);
  CHECK(Nonlinearity::parse("power:3").kind == Nonlinearity::Kind::Power);
  CHECK(Nonlinearity::parse("logistic:1.5,2")(1.0) == doctest::Approx(0.75));
  CHECK(Nonlinearity::parse("linear:2")(3.0) == 6.0);
  CHECK(Nonlinearity::parse("zero")(3.0) == 0.0);
  CHECK(kind_of([] { Nonlinearity::parse("cubic:3"); }) == ErrorKind::Usage);
  CHECK(kind_of([] { Nonlinearity::parse("power:x"); }) == ErrorKind::Usage);
  CHECK(kind_of([] { Nonlinearity::parse("logistic:1"); }) == ErrorKind::Usage);
  CHECK(kind_of([] { Nonlinearity::power(1.0); }) == ErrorKind::ParamDomain);
  const auto bad = Nonlinearity::custom("bad", [](double u) { return u * u; }, [](double) { return 1.0; });
  CHECK(bad.derivative_mismatch(samples) > 1e-6);
}

TEST_CASE("semilinear: linear nonlinearity at the eigenvalue") {
  const auto m = mesh::generate(make_triangle(deg2rad(60), deg2rad(40)), 16);
  const auto e = solve_eigenproblem(m);
  const auto r = solve_semilinear(m, Nonlinearity::linear(e.mu), 3.0 * e.u);
  CHECK(r.iterations <= 1);
  CHECK(r.positivity);
  CHECK((r.u - 3.0 * e.u).cwiseAbs().maxCoeff() <= 1e-8 * e.u.cwiseAbs().maxCoeff());
}

TEST_CASE("semilinear: f = 0 gives the zero solution") {
  const auto m = mesh::generate(make_triangle(deg2rad(60), deg2rad(40)), 12);
  const auto mask = m.dirichlet_mask();
  Vector u0 = nodal(m, [](geometry::Point p) { return 1.0 - p.x; });
  const auto r = solve_semilinear(m, Nonlinearity::zero(), u0);
  CHECK(r.u.cwiseAbs().maxCoeff() < 1e-10);
  CHECK_FALSE(r.positivity);
  const auto z = solve_semilinear(m, Nonlinearity::zero(), Vector::Zero(u0.size()));
  CHECK(z.iterations == 0);
  Vector bad = u0;
  bad.setConstant(1.0);
  CHECK(kind_of([&] { solve_semilinear(m, Nonlinearity::zero(), bad); }) == ErrorKind::ParamDomain);
}

TEST_CASE("semilinear: power 3 converges quadratically to a positive solution") {
  const auto m = mesh::generate(make_triangle(kPi / 3, kPi / 6), 24);
  const auto e = solve_eigenproblem(m);
  // amplitude sqrt(mu) makes u^2 match mu at the peak
  for (const Vector& u0 : {Vector(std::sqrt(e.mu) * e.u / e.u.maxCoeff()), power_initial_guess(m, e, 3.0)}) {
    const auto r = solve_semilinear(m, Nonlinearity::power(3.0), u0);
    CHECK(r.positivity);
    const auto& h = r.newton_history;
    REQUIRE(h.size() >= 3);
    CHECK(h.back() <= 1e-10 * h.front());
    // r_{k+1} <= C r_k^2 on every step whose result is above round-off
    int tested = 0;
    for (std::size_t k = 1; k + 1 < h.size(); ++k) {
      if (h[k + 1] < 1e-12 * h.front()) continue;
      ++tested;
      CHECK(h[k + 1] <= 10.0 * h[k] * h[k] / h.front());
    }
    CHECK(tested >= 1);
  }
}

TEST_CASE("semilinear: logistic has a positive solution when a exceeds mu") {
  const auto m = mesh::generate(make_triangle(deg2rad(60), deg2rad(40)), 16);
  const auto e = solve_eigenproblem(m);
  const auto r = solve_semilinear(m, Nonlinearity::logistic(2.0 * e.mu, 1.0), 0.5 * e.u / e.u.maxCoeff());
  CHECK(r.positivity);
  CHECK(r.u.maxCoeff() < 1.0);
}

TEST_CASE("semilinear: a sign-changing start under an odd nonlinearity is reported") {
  const auto m = mesh::generate(make_triangle(deg2rad(60), deg2rad(40)), 16);
  const auto e = solve_eigenproblem(m);
  // -c phi is an exact negative solution branch for the odd power
  const Vector u0 = -power_initial_guess(m, e, 3.0);
  CHECK(kind_of([&] { solve_semilinear(m, Nonlinearity::power(3.0), u0); }) == ErrorKind::NegativeBranch);
}

TEST_CASE("Jacobian matches finite differences") {
  const auto m = mesh::generate(make_triangle(deg2rad(48), deg2rad(33)), 10);
  const auto rs = apply_dirichlet(assemble(m), m);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0.0, 1.0);
  for (const auto& nl : {Nonlinearity::power(3.0), Nonlinearity::logistic(5.0, 2.0), Nonlinearity::power(2.5)}) {
    Vector u(rs.dimension()), v(rs.dimension());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      u[i] = 1.0 + 0.3 * N(rng);
      v[i] = N(rng);
    }
    const double eps = 1e-6;
    const Vector fd = (semilinear_residual(rs, nl, u + eps * v) - semilinear_residual(rs, nl, u - eps * v)) / (2 * eps);
    const Vector jv = semilinear_jacobian_apply(rs, nl, u, v);
    CHECK((fd - jv).norm() <= 1e-5 * jv.norm());
  }
}

TEST_CASE("gradient field") {
  const auto m = mesh::generate(make_triangle(deg2rad(48), deg2rad(33)), 8, 1.3);
  for (const auto& g : gradient_field(m, nodal(m, [](auto p) { return p.x; }))) {
    CHECK(std::abs(g.x - 1.0) < 1e-12);
    CHECK(std::abs(g.y) < 1e-12);
  }
  for (const auto& g : gradient_field(m, nodal(m, [](auto p) { return 3 * p.x - 2 * p.y; }))) {
    CHECK(std::abs(g.x - 3.0) < 1e-12);
    CHECK(std::abs(g.y + 2.0) < 1e-12);
  }
  double prev = 1e9;
  for (int n : {8, 16, 32, 64}) {
    const auto mm = mesh::generate(make_triangle(deg2rad(48), deg2rad(33)), n);
    const auto g = gradient_field(mm, nodal(mm, [](auto p) { return p.x * p.x; }));
    double err = 0.0;
    for (std::size_t c = 0; c < mm.num_cells(); ++c) err = std::max(err, std::abs(g[c].x - 2 * mm.barycenter(c).x));
    CHECK(err <= 2.0 * mm.h());
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("interpolation") {
  const auto s = make_triangle(deg2rad(48), deg2rad(33));
  const auto m = mesh::generate(s, 12, 1.2);
  const Locator loc(m);
  const Vector lin = nodal(m, [](auto p) { return 0.5 + 2 * p.x - p.y; });
  for (std::size_t v = 0; v < m.num_vertices(); ++v) CHECK(loc.interpolate(lin, m.vertices[v]) == lin[v]);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    double a = U(rng), b = U(rng);
    if (a + b > 1) {
      a = 1 - a;
      b = 1 - b;
    }
    const geometry::Point p = a * s.A + b * s.B;
    CHECK(std::abs(loc.interpolate(lin, p) - (0.5 + 2 * p.x - p.y)) < 1e-13);
  }
  const auto e = solve_eigenproblem(m);
  for (double t : {0.0, 0.13, 0.5, 0.77, 1.0})
    CHECK(std::abs(loc.interpolate(e.u, (1 - t) * s.A + t * s.B)) <= 1e-12);
  CHECK(kind_of([&] { loc.interpolate(lin, {1.1, 0.0}); }) == ErrorKind::OutsideDomain);
  CHECK(kind_of([&] { interpolate(m, lin, {-0.01, 0.0}); }) == ErrorKind::OutsideDomain);
}
