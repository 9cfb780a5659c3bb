#include "mixedtri/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <variant>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "mixedtri/error.hpp"

namespace mixedtri::fem {

using geometry::cross;
using Triplet = Eigen::Triplet<double>;
using ColMatrix = Eigen::SparseMatrix<double>;

double SparseOperator::asymmetry() const {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < matrix.outerSize(); ++r)
    for (decltype(matrix)::InnerIterator it(matrix, r); it; ++it)
      worst = std::max(worst, std::abs(it.value() - matrix.coeff(it.col(), it.row())));
  return worst;
}

ElementMatrices element_matrices(Point a, Point b, Point c, MassKind mass) {
  const double area = 0.5 * cross(b - a, c - a);
  if (!(area > 0.0)) {
    std::ostringstream msg;
    msg << "cell with signed area " << area;
    throw Error(ErrorKind::DegenerateCell, msg.str());
  }
  // grad of the hat function at vertex k is rot(opposite edge) / (2 area)
  const std::array<Point, 3> p{a, b, c};
  std::array<Point, 3> g;
  for (int k = 0; k < 3; ++k) {
    const Point e = p[(k + 2) % 3] - p[(k + 1) % 3];
    g[k] = {-e.y / (2.0 * area), e.x / (2.0 * area)};
  }
  ElementMatrices em;
  em.area = area;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      em.stiffness[i][j] = area * geometry::dot(g[i], g[j]);
      if (mass == MassKind::Consistent)
        em.mass[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
      else
        em.mass[i][j] = i == j ? area / 3.0 : 0.0;
    }
  return em;
}

SystemMatrices assemble(const mesh::Mesh& mesh, MassKind mass) {
  const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
  std::vector<Triplet> kt;
  std::vector<Triplet> mt;
  kt.reserve(9 * mesh.num_cells());
  mt.reserve(9 * mesh.num_cells());
  for (const auto& t : mesh.cells) {
    const auto em = element_matrices(mesh.vertices[t[0]], mesh.vertices[t[1]],
                                     mesh.vertices[t[2]], mass);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        kt.emplace_back(t[i], t[j], em.stiffness[i][j]);
        if (em.mass[i][j] != 0.0) mt.emplace_back(t[i], t[j], em.mass[i][j]);
      }
  }
  SystemMatrices sys;
  sys.stiffness.matrix.resize(nv, nv);
  sys.mass.matrix.resize(nv, nv);
  sys.stiffness.matrix.setFromTriplets(kt.begin(), kt.end());
  sys.mass.matrix.setFromTriplets(mt.begin(), mt.end());
  return sys;
}

Vector ReducedSystem::embed(const Vector& reduced) const {
  Vector full = Vector::Zero(full_dimension);
  for (std::size_t i = 0; i < free_to_full.size(); ++i)
    full[free_to_full[i]] = reduced[static_cast<Eigen::Index>(i)];
  return full;
}

Vector ReducedSystem::restrict_to_free(const Vector& full) const {
  Vector r(dimension());
  for (std::size_t i = 0; i < free_to_full.size(); ++i)
    r[static_cast<Eigen::Index>(i)] = full[free_to_full[i]];
  return r;
}

namespace {

SparseOperator restrict_operator(const SparseOperator& op, const std::vector<int>& full_to_free,
                                 Eigen::Index dim) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(op.matrix.nonZeros()));
  for (Eigen::Index r = 0; r < op.matrix.outerSize(); ++r) {
    const int fr = full_to_free[r];
    if (fr < 0) continue;
    for (decltype(op.matrix)::InnerIterator it(op.matrix, r); it; ++it) {
      const int fc = full_to_free[it.col()];
      if (fc >= 0) t.emplace_back(fr, fc, it.value());
    }
  }
  SparseOperator out;
  out.matrix.resize(dim, dim);
  out.matrix.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace

ReducedSystem apply_dirichlet(const SystemMatrices& system, const mesh::Mesh& mesh) {
  const auto mask = mesh.dirichlet_mask();
  ReducedSystem rs;
  rs.full_dimension = static_cast<Eigen::Index>(mask.size());
  rs.full_to_free.assign(mask.size(), -1);
  for (std::size_t v = 0; v < mask.size(); ++v) {
    if (mask[v]) continue;
    rs.full_to_free[v] = static_cast<int>(rs.free_to_full.size());
    rs.free_to_full.push_back(static_cast<int>(v));
  }
  rs.stiffness = restrict_operator(system.stiffness, rs.full_to_free, rs.dimension());
  rs.mass = restrict_operator(system.mass, rs.full_to_free, rs.dimension());
  return rs;
}

struct SpdSolver::Impl {
  using Direct = Eigen::SimplicialLLT<ColMatrix>;
  using Iterative =
      Eigen::ConjugateGradient<ColMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>>;
  ColMatrix a;
  std::variant<std::unique_ptr<Direct>, std::unique_ptr<Iterative>> solver;
};

SpdSolver::SpdSolver(const SparseOperator& a) : impl_(std::make_unique<Impl>()) {
  impl_->a = a.matrix;
  impl_->a.makeCompressed();
  if (a.dimension() <= kDirectSolveLimit) {
    auto s = std::make_unique<Impl::Direct>(impl_->a);
    if (s->info() != Eigen::Success)
      throw Error(ErrorKind::NonPositive, "sparse Cholesky factorization failed");
    impl_->solver = std::move(s);
  } else {
    auto s = std::make_unique<Impl::Iterative>();
    s->setTolerance(kInnerCgTolerance);
    s->compute(impl_->a);
    if (s->info() != Eigen::Success)
      throw Error(ErrorKind::NonPositive, "incomplete Cholesky preconditioner failed");
    impl_->solver = std::move(s);
  }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

bool SpdSolver::direct() const { return impl_->solver.index() == 0; }

Vector SpdSolver::solve(const Vector& b) const {
  if (direct()) return std::get<0>(impl_->solver)->solve(b);
  const auto& cg = *std::get<1>(impl_->solver);
  Vector x = cg.solve(b);
  if (cg.info() != Eigen::Success)
    throw Error(ErrorKind::NoConvergence, "inner conjugate-gradient solve did not converge");
  return x;
}

EigenPair smallest_eigenpair(const SparseOperator& k, const SparseOperator& m,
                             const EigenOptions& opts) {
  if (!(opts.tol > 0.0)) throw Error(ErrorKind::ParamDomain, "tol must be positive");
  const Eigen::Index n = k.dimension();
  if (n == 0 || m.dimension() != n)
    throw Error(ErrorKind::ParamDomain, "empty or mismatched eigenproblem");

  SpdSolver solver(k);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  Vector u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = dist(rng);

  auto m_normalize = [&](Vector& v) { v /= std::sqrt(v.dot(m.apply(v))); };
  m_normalize(u);

  EigenPair out;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iter; ++it) {
    u = solver.solve(m.apply(u));
    m_normalize(u);
    const Vector mu_vec = m.apply(u);
    const double mu = u.dot(k.apply(u));  // u' M u = 1
    residual = (k.apply(u) - mu * mu_vec).norm() / mu_vec.norm();
    if (residual <= opts.tol) {
      if (u.sum() < 0.0) u = -u;
      out.mu = mu;
      out.u = std::move(u);
      out.residual = residual;
      out.iterations = it;
      return out;
    }
  }
  std::ostringstream msg;
  msg << "inverse iteration after " << opts.max_iter << " iterations, residual " << residual;
  throw Error(ErrorKind::NoConvergence, msg.str());
}

EigenResult solve_eigenproblem(const mesh::Mesh& mesh, const EigenOptions& opts, MassKind mass) {
  const auto sys = assemble(mesh, mass);
  const auto rs = apply_dirichlet(sys, mesh);
  auto pair = smallest_eigenpair(rs.stiffness, rs.mass, opts);
  EigenResult r;
  r.mu = pair.mu;
  r.residual = pair.residual;
  r.iterations = pair.iterations;
  r.min_free_value = pair.u.minCoeff();
  r.u = rs.embed(pair.u);
  return r;
}

Nonlinearity Nonlinearity::linear(double mu) {
  Nonlinearity nl;
  nl.kind = Kind::Linear;
  std::ostringstream s;
  s.precision(17);
  s << "linear:" << mu;
  nl.name = s.str();
  nl.f = [mu](double u) { return mu * u; };
  nl.fprime = [mu](double) { return mu; };
  return nl;
}

Nonlinearity Nonlinearity::power(double p) {
  if (!(p > 1.0)) throw Error(ErrorKind::ParamDomain, "power exponent must exceed 1");
  Nonlinearity nl;
  nl.kind = Kind::Power;
  std::ostringstream s;
  s.precision(17);
  s << "power:" << p;
  nl.name = s.str();
  nl.f = [p](double u) { return std::pow(std::abs(u), p - 1.0) * u; };
  nl.fprime = [p](double u) { return p * std::pow(std::abs(u), p - 1.0); };
  return nl;
}

Nonlinearity Nonlinearity::logistic(double a, double b) {
  if (!(b > 0.0)) throw Error(ErrorKind::ParamDomain, "logistic capacity must be positive");
  Nonlinearity nl;
  nl.kind = Kind::Logistic;
  std::ostringstream s;
  s.precision(17);
  s << "logistic:" << a << ',' << b;
  nl.name = s.str();
  nl.f = [a, b](double u) { return a * u * (1.0 - u / b); };
  nl.fprime = [a, b](double u) { return a * (1.0 - 2.0 * u / b); };
  return nl;
}

Nonlinearity Nonlinearity::zero() {
  Nonlinearity nl;
  nl.kind = Kind::Zero;
  nl.name = "zero";
  nl.f = [](double) { return 0.0; };
  nl.fprime = [](double) { return 0.0; };
  return nl;
}

Nonlinearity Nonlinearity::custom(std::string name, std::function<double(double)> f,
                                  std::function<double(double)> fprime) {
  if (!f || !fprime) throw Error(ErrorKind::ParamDomain, "custom nonlinearity needs f and f'");
  Nonlinearity nl;
  nl.kind = Kind::Custom;
  nl.name = std::move(name);
  nl.f = std::move(f);
  nl.fprime = std::move(fprime);
  return nl;
}

Nonlinearity Nonlinearity::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size())
      throw Error(ErrorKind::Usage, "bad number '" + s + "' in nonlinearity '" + text + "'");
    return v;
  };
  if (head == "zero" && rest.empty()) return zero();
  if (head == "linear") return linear(number(rest));
  if (head == "power") return power(number(rest));
  if (head == "logistic") {
    const auto comma = rest.find(',');
    if (comma == std::string::npos)
      throw Error(ErrorKind::Usage, "logistic needs 'logistic:A,B'");
    return logistic(number(rest.substr(0, comma)), number(rest.substr(comma + 1)));
  }
  throw Error(ErrorKind::Usage,
              "unknown nonlinearity '" + text + "' (zero, linear:MU, power:P, logistic:A,B)");
}

double Nonlinearity::derivative_mismatch(const std::vector<double>& samples, double step) const {
  double worst = 0.0;
  for (double x : samples) {
    const double fd = (f(x + step) - f(x - step)) / (2.0 * step);
    const double d = fprime(x);
    worst = std::max(worst, std::abs(fd - d) / std::max(1.0, std::abs(d)));
  }
  return worst;
}

namespace {

constexpr double kSignTolerance = 1e-8;

Vector apply_f(const Nonlinearity& nl, const Vector& u) {
  Vector out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = nl.f(u[i]);
  return out;
}

}  // namespace

Vector semilinear_residual(const ReducedSystem& sys, const Nonlinearity& nl, const Vector& u) {
  return sys.stiffness.apply(u) - sys.mass.apply(apply_f(nl, u));
}

Vector semilinear_jacobian_apply(const ReducedSystem& sys, const Nonlinearity& nl,
                                 const Vector& u, const Vector& v) {
  Vector dv(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) dv[i] = nl.fprime(u[i]) * v[i];
  return sys.stiffness.apply(v) - sys.mass.apply(dv);
}

SemilinearResult solve_semilinear(const mesh::Mesh& mesh, const Nonlinearity& nl,
                                  const Vector& u0, const NewtonOptions& opts) {
  if (!(opts.tol > 0.0)) throw Error(ErrorKind::ParamDomain, "tol must be positive");
  if (u0.size() != static_cast<Eigen::Index>(mesh.num_vertices()))
    throw Error(ErrorKind::ParamDomain, "initial guess size does not match the mesh");
  const auto rs = apply_dirichlet(assemble(mesh, opts.mass), mesh);
  for (Eigen::Index v = 0; v < u0.size(); ++v)
    if (rs.full_to_free[v] < 0 && u0[v] != 0.0)
      throw Error(ErrorKind::ParamDomain, "initial guess is nonzero on the Dirichlet side");

  Vector u = rs.restrict_to_free(u0);
  Vector F = semilinear_residual(rs, nl, u);
  double r = F.norm();
  const double r0 = r;
  SemilinearResult res;
  res.newton_history.push_back(r);

  // Besides the ratio test, an iterate is accepted when F is negligible next
  // to K u itself; this is what lets an exact solution pass at step zero.
  auto converged = [&](double rn, const Vector& x) {
    return rn <= opts.tol * r0 || rn <= opts.tol * rs.stiffness.apply(x).norm() || rn == 0.0;
  };

  int it = 0;
  while (!converged(r, u)) {
    if (it == opts.max_iter) {
      std::ostringstream msg;
      msg << "Newton after " << it << " iterations, residual " << r << " (initial " << r0 << ")";
      throw Error(ErrorKind::NoConvergence, msg.str());
    }
    ++it;
    // J = K - M diag(f'(u)); not symmetric, so LU.
    Eigen::SparseMatrix<double> J = rs.stiffness.matrix;
    {
      Vector fp(u.size());
      for (Eigen::Index i = 0; i < u.size(); ++i) fp[i] = nl.fprime(u[i]);
      Eigen::SparseMatrix<double> md = rs.mass.matrix * fp.asDiagonal();
      J -= md;
    }
    J.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw Error(ErrorKind::NoConvergence, "singular Newton Jacobian at iteration " +
                                                std::to_string(it));
    const Vector du = lu.solve(-F);
    if (lu.info() != Eigen::Success || !du.allFinite())
      throw Error(ErrorKind::NoConvergence, "Newton step solve failed at iteration " +
                                                std::to_string(it));
    double t = 1.0;
    Vector trial = u + du;
    Vector Ft = semilinear_residual(rs, nl, trial);
    int halvings = 0;
    while (!(Ft.norm() < r)) {
      if (halvings == opts.max_halvings) {
        std::ostringstream msg;
        msg << "step halving exhausted at iteration " << it << ", residual " << r;
        throw Error(ErrorKind::NoConvergence, msg.str());
      }
      ++halvings;
      t *= 0.5;
      trial = u + t * du;
      Ft = semilinear_residual(rs, nl, trial);
    }
    u = std::move(trial);
    F = std::move(Ft);
    r = F.norm();
    res.newton_history.push_back(r);
  }

  res.iterations = it;
  // Sign test against the larger of the start and final amplitudes, so that
  // round-off around a zero solution is not mistaken for a negative branch.
  const double umax = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
  const double umin = u.size() ? u.minCoeff() : 0.0;
  const double scale = std::max(umax, u0.cwiseAbs().maxCoeff());
  if (umin < -kSignTolerance * scale) {
    std::ostringstream msg;
    msg << "converged field has min " << umin << " against max |u| " << umax;
    throw Error(ErrorKind::NegativeBranch, msg.str());
  }
  res.positivity = u.size() > 0 && umin > 0.0;
  res.u = rs.embed(u);
  return res;
}

Vector power_initial_guess(const mesh::Mesh& mesh, const EigenResult& eig, double p) {
  if (!(p > 1.0)) throw Error(ErrorKind::ParamDomain, "power exponent must exceed 1");
  double i2 = 0.0;
  double ip = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const double w = mesh.cell_area(c) / 3.0;
    for (int v : mesh.cells[c]) {
      const double phi = std::max(0.0, eig.u[v]);
      i2 += w * phi * phi;
      ip += w * std::pow(phi, p + 1.0);
    }
  }
  if (!(ip > 0.0)) throw Error(ErrorKind::NonPositive, "eigenfunction has no positive mass");
  const double c = std::pow(eig.mu * i2 / ip, 1.0 / (p - 1.0));
  return c * eig.u;
}

std::vector<Point> gradient_field(const mesh::Mesh& mesh, const Vector& u) {
  std::vector<Point> g(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells[c];
    const Point a = mesh.vertices[t[0]];
    const Point e1 = mesh.vertices[t[1]] - a;
    const Point e2 = mesh.vertices[t[2]] - a;
    const double d1 = u[t[1]] - u[t[0]];
    const double d2 = u[t[2]] - u[t[0]];
    const double det = cross(e1, e2);
    g[c] = {(d1 * e2.y - d2 * e1.y) / det, (d2 * e1.x - d1 * e2.x) / det};
  }
  return g;
}

double l2_norm_squared(const mesh::Mesh& mesh, const Vector& u) {
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells[c];
    const double a = u[t[0]], b = u[t[1]], d = u[t[2]];
    s += mesh.cell_area(c) / 6.0 * (a * a + b * b + d * d + a * b + b * d + a * d);
  }
  return s;
}

Locator::Locator(const mesh::Mesh& mesh) : mesh_(&mesh) {
  if (mesh.vertices.empty() || mesh.cells.empty())
    throw Error(ErrorKind::ParamDomain, "locator needs a non-empty mesh");
  Point lo = mesh.vertices.front();
  Point hi = lo;
  for (const Point& p : mesh.vertices) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double w = std::max(hi.x - lo.x, 1e-300);
  const double h = std::max(hi.y - lo.y, 1e-300);
  const double target = std::max(1.0, std::sqrt(static_cast<double>(mesh.num_cells()) / 2.0));
  cell_size_ = std::max(w, h) / target;
  lo_ = lo;
  nx_ = std::max(1, static_cast<int>(std::ceil(w / cell_size_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(h / cell_size_)));
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  const double pad = 1e-9 * std::max(w, h);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    Point a = mesh.vertices[mesh.cells[c][0]];
    Point b = a;
    for (int v : mesh.cells[c]) {
      const Point p = mesh.vertices[v];
      a = {std::min(a.x, p.x), std::min(a.y, p.y)};
      b = {std::max(b.x, p.x), std::max(b.y, p.y)};
    }
    const int i0 = std::clamp(static_cast<int>(std::floor((a.x - pad - lo_.x) / cell_size_)), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>(std::floor((b.x + pad - lo_.x) / cell_size_)), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>(std::floor((a.y - pad - lo_.y) / cell_size_)), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>(std::floor((b.y + pad - lo_.y) / cell_size_)), 0, ny_ - 1);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) buckets_[static_cast<std::size_t>(i) * ny_ + j].push_back(static_cast<int>(c));
  }
}

std::optional<Locator::Hit> Locator::locate(Point x, double tol) const {
  const int i = std::clamp(static_cast<int>(std::floor((x.x - lo_.x) / cell_size_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor((x.y - lo_.y) / cell_size_)), 0, ny_ - 1);
  std::optional<Hit> best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int c : buckets_[static_cast<std::size_t>(i) * ny_ + j]) {
    const auto& t = mesh_->cells[c];
    const Point a = mesh_->vertices[t[0]];
    const Point b = mesh_->vertices[t[1]];
    const Point d = mesh_->vertices[t[2]];
    const double det = cross(b - a, d - a);
    const double l1 = cross(x - a, d - a) / det;
    const double l2 = cross(b - a, x - a) / det;
    const std::array<double, 3> bary{1.0 - l1 - l2, l1, l2};
    const double mn = std::min({bary[0], bary[1], bary[2]});
    if (mn >= -tol && mn > best_min) {
      best_min = mn;
      best = Hit{c, bary};
    }
  }
  return best;
}

double Locator::interpolate(const Vector& u, Point x, double tol) const {
  const auto hit = locate(x, tol);
  if (!hit) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "point (" << x.x << ", " << x.y << ") is outside the mesh";
    throw Error(ErrorKind::OutsideDomain, msg.str());
  }
  const auto& t = mesh_->cells[hit->cell];
  return hit->bary[0] * u[t[0]] + hit->bary[1] * u[t[1]] + hit->bary[2] * u[t[2]];
}

double interpolate(const mesh::Mesh& mesh, const Vector& u, Point x) {
  return Locator(mesh).interpolate(u, x);
}

}  // namespace mixedtri::fem
