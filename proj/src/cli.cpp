#include "mixedtri/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "mixedtri/error.hpp"
#include "mixedtri/fem.hpp"
#include "mixedtri/mesh.hpp"
#include "mixedtri/qualify.hpp"
#include "mixedtri/sweep.hpp"

namespace mixedtri::cli {

namespace fs = std::filesystem;
using geometry::deg2rad;
using geometry::kPi;
using geometry::Point;
using geometry::rad2deg;

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string point_text(Point p) { return num(p.x) + " " + num(p.y); }

// Files of one invocation, written together with a manifest of hashes.
class Bundle {
 public:
  explicit Bundle(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }

  void write() const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir_.string() + ": " + ec.message());
    std::ostringstream manifest;
    for (const auto& [name, content] : files_) {
      put(name, content);
      manifest << name << ' ' << content.size() << " fnv1a64:" << hex64(fnv1a64(content)) << '\n';
    }
    put("manifest.txt", manifest.str());
  }

  const fs::path& dir() const { return dir_; }

 private:
  void put(const std::string& name, const std::string& content) const {
    const auto path = dir_ / name;
    std::ofstream os(path, std::ios::binary);
    os << content;
    os.close();
    if (!os) throw Error(ErrorKind::Io, "write failed for " + path.string());
  }

  fs::path dir_;
  std::map<std::string, std::string> files_;
};

struct Globals {
  double alpha_deg = 45.0;
  double beta_deg = 45.0;
  int n = 64;
  double grading = 0.0;
  double tol = 1e-10;
  std::uint64_t seed = 1;
  std::string out = "out";
  int workers = 0;
};

geometry::TriangleSpec triangle(const Globals& g) {
  return geometry::make_triangle(deg2rad(g.alpha_deg), deg2rad(g.beta_deg));
}

std::string angle_tag(const Globals& g) {
  return short_num(g.alpha_deg) + "x" + short_num(g.beta_deg);
}

mesh::Mesh make_mesh(const Globals& g, const geometry::TriangleSpec& spec) {
  return mesh::generate(spec, g.n, g.grading > 0.0 ? g.grading : mesh::default_grading(spec));
}

fem::EigenOptions eigen_options(const Globals& g) {
  fem::EigenOptions o;
  o.tol = g.tol;
  o.seed = g.seed;
  return o;
}

std::string spec_text(const geometry::TriangleSpec& spec) {
  std::ostringstream os;
  const auto cls = geometry::classify(spec);
  os << "triangle.alpha_deg = " << num(rad2deg(spec.alpha)) << '\n'
     << "triangle.beta_deg = " << num(rad2deg(spec.beta)) << '\n'
     << "triangle.gamma_deg = " << num(rad2deg(spec.gamma)) << '\n'
     << "triangle.O = " << point_text(spec.O) << '\n'
     << "triangle.A = " << point_text(spec.A) << '\n'
     << "triangle.B = " << point_text(spec.B) << '\n'
     << "triangle.phi0 = " << num(spec.phi0) << '\n'
     << "triangle.psi0 = " << num(spec.psi0) << '\n'
     << "triangle.area = " << num(spec.area()) << '\n'
     << "class.neumann_vertex = " << geometry::to_string(cls.neumann_vertex) << '\n'
     << "class.isosceles = " << bool_text(cls.isosceles) << '\n'
     << "class.longer_neumann_side = " << geometry::to_string(cls.longer_neumann_side) << '\n'
     << "class.middle_side = " << geometry::to_string(cls.middle_side) << '\n'
     << "class.condition_13 = " << bool_text(geometry::condition_13(spec.alpha, spec.beta))
     << '\n';
  const auto th = geometry::thresholds(spec);
  auto opt = [&](const char* key, const std::optional<double>& v) {
    os << "thresholds." << key << " = " << (v ? num(*v) : std::string("none")) << '\n';
  };
  opt("phi1", th.phi1);
  opt("psi1", th.psi1);
  opt("phi2", th.phi2);
  opt("psi2", th.psi2);
  opt("alpha_star", th.alpha_star);
  opt("beta_star", th.beta_star);
  return os.str();
}

std::string domain_text(const geometry::MovingDomain& d) {
  std::ostringstream os;
  os << "domain.lambda = " << num(d.lambda) << '\n'
     << "domain.vartheta = " << num(d.vartheta) << '\n'
     << "domain.vartheta1 = " << num(d.vartheta1) << '\n'
     << "domain.empty = " << bool_text(d.empty()) << '\n'
     << "domain.area = " << num(d.area()) << '\n'
     << "domain.perimeter = " << num(d.perimeter()) << '\n'
     << "domain.gamma1_equality = " << bool_text(d.gamma1_equality) << '\n'
     << "domain.vertices = " << d.polygon.size() << '\n';
  for (std::size_t i = 0; i < d.polygon.size(); ++i)
    os << "domain.vertex." << i << " = " << point_text(d.polygon[i]) << '\n';
  for (std::size_t i = 0; i < d.segments.size(); ++i) {
    const auto& s = d.segments[i];
    os << "domain.segment." << i << " = " << point_text(s.a) << ' ' << point_text(s.b) << ' '
       << geometry::to_string(s.tag) << '\n';
  }
  return os.str();
}

// Verdict checks shared by the eigenfunction and semilinear reports.
struct ShapeVerdicts {
  std::vector<std::pair<std::string, qualify::Verdict>> verdicts;
  std::optional<qualify::SymmetryReport> symmetry;
};

ShapeVerdicts shape_verdicts(const geometry::TriangleSpec& spec, const mesh::Mesh& m,
                             const fem::Vector& u) {
  ShapeVerdicts s;
  const auto cls = geometry::classify(spec);
  if (cls.neumann_vertex != geometry::VertexKind::Obtuse || cls.isosceles)
    s.verdicts.emplace_back("monotone_dirichlet_normal",
                            qualify::directional_monotonicity(m, u, 0.0));
  if (cls.neumann_vertex == geometry::VertexKind::Obtuse)
    s.verdicts.emplace_back("monotone_middle_normal",
                            qualify::normal_monotonicity_middle_side(m, u, spec));
  if (cls.isosceles) {
    s.symmetry = qualify::symmetry_error(m, u);
    s.verdicts.emplace_back("symmetry.axis_monotone", s.symmetry->axis_monotone);
  }
  return s;
}

fem::Vector semilinear_guess(const mesh::Mesh& m, const fem::EigenResult& eig,
                             const fem::Nonlinearity& nl, const std::string& text) {
  if (nl.kind == fem::Nonlinearity::Kind::Power) {
    const double p = std::stod(text.substr(text.find(':') + 1));
    return fem::power_initial_guess(m, eig, p);
  }
  if (nl.kind == fem::Nonlinearity::Kind::Logistic) {
    // A positive branch exists for a > mu; b (1 - mu / a) is its rough size.
    const auto comma = text.find(',');
    const double a = std::stod(text.substr(text.find(':') + 1));
    const double b = std::stod(text.substr(comma + 1));
    const double peak = eig.u.maxCoeff();
    const double target = a > eig.mu ? b * (1.0 - eig.mu / a) : b;
    return (target / peak) * eig.u;
  }
  return eig.u;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw Error(ErrorKind::Usage, "bad number in list: " + item);
    out.push_back(v);
  }
  return out;
}

}  // namespace

void write_geometry_svg(std::ostream& os, const geometry::TriangleSpec& spec,
                        const geometry::MovingDomain* domain, const geometry::MovingLine* line) {
  const double ylo = std::min(spec.A.y, 0.0), yhi = std::max(spec.B.y, 0.0);
  const double span = std::max(1.0, yhi - ylo);
  constexpr double size = 500.0, margin = 40.0;
  const double scale = size / span;
  const double width = scale * 1.0 + 2 * margin, height = scale * (yhi - ylo) + 2 * margin;
  auto px = [&](Point p) { return margin + p.x * scale; };
  auto py = [&](Point p) { return margin + (yhi - p.y) * scale; };
  auto xy = [&](Point p) { return short_num(px(p)) + "," + short_num(py(p)); };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << short_num(width)
     << "\" height=\"" << short_num(height) << "\" viewBox=\"0 0 " << short_num(width) << ' '
     << short_num(height) << "\">\n"
     << "<defs><clipPath id=\"tri\"><polygon points=\"" << xy(spec.O) << ' ' << xy(spec.A) << ' '
     << xy(spec.B) << "\"/></clipPath></defs>\n";
  if (domain && !domain->empty()) {
    os << "<polygon points=\"";
    for (std::size_t i = 0; i < domain->polygon.size(); ++i)
      os << (i ? " " : "") << xy(domain->polygon[i]);
    os << "\" fill=\"#fdae61\" fill-opacity=\"0.6\" stroke=\"none\"/>\n";
  }
  if (line) {
    const Point d = line->line().direction();
    const double reach = 2.0 * (span + 1.0);
    os << "<line x1=\"" << short_num(px(line->base - reach * d)) << "\" y1=\""
       << short_num(py(line->base - reach * d)) << "\" x2=\""
       << short_num(px(line->base + reach * d)) << "\" y2=\""
       << short_num(py(line->base + reach * d))
       << "\" stroke=\"#1a9850\" stroke-width=\"1.5\" clip-path=\"url(#tri)\"/>\n";
  }
  auto side = [&](Point a, Point b, const char* colour, const char* extra) {
    os << "<line x1=\"" << short_num(px(a)) << "\" y1=\"" << short_num(py(a)) << "\" x2=\""
       << short_num(px(b)) << "\" y2=\"" << short_num(py(b)) << "\" stroke=\"" << colour
       << "\" stroke-width=\"3\"" << extra << "/>\n";
  };
  side(spec.A, spec.B, "#d73027", "");
  side(spec.O, spec.A, "#4575b4", " stroke-dasharray=\"8 4\"");
  side(spec.O, spec.B, "#4575b4", " stroke-dasharray=\"8 4\"");
  auto label = [&](Point p, const char* text, double dx) {
    os << "<text x=\"" << short_num(px(p) + dx) << "\" y=\"" << short_num(py(p) + 5)
       << "\" font-size=\"16\">" << text << "</text>\n";
  };
  label(spec.O, "O", -18);
  label(spec.A, "A", 6);
  label(spec.B, "B", 6);
  os << "</svg>\n";
}

int run(const std::vector<std::string>& argv_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed Dirichlet-Neumann triangles: eigenfunctions, positive solutions and "
               "their qualitative properties",
               "mixedtri"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Line-oriented `key = value` file; flags override it");
  app.allow_config_extras(false);

  Globals g;
  app.add_option("--alpha-deg", g.alpha_deg, "Angle at A in degrees")->capture_default_str();
  app.add_option("--beta-deg", g.beta_deg, "Angle at B in degrees")->capture_default_str();
  app.add_option("--n", g.n, "Mesh subdivisions per side")->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--grading", g.grading,
                 "Radial grading exponent toward O (0 picks max(1, 2 gamma / pi))")
      ->capture_default_str();
  app.add_option("--tol", g.tol, "Eigen and Newton tolerance")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed of the eigensolver start vector")->capture_default_str();
  app.add_option("--out", g.out, "Output root directory")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads for sweeps (0 = all cores)")
      ->capture_default_str();

  auto* geom = app.add_subcommand("geom", "Triangle data, thresholds, moving domain and SVG");
  double lambda = -1.0, vartheta_deg = 90.0;
  geom->add_option("--lambda", lambda, "Moving-line parameter (negative: no domain)")
      ->capture_default_str();
  geom->add_option("--vartheta-deg", vartheta_deg, "Moving-line angle in degrees")
      ->capture_default_str();

  auto* mesh_cmd = app.add_subcommand("mesh", "Generate, validate and export the mesh");

  auto* eigen = app.add_subcommand("eigen", "Principal eigenpair and its qualitative report");
  std::string mass = "consistent";
  eigen->add_option("--mass", mass, "Mass matrix")
      ->check(CLI::IsMember({"consistent", "lumped"}))
      ->capture_default_str();

  auto* semi = app.add_subcommand("semilinear", "Positive solution of Laplace(u) + f(u) = 0");
  std::string f_text;
  semi->add_option("--f", f_text, "Nonlinearity: linear:MU | power:P | logistic:A,B")
      ->required();

  auto* verify = app.add_subcommand("verify", "Full verdict suite for one triangle");
  int positivity_grid = 4;
  verify->add_option("--positivity-grid", positivity_grid,
                     "Moving-plane grid points per axis (0 disables)")
      ->capture_default_str();

  auto* sweep_cmd = app.add_subcommand("sweep", "Phase diagram over an (alpha, beta) grid");
  double grid_lo = 10.0, grid_hi = 80.0, max_sum = 170.0;
  int grid_count = 15;
  sweep_cmd->add_option("--grid-lo", grid_lo, "Smallest angle in degrees")->capture_default_str();
  sweep_cmd->add_option("--grid-hi", grid_hi, "Largest angle in degrees")->capture_default_str();
  sweep_cmd->add_option("--grid-count", grid_count, "Grid points per axis")
      ->capture_default_str();
  sweep_cmd->add_option("--max-sum", max_sum, "Keep alpha + beta below this (degrees)")
      ->capture_default_str();

  auto* cont = app.add_subcommand("continue", "Deformation through (0,0), (1, t a), (1, t b)");
  double a = -1.1, b = 1.2;
  std::string t_text = "1,1.25,1.5,1.75,2,2.25,2.5,2.75,3,3.25,3.5,3.75,4,4.25,4.5,4.75,5";
  cont->add_option("--a", a, "Lower ordinate")->capture_default_str();
  cont->add_option("--b", b, "Upper ordinate")->capture_default_str();
  cont->add_option("--t", t_text, "Comma-separated increasing t values >= 1")
      ->capture_default_str();

  for (auto* sub : app.get_subcommands({}))
    sub->footer("Global flags listed by `mixedtri --help` are accepted after the subcommand.");

  std::vector<std::string> args(argv_in.size() > 1 ? argv_in.begin() + 1 : argv_in.end(),
                                argv_in.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    // help() follows the parsed subcommand, so `sub --help` prints its page.
    const int code = app.exit(e, out, err);
    return code == static_cast<int>(CLI::ExitCodes::Success) ? kExitPass : kExitError;
  }

  try {
    const fs::path root(g.out);
    if (geom->parsed()) {
      const auto spec = triangle(g);
      Bundle bundle(root / "geom" / angle_tag(g));
      bundle.add("spec.txt", spec_text(spec));
      std::optional<geometry::MovingDomain> domain;
      std::optional<geometry::MovingLine> ml;
      if (lambda >= 0.0) {
        const double vt = deg2rad(vartheta_deg);
        ml = geometry::moving_line(spec, geometry::Family::Lower, lambda, vt);
        domain = geometry::moving_domain(spec, lambda, vt);
        bundle.add("domain.txt", domain_text(*domain));
      }
      std::ostringstream svg;
      write_geometry_svg(svg, spec, domain ? &*domain : nullptr, ml ? &*ml : nullptr);
      bundle.add("geom.svg", svg.str());
      bundle.write();
      out << spec_text(spec);
      if (domain) out << domain_text(*domain);
      out << "output = " << bundle.dir().string() << '\n';
      return kExitPass;
    }

    if (mesh_cmd->parsed()) {
      const auto spec = triangle(g);
      const auto m = make_mesh(g, spec);
      const auto v = mesh::validate(m);
      std::ostringstream mesh_txt, report;
      mesh::write_text(mesh_txt, m);
      report << "mesh.n = " << m.n << '\n'
             << "mesh.grading = " << num(m.grading) << '\n'
             << "mesh.vertices = " << m.num_vertices() << '\n'
             << "mesh.cells = " << m.num_cells() << '\n'
             << "mesh.boundary_edges = " << m.boundary_edges.size() << '\n'
             << "mesh.h = " << num(m.h()) << '\n'
             << "mesh.min_angle_deg = " << num(rad2deg(v.min_angle)) << '\n'
             << "mesh.max_aspect = " << num(v.max_aspect) << '\n'
             << "mesh.valid = " << bool_text(v.ok()) << '\n';
      for (const auto& msg : v.violations) report << "mesh.violation = " << msg << '\n';
      Bundle bundle(root / "mesh" / angle_tag(g));
      bundle.add("mesh.txt", mesh_txt.str());
      bundle.add("validation.txt", report.str());
      bundle.write();
      out << report.str() << "output = " << bundle.dir().string() << '\n';
      return v.ok() ? kExitPass : kExitVerdictFailed;
    }

    if (eigen->parsed() || verify->parsed()) {
      const auto spec = triangle(g);
      const auto m = make_mesh(g, spec);
      const auto kind = mass == "lumped" ? fem::MassKind::Lumped : fem::MassKind::Consistent;
      const auto eig = fem::solve_eigenproblem(m, eigen_options(g), kind);
      qualify::QualifyOptions qo;
      qo.positivity_grid = verify->parsed() ? positivity_grid : 0;
      const auto rep = qualify::qualify_all(spec, m, eig, qo);
      const auto text = qualify::to_text(rep);
      const char* sub = verify->parsed() ? "verify" : "eigen";
      Bundle bundle(root / sub / angle_tag(g));
      bundle.add("report.txt", text);
      bundle.add("report.csv", qualify::csv_header() + "\n" + qualify::to_csv_row(rep) + "\n");
      if (eigen->parsed()) {
        std::ostringstream sol;
        mesh::write_text(sol, m, std::span<const double>(eig.u.data(), eig.u.size()));
        bundle.add("solution.txt", sol.str());
      } else {
        std::ostringstream verdicts;
        verdicts << "predicted.max_class = " << qualify::to_string(qualify::predicted_max_class(spec))
                 << '\n'
                 << "observed.max_class = " << qualify::to_string(rep.max_location.cls) << '\n';
        const auto failed = rep.failures();
        verdicts << "verdict = " << (failed.empty() ? "pass" : "fail") << '\n';
        for (const auto& f : failed) verdicts << "failed = " << f << '\n';
        bundle.add("verdicts.txt", verdicts.str());
      }
      bundle.write();
      out << text << "output = " << bundle.dir().string() << '\n';
      return rep.all_pass() ? kExitPass : kExitVerdictFailed;
    }

    if (semi->parsed()) {
      const auto spec = triangle(g);
      const auto nl = fem::Nonlinearity::parse(f_text);
      const auto m = make_mesh(g, spec);
      const auto eig = fem::solve_eigenproblem(m, eigen_options(g));
      fem::NewtonOptions no;
      no.tol = g.tol;
      const auto res = fem::solve_semilinear(m, nl, semilinear_guess(m, eig, nl, f_text), no);
      const auto shape = shape_verdicts(spec, m, res.u);
      const auto mx = qualify::locate_max(m, res.u, spec);
      std::ostringstream report;
      report << "triangle.alpha_deg = " << num(g.alpha_deg) << '\n'
             << "triangle.beta_deg = " << num(g.beta_deg) << '\n'
             << "mesh.n = " << m.n << '\n'
             << "mesh.h = " << num(m.h()) << '\n'
             << "f = " << nl.name << '\n'
             << "newton.iterations = " << res.iterations << '\n';
      for (std::size_t i = 0; i < res.newton_history.size(); ++i)
        report << "newton.residual." << i << " = " << num(res.newton_history[i]) << '\n';
      report << "solution.positive = " << bool_text(res.positivity) << '\n'
             << "solution.max = " << num(res.u.maxCoeff()) << '\n'
             << "max_location.point = " << point_text(mx.point) << '\n'
             << "max_location.class = " << qualify::to_string(mx.cls) << '\n';
      if (shape.symmetry)
        report << "symmetry.relative = " << num(shape.symmetry->relative) << '\n';
      bool ok = res.positivity;
      for (const auto& [name, v] : shape.verdicts) {
        report << name << ".pass = " << bool_text(v.pass) << '\n'
               << name << ".worst_value = " << num(v.worst_value) << '\n'
               << name << ".tolerance = " << num(v.tolerance) << '\n';
        ok = ok && v.pass;
      }
      report << "summary.all_pass = " << bool_text(ok) << '\n';
      std::ostringstream sol;
      mesh::write_text(sol, m, std::span<const double>(res.u.data(), res.u.size()));
      Bundle bundle(root / "semilinear" / angle_tag(g));
      bundle.add("report.txt", report.str());
      bundle.add("solution.txt", sol.str());
      bundle.write();
      out << report.str() << "output = " << bundle.dir().string() << '\n';
      return ok ? kExitPass : kExitVerdictFailed;
    }

    if (sweep_cmd->parsed()) {
      if (grid_count < 1 || grid_hi < grid_lo)
        throw Error(ErrorKind::Usage, "empty grid: need --grid-count >= 1 and --grid-hi >= --grid-lo");
      const auto grid = sweep::simplex_grid(grid_lo, grid_hi, grid_count, max_sum);
      if (grid.empty()) throw Error(ErrorKind::Usage, "empty grid: no point has alpha + beta < --max-sum");
      sweep::SweepOptions so;
      so.n = g.n;
      so.grading = g.grading;
      so.workers = g.workers;
      so.eigen = eigen_options(g);
      const auto recs = sweep::sweep_angles(grid, so);
      std::ostringstream csv, svg;
      sweep::write_csv(csv, recs);
      sweep::write_svg_phase(svg, recs);
      int mismatched = 0, errors = 0;
      for (const auto& r : recs) {
        if (!r.error.empty()) {
          ++errors;
        } else if (!r.thin && r.max_class != sweep::expected_class(r.alpha, r.beta)) {
          ++mismatched;
        }
      }
      Bundle bundle(root / "sweep" /
                    (short_num(grid_lo) + "-" + short_num(grid_hi) + "x" + std::to_string(grid_count)));
      bundle.add("sweep.csv", csv.str());
      bundle.add("phase.svg", svg.str());
      bundle.write();
      out << "records = " << recs.size() << '\n'
          << "errors = " << errors << '\n'
          << "mismatched = " << mismatched << '\n'
          << "output = " << bundle.dir().string() << '\n';
      return errors == 0 && mismatched == 0 ? kExitPass : kExitVerdictFailed;
    }

    if (cont->parsed()) {
      const auto ts = parse_list(t_text);
      sweep::SweepOptions so;
      so.grading = g.grading;
      so.workers = g.workers;
      so.eigen = eigen_options(g);
      const auto path = sweep::continuation_t(a, b, ts, g.n, so);
      std::ostringstream csv;
      csv << "t,alpha_deg,beta_deg,gamma_deg,mu,monotone_pass,monotone_worst,monotone_tol,"
             "max_class\n";
      for (const auto& r : path.records) {
        csv << num(r.t) << ',' << num(rad2deg(r.alpha)) << ',' << num(rad2deg(r.beta)) << ','
            << num(rad2deg(r.gamma)) << ',' << num(r.mu) << ',' << bool_text(r.monotone.pass)
            << ',' << num(r.monotone.worst_value) << ',' << num(r.monotone.tolerance) << ','
            << qualify::to_string(r.max_class) << '\n';
      }
      Bundle bundle(root / "continue" / ("a" + short_num(a) + "_b" + short_num(b)));
      bundle.add("path.csv", csv.str());
      bundle.write();
      out << csv.str() << "max_relative_jump = " << num(path.max_relative_jump()) << '\n'
          << "largest_failing_t = "
          << (path.largest_failing_t ? num(*path.largest_failing_t) : std::string("none")) << '\n'
          << "output = " << bundle.dir().string() << '\n';
      return path.largest_failing_t ? kExitVerdictFailed : kExitPass;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  err << "usage error: no subcommand\n";
  return kExitError;
}

}  // namespace mixedtri::cli
