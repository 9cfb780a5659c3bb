#include "mixedtri/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "mixedtri/error.hpp"

namespace mixedtri::sweep {

using geometry::deg2rad;
using geometry::kPi;
using geometry::rad2deg;

namespace {

// Runs fn(i) for i in [0, count) on a pool of workers; each index writes only
// its own slot, so results are independent of scheduling.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  int k = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  k = std::clamp(k, 1, static_cast<int>(std::max<std::size_t>(count, 1)));
  if (k == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(k);
  for (int w = 0; w < k; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw Error(ErrorKind::Io, "line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s, std::size_t line) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw Error(ErrorKind::Io, "line " + std::to_string(line) + ": bad boolean '" + s + "'");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  return os;
}

void close_out(std::ofstream& os, const std::filesystem::path& path) {
  os.close();
  if (!os) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

double smallest_angle(double alpha, double beta) {
  return std::min({alpha, beta, kPi - alpha - beta});
}

}  // namespace

std::vector<std::pair<double, double>> simplex_grid(double lo_deg, double hi_deg, int count,
                                                    double max_sum_deg) {
  if (count < 1 || !(hi_deg >= lo_deg))
    throw Error(ErrorKind::ParamDomain, "grid needs count >= 1 and hi >= lo");
  std::vector<std::pair<double, double>> grid;
  const double step = count == 1 ? 0.0 : (hi_deg - lo_deg) / (count - 1);
  for (int i = 0; i < count; ++i) {
    const double a = lo_deg + step * i;
    for (int j = 0; j < count; ++j) {
      const double b = lo_deg + step * j;
      if (a + b < max_sum_deg) grid.emplace_back(deg2rad(a), deg2rad(b));
    }
  }
  return grid;
}

SweepRecord sweep_point(double alpha, double beta, const SweepOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  SweepRecord rec;
  rec.alpha = alpha;
  rec.beta = beta;
  rec.gamma = kPi - alpha - beta;
  rec.thin = smallest_angle(alpha, beta) < deg2rad(kThinAngleDeg);
  try {
    const auto spec = geometry::make_triangle(alpha, beta);
    rec.gamma = spec.gamma;
    const double grading = opts.grading > 0.0 ? opts.grading : mesh::default_grading(spec);
    const auto m = mesh::generate(spec, opts.n, grading);
    const auto eig = fem::solve_eigenproblem(m, opts.eigen, opts.mass);
    const auto rep = qualify::qualify_all(spec, m, eig, opts.qualify);
    rec.mu = eig.mu;
    rec.h = rep.h;
    rec.max_class = rep.max_location.cls;
    rec.max_point = rep.max_location.point;
    rec.max_distance_to_vertex = rep.max_location.distance_to_vertex;
    rec.cond13 = geometry::condition_13(alpha, beta);
    rec.min_dirichlet_normal_slope = -rep.monotone_dirichlet_normal.worst_value;
    if (rep.symmetry) rec.symmetry_err = rep.symmetry->relative;
    if (rep.corner_fit) rec.omega_fit = rep.corner_fit->omega;
  } catch (const std::exception& e) {
    rec.error = sanitize(e.what());
  }
  rec.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<SweepRecord> sweep_angles(const std::vector<std::pair<double, double>>& grid,
                                      const SweepOptions& opts) {
  std::vector<SweepRecord> out(grid.size());
  parallel_for(grid.size(), opts.workers,
               [&](std::size_t i) { out[i] = sweep_point(grid[i].first, grid[i].second, opts); });
  return out;
}

qualify::MaxClass expected_class(double alpha, double beta, double iso_tol_deg) {
  const double gamma = kPi - alpha - beta;
  if (gamma <= kPi / 2 + geometry::kRightAngleTol ||
      std::abs(alpha - beta) <= deg2rad(iso_tol_deg))
    return qualify::MaxClass::NeumannVertex;
  return qualify::MaxClass::LongerNeumannInterior;
}

std::string csv_header() {
  return "alpha_deg,beta_deg,gamma_deg,mu,max_class,max_x,max_y,cond13,min_normal_slope,"
         "symmetry_err,omega_fit,thin,error";
}

void write_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  if (records.empty()) throw Error(ErrorKind::ParamDomain, "no records to write");
  os << csv_header() << '\n';
  for (const auto& r : records) {
    const bool ok = r.error.empty();
    auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
    os << num(rad2deg(r.alpha)) << ',' << num(rad2deg(r.beta)) << ',' << num(rad2deg(r.gamma))
       << ',';
    if (ok) {
      os << num(r.mu) << ',' << qualify::to_string(r.max_class) << ',' << num(r.max_point.x)
         << ',' << num(r.max_point.y) << ',' << (r.cond13 ? "true" : "false") << ','
         << num(r.min_dirichlet_normal_slope) << ',' << opt(r.symmetry_err) << ','
         << opt(r.omega_fit) << ',';
    } else {
      os << ",,,,,,,,";
    }
    os << (r.thin ? "true" : "false") << ',' << sanitize(r.error) << '\n';
  }
}

void emit_csv(const std::vector<SweepRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) throw Error(ErrorKind::ParamDomain, "no records to write");
  auto os = open_out(path);
  write_csv(os, records);
  close_out(os, path);
}

std::vector<SweepRecord> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != csv_header())
    throw Error(ErrorKind::Io, "missing or unexpected CSV header");
  std::vector<SweepRecord> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 13)
      throw Error(ErrorKind::Io, "line " + std::to_string(lineno) + ": expected 13 fields");
    SweepRecord r;
    r.alpha = deg2rad(parse_double(f[0], lineno));
    r.beta = deg2rad(parse_double(f[1], lineno));
    r.gamma = deg2rad(parse_double(f[2], lineno));
    r.thin = parse_bool(f[11], lineno);
    r.error = f[12];
    if (r.error.empty()) {
      r.mu = parse_double(f[3], lineno);
      try {
        r.max_class = qualify::max_class_from_string(f[4]);
      } catch (const Error&) {
        throw Error(ErrorKind::Io, "line " + std::to_string(lineno) + ": bad class '" + f[4] + "'");
      }
      r.max_point = {parse_double(f[5], lineno), parse_double(f[6], lineno)};
      r.cond13 = parse_bool(f[7], lineno);
      r.min_dirichlet_normal_slope = parse_double(f[8], lineno);
      if (!f[9].empty()) r.symmetry_err = parse_double(f[9], lineno);
      if (!f[10].empty()) r.omega_fit = parse_double(f[10], lineno);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_svg_phase(std::ostream& os, const std::vector<SweepRecord>& records) {
  if (records.empty()) throw Error(ErrorKind::ParamDomain, "no records to draw");
  std::set<double> alphas, betas;
  for (const auto& r : records) {
    alphas.insert(rad2deg(r.alpha));
    betas.insert(rad2deg(r.beta));
  }
  double step = 0.0;
  for (const auto* axis : {&alphas, &betas}) {
    for (auto it = axis->begin(); std::next(it) != axis->end() && it != axis->end(); ++it) {
      const double d = *std::next(it) - *it;
      if (d > 1e-9 && (step == 0.0 || d < step)) step = d;
    }
  }
  if (step == 0.0) step = 5.0;
  const double lo = std::min(*alphas.begin(), *betas.begin()) - step;
  const double hi = std::max(*alphas.rbegin(), *betas.rbegin()) + step;

  constexpr double size = 600.0, margin = 60.0;
  const double scale = size / (hi - lo);
  auto px = [&](double a) { return margin + (a - lo) * scale; };
  auto py = [&](double b) { return margin + size - (b - lo) * scale; };
  auto colour = [](const SweepRecord& r) -> const char* {
    if (!r.error.empty()) return "#999999";
    switch (r.max_class) {
      case qualify::MaxClass::NeumannVertex: return "#4575b4";
      case qualify::MaxClass::LongerNeumannInterior: return "#d73027";
      case qualify::MaxClass::Other: return "#fee090";
    }
    return "#000000";
  };

  const double w = size + 2 * margin;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w
     << "\" height=\"" << w + 40 << "\" viewBox=\"0 0 " << w << ' ' << w + 40 << "\">\n"
     << "<defs><clipPath id=\"plot\"><rect x=\"" << margin << "\" y=\"" << margin
     << "\" width=\"" << size << "\" height=\"" << size << "\"/></clipPath></defs>\n"
     << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size << "\" height=\""
     << size << "\" fill=\"white\" stroke=\"black\"/>\n<g clip-path=\"url(#plot)\">\n";
  const double cell = step * scale;
  for (const auto& r : records) {
    const double a = rad2deg(r.alpha), b = rad2deg(r.beta);
    os << "<rect x=\"" << px(a) - cell / 2 << "\" y=\"" << py(b) - cell / 2 << "\" width=\""
       << cell << "\" height=\"" << cell << "\" fill=\"" << colour(r) << '"'
       << (r.thin ? " fill-opacity=\"0.5\"" : "") << "><title>alpha=" << num(a)
       << " beta=" << num(b) << "</title></rect>\n";
  }
  auto line = [&](double a0, double b0, double a1, double b1, const char* dash) {
    os << "<line x1=\"" << px(a0) << "\" y1=\"" << py(b0) << "\" x2=\"" << px(a1) << "\" y2=\""
       << py(b1) << "\" stroke=\"black\" stroke-width=\"2\"" << dash << "/>\n";
  };
  line(lo, lo, hi, hi, "");                                      // alpha = beta
  line(lo, 90.0 - lo, hi, 90.0 - hi, " stroke-dasharray=\"8 4\"");  // gamma = pi/2
  line(lo, 180.0 - lo, hi, 180.0 - hi, " stroke-dasharray=\"2 4\"");  // degenerate edge
  os << "</g>\n";
  os << "<text x=\"" << margin + size / 2 << "\" y=\"" << margin + size + 35
     << "\" text-anchor=\"middle\" font-size=\"16\">alpha (deg)</text>\n"
     << "<text x=\"20\" y=\"" << margin + size / 2 << "\" text-anchor=\"middle\" font-size=\"16\" "
     << "transform=\"rotate(-90 20 " << margin + size / 2 << ")\">beta (deg)</text>\n";
  for (double t : {lo, (lo + hi) / 2, hi}) {
    os << "<text x=\"" << px(t) << "\" y=\"" << margin + size + 16
       << "\" text-anchor=\"middle\" font-size=\"12\">" << num(std::round(t * 10) / 10)
       << "</text>\n<text x=\"" << margin - 6 << "\" y=\"" << py(t) + 4
       << "\" text-anchor=\"end\" font-size=\"12\">" << num(std::round(t * 10) / 10)
       << "</text>\n";
  }
  const double ly = margin + size + 60;
  const std::pair<const char*, const char*> legend[] = {{"#4575b4", "NeumannVertex"},
                                                        {"#d73027", "LongerNeumannInterior"},
                                                        {"#fee090", "Other"},
                                                        {"#999999", "error"}};
  double lx = margin;
  for (const auto& [fill, name] : legend) {
    os << "<rect x=\"" << lx << "\" y=\"" << ly - 12 << "\" width=\"14\" height=\"14\" fill=\""
       << fill << "\"/><text x=\"" << lx + 20 << "\" y=\"" << ly
       << "\" font-size=\"13\">" << name << "</text>\n";
    lx += 160;
  }
  os << "</svg>\n";
}

void emit_svg_phase(const std::vector<SweepRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) throw Error(ErrorKind::ParamDomain, "no records to draw");
  auto os = open_out(path);
  write_svg_phase(os, records);
  close_out(os, path);
}

double DeformationPath::max_relative_jump() const {
  double jump = 0.0;
  for (std::size_t i = 1; i < records.size(); ++i)
    jump = std::max(jump, std::abs(records[i].mu - records[i - 1].mu) / records[i - 1].mu);
  return jump;
}

DeformationPath continuation_t(double a, double b, const std::vector<double>& t_grid, int n,
                               const SweepOptions& opts) {
  if (!(b > -a && -a > 0.0 && -a * b > 1.0))
    throw Error(ErrorKind::ParamDomain, "need b > -a > 0 and -ab > 1, got a=" + num(a) +
                                            " b=" + num(b));
  if (t_grid.empty()) throw Error(ErrorKind::ParamDomain, "empty t grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 1.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1])))
      throw Error(ErrorKind::ParamDomain, "t grid must be increasing with values >= 1");
  }
  DeformationPath path;
  path.a = a;
  path.b = b;
  path.t_grid = t_grid;
  path.records.resize(t_grid.size());
  std::vector<std::exception_ptr> errors(t_grid.size());
  parallel_for(t_grid.size(), opts.workers, [&](std::size_t i) {
    try {
      const double t = t_grid[i];
      const auto spec = geometry::triangle_from_ordinates(t * a, t * b);
      const double grading = opts.grading > 0.0 ? opts.grading : mesh::default_grading(spec);
      const auto m = mesh::generate(spec, n, grading);
      const auto eig = fem::solve_eigenproblem(m, opts.eigen, opts.mass);
      auto& r = path.records[i];
      r.t = t;
      r.alpha = spec.alpha;
      r.beta = spec.beta;
      r.gamma = spec.gamma;
      r.mu = eig.mu;
      r.monotone = qualify::directional_monotonicity(m, eig.u, std::atan2(-1.0, t * b), -1.0,
                                                     qualify::Sign::Negative, opts.qualify.c);
      r.max_class = qualify::locate_max(m, eig.u, spec).cls;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& r : path.records) {
    if (!r.monotone.pass) path.largest_failing_t = r.t;
  }
  return path;
}

}  // namespace mixedtri::sweep
