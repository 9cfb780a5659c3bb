#pragma once

// Moduli-space exploration: per-angle records over an (alpha, beta) grid and
// the one-parameter deformation through triangles (0,0), (1, t a), (1, t b).

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mixedtri/qualify.hpp"

namespace mixedtri::sweep {

inline constexpr double kThinAngleDeg = 5.0;
inline constexpr double kIsoscelesGridTolDeg = 2.0;

struct SweepRecord {
  double alpha = 0.0;  // radians
  double beta = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
  qualify::MaxClass max_class = qualify::MaxClass::Other;
  geometry::Point max_point;
  double max_distance_to_vertex = 0.0;
  bool cond13 = false;
  // min over non-excluded barycenters of -d1 u (slope into the triangle along
  // the Dirichlet normal); positive when u is monotone in that direction.
  double min_dirichlet_normal_slope = 0.0;
  std::optional<double> symmetry_err;  // relative, isosceles only
  std::optional<double> omega_fit;     // obtuse only
  bool thin = false;                   // smallest angle below 5 degrees
  double h = 0.0;
  double runtime = 0.0;  // seconds, not serialized
  std::string error;     // empty on success
};

struct SweepOptions {
  int n = 64;
  double grading = 0.0;  // 0: mesh::default_grading per triangle
  int workers = 0;  // 0: hardware concurrency
  fem::EigenOptions eigen;
  fem::MassKind mass = fem::MassKind::Consistent;
  qualify::QualifyOptions qualify{.positivity_grid = 0};
};

/// (alpha, beta) in radians for `count` equally spaced values per axis on
/// [lo_deg, hi_deg], keeping alpha + beta < max_sum_deg.
std::vector<std::pair<double, double>> simplex_grid(double lo_deg, double hi_deg, int count,
                                                    double max_sum_deg = 170.0);

/// Solves and qualifies each grid point on its own worker; results are in
/// input order. Failures are recorded in SweepRecord::error.
std::vector<SweepRecord> sweep_angles(const std::vector<std::pair<double, double>>& grid,
                                      const SweepOptions& opts = {});

SweepRecord sweep_point(double alpha, double beta, const SweepOptions& opts = {});

/// Class the maximum must have: NeumannVertex iff gamma <= pi/2 or
/// |alpha - beta| <= iso_tol_deg.
qualify::MaxClass expected_class(double alpha, double beta,
                                 double iso_tol_deg = kIsoscelesGridTolDeg);

std::string csv_header();
/// Numbers at 17 significant digits. Throws ParamDomain for no records.
void write_csv(std::ostream& os, const std::vector<SweepRecord>& records);
/// Throws Io with the path on failure.
void emit_csv(const std::vector<SweepRecord>& records, const std::filesystem::path& path);
/// Inverse of write_csv (runtime is not stored). Throws Io on malformed rows.
std::vector<SweepRecord> parse_csv(std::istream& is);

/// Heatmap of max_class over the (alpha, beta) simplex with the isosceles
/// diagonal and the gamma = pi/2 line. Throws ParamDomain for no records.
void write_svg_phase(std::ostream& os, const std::vector<SweepRecord>& records);
void emit_svg_phase(const std::vector<SweepRecord>& records, const std::filesystem::path& path);

struct PathRecord {
  double t = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
  qualify::Verdict monotone;  // (t b, -1) . grad u^t < 0
  qualify::MaxClass max_class = qualify::MaxClass::Other;
};

struct DeformationPath {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> t_grid;
  std::vector<PathRecord> records;
  std::optional<double> largest_failing_t;

  /// max |mu_{i+1} - mu_i| / mu_i over adjacent t values.
  double max_relative_jump() const;
};

/// Throws ParamDomain unless b > -a > 0 and -a b > 1, and unless t_grid is
/// increasing with values >= 1.
DeformationPath continuation_t(double a, double b, const std::vector<double>& t_grid, int n,
                               const SweepOptions& opts = {});

}  // namespace mixedtri::sweep
