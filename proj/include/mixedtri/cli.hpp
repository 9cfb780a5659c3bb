#pragma once

// Command-line front end. Degrees at the boundary, radians inside.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mixedtri/geometry.hpp"

namespace mixedtri::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerdictFailed = 2;

/// Parses and runs one invocation; argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a, used for manifest content hashes.
std::uint64_t fnv1a64(std::string_view data);

/// Standalone SVG 1.1 of the triangle (Dirichlet side solid, Neumann sides
/// dashed) with an optional moving domain and its reflection line.
void write_geometry_svg(std::ostream& os, const geometry::TriangleSpec& spec,
                        const geometry::MovingDomain* domain = nullptr,
                        const geometry::MovingLine* line = nullptr);

}  // namespace mixedtri::cli
