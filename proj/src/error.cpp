#include "mixedtri/error.hpp"

namespace mixedtri {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::AngleDomain: return "AngleDomain";
    case ErrorKind::ParamDomain: return "ParamDomain";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::NonPositive: return "NonPositive";
    case ErrorKind::DegenerateCell: return "DegenerateCell";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NegativeBranch: return "NegativeBranch";
    case ErrorKind::OutsideDomain: return "OutsideDomain";
    case ErrorKind::EmptyDomain: return "EmptyDomain";
    case ErrorKind::AsymmetricMesh: return "AsymmetricMesh";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::ParallelLines: return "ParallelLines";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Usage: return "Usage";
  }
  return "Unknown";
}

}  // namespace mixedtri
