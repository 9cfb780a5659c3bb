#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixedtri {

enum class ErrorKind {
  AngleDomain,
  ParamDomain,
  Singular,
  NonPositive,
  DegenerateCell,
  NoConvergence,
  NegativeBranch,
  OutsideDomain,
  EmptyDomain,
  AsymmetricMesh,
  IllConditioned,
  TooLarge,
  ParallelLines,
  Io,
  Usage,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. The kind is stable and is what
/// callers (CLI exit codes, sweep error columns, tests) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mixedtri
