#pragma once

#include <stdexcept>
#include <string>

namespace xychain {

enum class ErrorKind {
  InvalidArgument,
  QuadratureFailure,
  CriticalPoint,
  PositivityViolation,
};

const char* to_string(ErrorKind kind);

/// Hard failures. Soft conditions (divergent information, degenerate blocks,
/// flat likelihoods, ...) are reported through flags on the result types.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace xychain
