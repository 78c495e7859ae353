#include "xychain/types.hpp"

#include <cmath>
#include <string>

#include "xychain/error.hpp"

namespace xychain {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
      return "InvalidArgument";
    case ErrorKind::QuadratureFailure:
      return "QuadratureFailure";
    case ErrorKind::CriticalPoint:
      return "CriticalPoint";
    case ErrorKind::PositivityViolation:
      return "PositivityViolation";
  }
  return "Unknown";
}

std::string_view to_string(Param p) {
  switch (p) {
    case Param::J:
      return "J";
    case Param::gamma:
      return "gamma";
    case Param::D:
      return "D";
  }
  return "?";
}

std::optional<Param> parse_param(std::string_view name) {
  if (name == "J") return Param::J;
  if (name == "gamma" || name == "g") return Param::gamma;
  if (name == "D") return Param::D;
  return std::nullopt;
}

double get(const ChainParams& p, Param which) {
  switch (which) {
    case Param::J:
      return p.J;
    case Param::gamma:
      return p.gamma;
    case Param::D:
      return p.D;
  }
  return 0.0;
}

ChainParams with(ChainParams p, Param which, double value) {
  switch (which) {
    case Param::J:
      p.J = value;
      break;
    case Param::gamma:
      p.gamma = value;
      break;
    case Param::D:
      p.D = value;
      break;
  }
  return p;
}

void validate(const ChainParams& p) {
  if (!std::isfinite(p.J) || !std::isfinite(p.gamma) || !std::isfinite(p.D)) {
    throw Error(ErrorKind::InvalidArgument, "chain parameters must be finite");
  }
  if (p.gamma < -1.0 || p.gamma > 1.0) {
    throw Error(ErrorKind::InvalidArgument,
                "anisotropy gamma must lie in [-1, 1], got " + std::to_string(p.gamma));
  }
}

void validate(const QuadratureConfig& q) {
  if (!(q.abs_tol > 0.0) || !(q.rel_tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "quadrature tolerances must be strictly positive");
  }
  if (q.max_subdivisions == 0) {
    throw Error(ErrorKind::InvalidArgument, "max_subdivisions must be positive");
  }
}

}  // namespace xychain
