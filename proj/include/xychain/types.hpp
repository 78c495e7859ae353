#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace xychain {

/// Hamiltonian parameters of the anisotropic XY chain with DM exchange,
/// in units of the external field. Criticality sits at |J| = 1.
struct ChainParams {
  double J = 0.0;
  double gamma = 0.0;
  double D = 0.0;

  friend bool operator==(const ChainParams&, const ChainParams&) = default;
};

/// Tag selecting one of the three chain parameters.
enum class Param : std::size_t { J = 0, gamma = 1, D = 2 };

inline constexpr std::array<Param, 3> kAllParams{Param::J, Param::gamma, Param::D};

std::string_view to_string(Param p);
std::optional<Param> parse_param(std::string_view name);

double get(const ChainParams& p, Param which);
ChainParams with(ChainParams p, Param which, double value);

/// Throws InvalidArgument when gamma leaves [-1, 1] or a field is not finite.
void validate(const ChainParams& p);

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  std::size_t max_subdivisions = 4096;
};

void validate(const QuadratureConfig& q);

}  // namespace xychain
