#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xychain/types.hpp"

namespace xychain {

enum class Quantity { F, H, S, QFIM, U, det };

std::string_view to_string(Quantity q);
std::optional<Quantity> parse_quantity(std::string_view name);

struct Range {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t points = 2;

  double at(std::size_t i) const;
};

/// Parses "lo:hi:n" with finite lo < hi and n >= 2; throws InvalidArgument otherwise.
Range parse_range(std::string_view text);

struct SweepSpec {
  Param axis = Param::J;
  Range range{-2.0, 2.0, 401};
  ChainParams fixed{};  // the axis component is ignored
  std::vector<Quantity> quantities{Quantity::F, Quantity::H, Quantity::S};
  std::vector<Param> wrt{Param::J};
  QuadratureConfig quad{};
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Throws InvalidArgument on an unusable spec.
void validate(const SweepSpec& spec);

/// Sweeps never evaluate |J| = 1 exactly; such points move to +-(1 - 1e-3).
inline constexpr double kCriticalNudge = 1e-3;

struct SweepRow {
  ChainParams params{};
  bool nudged = false;
  std::vector<double> values;  // NaN where the point failed
  std::string error;           // empty on success
};

struct SweepTable {
  SweepSpec spec;
  std::vector<std::string> columns;  // value columns, after J, gamma, D
  std::vector<SweepRow> rows;        // ordered by axis index
  std::vector<std::string> warnings;

  /// Index of a value column, or throws InvalidArgument.
  std::size_t column(std::string_view name) const;
  std::vector<double> series(std::string_view name) const;
  std::vector<double> axis_values() const;
};

std::vector<std::string> sweep_columns(const SweepSpec& spec);

SweepTable sweep(const SweepSpec& spec);

/// 17 significant digits, '.' decimal separator, "nan"/"inf" for non-finite.
std::string format_double(double x);

std::string to_csv(const SweepTable& table);
nlohmann::ordered_json to_json(const SweepTable& table);
nlohmann::ordered_json spec_to_json(const SweepSpec& spec);

}  // namespace xychain
