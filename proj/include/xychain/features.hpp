#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "xychain/types.hpp"

namespace xychain {

/// Shape of H(J) on the window left of J = 0 and right of the J = -1 divergence.
enum class CurveShape { monotone = 0, bump = 1, peak = 2 };

std::string_view to_string(CurveShape s);

inline constexpr double kFeatureWindowLo = -0.99;
inline constexpr double kFeatureWindowHi = -0.01;
inline constexpr std::size_t kMinFeaturePoints = 200;
/// Consecutive negative smoothed second differences of ln H that make a shoulder.
inline constexpr std::size_t kConcaveRun = 3;

struct ShapeAnalysis {
  CurveShape shape = CurveShape::monotone;
  std::optional<double> peak_at;                          // J of the interior maximum
  std::optional<std::pair<double, double>> concave_span;  // J extent of the first concave run of ln H
};

/// Classifies sampled (J, H) data. "peak": an interior strict local maximum of
/// H. "bump": no such maximum but ln H has a concave run, i.e. its curvature
/// turns negative and back against the convex divergence at the left end.
/// Curvature is the second difference of ln H smoothed by a 3-point average.
ShapeAnalysis classify_curve(std::span<const double> J, std::span<const double> H);

/// H_J sampled uniformly on [kFeatureWindowLo, kFeatureWindowHi].
std::pair<std::vector<double>, std::vector<double>> feature_curve(double gamma, double D, std::size_t points,
                                                                  const QuadratureConfig& quad = {});

struct CurveFeatures {
  double gamma = 0.0;
  double D = 0.0;
  std::size_t points = 0;
  ShapeAnalysis analysis;
  CurveShape refined_shape = CurveShape::monotone;  // at 2 * points - 1
  bool insufficient_resolution = false;             // shapes disagree under refinement
};

/// Throws InvalidArgument when points < kMinFeaturePoints.
CurveFeatures detect_features(double gamma, double D, std::size_t points = kMinFeaturePoints,
                              const QuadratureConfig& quad = {});

struct Threshold {
  bool found = false;
  double value = 0.0;  // bracket midpoint
  double lo = 0.0;     // shape below target
  double hi = 0.0;     // shape at or beyond target
};

/// Smallest D in [D_lo, D_hi] whose curve reaches `target` (bump counts a
/// peak as reached), bracketed by bisection to `width`. Not found when the
/// endpoints do not straddle the boundary.
Threshold locate_threshold(double gamma, CurveShape target, double D_lo, double D_hi,
                           std::size_t points = kMinFeaturePoints, double width = 1e-3,
                           const QuadratureConfig& quad = {});

struct FeatureReport {
  double gamma = 0.0;
  std::vector<CurveFeatures> curves;
  Threshold d_bump;
  Threshold d_peak;
};

FeatureReport feature_report(double gamma, std::span<const double> Ds, double D_max,
                             std::size_t points = kMinFeaturePoints, const QuadratureConfig& quad = {});

inline constexpr double kLossWindowLo = 1.2;
inline constexpr double kLossWindowHi = 2.0;

struct DLossReport {
  double gamma = 0.0;
  double d_loss = 0.0;  // golden-section refined argmax
  double lo = 0.0;      // bracketing grid neighbours of the discrete argmax
  double hi = 0.0;
  std::vector<double> D;
  std::vector<double> integral;  // trapezoid integral of H_J over [1.2, 2]
  double variation = 0.0;        // (max - min) / max over the D grid
  bool flat_profile = false;     // variation below 1%
};

/// Trapezoid integral of H_J(J) over [kLossWindowLo, kLossWindowHi].
double integrated_qfi(double gamma, double D, std::size_t j_points, const QuadratureConfig& quad = {});

DLossReport detect_d_loss(double gamma, double D_lo, double D_hi, std::size_t d_points = 13,
                          std::size_t j_points = 161, const QuadratureConfig& quad = {});

nlohmann::ordered_json to_json(const FeatureReport& report);
nlohmann::ordered_json to_json(const DLossReport& report);

}  // namespace xychain
