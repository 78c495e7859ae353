#include "xychain/features.hpp"

#include <algorithm>
#include <cmath>

#include "xychain/error.hpp"
#include "xychain/fisher.hpp"
#include "xychain/parallel.hpp"

namespace xychain {
namespace {

constexpr double kInvPhi = 0.6180339887498949;
constexpr double kFlatVariation = 0.01;

bool reaches(CurveShape s, CurveShape target) { return static_cast<int>(s) >= static_cast<int>(target); }

double uniform(double lo, double hi, std::size_t i, std::size_t n) {
  if (i + 1 == n) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

std::string_view to_string(CurveShape s) {
  switch (s) {
    case CurveShape::monotone: return "monotone";
    case CurveShape::bump: return "bump";
    case CurveShape::peak: return "peak";
  }
  return "?";
}

ShapeAnalysis classify_curve(std::span<const double> J, std::span<const double> H) {
  if (J.size() != H.size() || J.size() < 5) {
    throw Error(ErrorKind::InvalidArgument, "a curve needs matching J and H with at least 5 samples");
  }
  const std::size_t n = H.size();
  ShapeAnalysis out;

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (H[i] > H[i - 1] && H[i] > H[i + 1]) {
      out.shape = CurveShape::peak;
      out.peak_at = J[i];
      return out;
    }
  }

  std::vector<double> L(n);
  for (std::size_t i = 0; i < n; ++i) L[i] = std::log(std::max(H[i], 1e-300));
  // d2[k] is centred on sample k + 1.
  std::vector<double> d2(n - 2);
  for (std::size_t k = 0; k + 2 < n; ++k) d2[k] = L[k + 2] - 2.0 * L[k + 1] + L[k];
  std::vector<double> smooth(d2.size());
  for (std::size_t k = 0; k < d2.size(); ++k) {
    const std::size_t a = k == 0 ? 0 : k - 1;
    const std::size_t b = std::min(k + 1, d2.size() - 1);
    double s = 0.0;
    for (std::size_t m = a; m <= b; ++m) s += d2[m];
    smooth[k] = s / static_cast<double>(b - a + 1);
  }

  std::size_t run = 0;
  for (std::size_t k = 0; k < smooth.size(); ++k) {
    run = smooth[k] < 0.0 ? run + 1 : 0;
    if (run == kConcaveRun) {
      std::size_t end = k;
      while (end + 1 < smooth.size() && smooth[end + 1] < 0.0) ++end;
      out.shape = CurveShape::bump;
      out.concave_span = std::make_pair(J[k + 2 - kConcaveRun], J[end + 1]);
      return out;
    }
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> feature_curve(double gamma, double D, std::size_t points,
                                                                  const QuadratureConfig& quad) {
  std::vector<double> J(points);
  std::vector<double> H(points);
  for (std::size_t i = 0; i < points; ++i) J[i] = uniform(kFeatureWindowLo, kFeatureWindowHi, i, points);
  parallel_for(points, [&](std::size_t i) { H[i] = qfi_xstate(ChainParams{J[i], gamma, D}, Param::J, quad).total; });
  return {std::move(J), std::move(H)};
}

CurveFeatures detect_features(double gamma, double D, std::size_t points, const QuadratureConfig& quad) {
  if (points < kMinFeaturePoints) {
    throw Error(ErrorKind::InvalidArgument, "feature detection needs at least 200 points on the window");
  }
  validate(ChainParams{kFeatureWindowLo, gamma, D});
  CurveFeatures out;
  out.gamma = gamma;
  out.D = D;
  out.points = points;
  const auto [J, H] = feature_curve(gamma, D, points, quad);
  out.analysis = classify_curve(J, H);
  const auto [Jf, Hf] = feature_curve(gamma, D, 2 * points - 1, quad);
  out.refined_shape = classify_curve(Jf, Hf).shape;
  out.insufficient_resolution = out.refined_shape != out.analysis.shape;
  return out;
}

Threshold locate_threshold(double gamma, CurveShape target, double D_lo, double D_hi, std::size_t points,
                           double width, const QuadratureConfig& quad) {
  auto reached = [&](double D) {
    const auto [J, H] = feature_curve(gamma, D, points, quad);
    return reaches(classify_curve(J, H).shape, target);
  };
  Threshold t;
  t.lo = D_lo;
  t.hi = D_hi;
  if (reached(D_lo) || !reached(D_hi)) return t;
  while (t.hi - t.lo > width) {
    const double mid = 0.5 * (t.lo + t.hi);
    (reached(mid) ? t.hi : t.lo) = mid;
  }
  t.found = true;
  t.value = 0.5 * (t.lo + t.hi);
  return t;
}

FeatureReport feature_report(double gamma, std::span<const double> Ds, double D_max, std::size_t points,
                             const QuadratureConfig& quad) {
  FeatureReport r;
  r.gamma = gamma;
  for (double D : Ds) r.curves.push_back(detect_features(gamma, D, points, quad));
  r.d_bump = locate_threshold(gamma, CurveShape::bump, 0.0, D_max, points, 1e-3, quad);
  r.d_peak = locate_threshold(gamma, CurveShape::peak, 0.0, D_max, points, 1e-3, quad);
  return r;
}

double integrated_qfi(double gamma, double D, std::size_t j_points, const QuadratureConfig& quad) {
  if (j_points < 2) throw Error(ErrorKind::InvalidArgument, "the integration grid needs at least 2 points");
  std::vector<double> H(j_points);
  parallel_for(j_points, [&](std::size_t i) {
    const double J = uniform(kLossWindowLo, kLossWindowHi, i, j_points);
    H[i] = qfi_xstate(ChainParams{J, gamma, D}, Param::J, quad).total;
  });
  const double h = (kLossWindowHi - kLossWindowLo) / static_cast<double>(j_points - 1);
  double sum = 0.5 * (H.front() + H.back());
  for (std::size_t i = 1; i + 1 < j_points; ++i) sum += H[i];
  return sum * h;
}

DLossReport detect_d_loss(double gamma, double D_lo, double D_hi, std::size_t d_points, std::size_t j_points,
                          const QuadratureConfig& quad) {
  if (d_points < 3 || !(D_lo < D_hi)) {
    throw Error(ErrorKind::InvalidArgument, "the D grid needs lo < hi and at least 3 points");
  }
  DLossReport r;
  r.gamma = gamma;
  for (std::size_t k = 0; k < d_points; ++k) {
    r.D.push_back(uniform(D_lo, D_hi, k, d_points));
    r.integral.push_back(integrated_qfi(gamma, r.D.back(), j_points, quad));
  }
  const auto [mn, mx] = std::minmax_element(r.integral.begin(), r.integral.end());
  r.variation = *mx > 0.0 ? (*mx - *mn) / *mx : 0.0;
  r.flat_profile = r.variation < kFlatVariation;

  const std::size_t best = static_cast<std::size_t>(mx - r.integral.begin());
  r.lo = r.D[best == 0 ? 0 : best - 1];
  r.hi = r.D[std::min(best + 1, d_points - 1)];

  auto f = [&](double D) { return integrated_qfi(gamma, D, j_points, quad); };
  double a = r.lo;
  double b = r.hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > 1e-4) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  const double refined = 0.5 * (a + b);
  r.d_loss = f(refined) >= r.integral[best] ? refined : r.D[best];
  return r;
}

nlohmann::ordered_json to_json(const FeatureReport& report) {
  auto threshold = [](const Threshold& t) {
    nlohmann::ordered_json j;
    j["found"] = t.found;
    if (t.found) j["value"] = t.value;
    j["bracket"] = {t.lo, t.hi};
    return j;
  };
  nlohmann::ordered_json j;
  j["gamma"] = report.gamma;
  j["window"] = {kFeatureWindowLo, kFeatureWindowHi};
  auto curves = nlohmann::ordered_json::array();
  for (const CurveFeatures& c : report.curves) {
    nlohmann::ordered_json cj;
    cj["D"] = c.D;
    cj["points"] = c.points;
    cj["shape"] = std::string(to_string(c.analysis.shape));
    cj["refined_shape"] = std::string(to_string(c.refined_shape));
    cj["insufficient_resolution"] = c.insufficient_resolution;
    if (c.analysis.peak_at) cj["peak_at"] = *c.analysis.peak_at;
    if (c.analysis.concave_span) cj["concave_span"] = {c.analysis.concave_span->first, c.analysis.concave_span->second};
    curves.push_back(cj);
  }
  j["curves"] = curves;
  j["D_bump"] = threshold(report.d_bump);
  j["D_peak"] = threshold(report.d_peak);
  return j;
}

nlohmann::ordered_json to_json(const DLossReport& report) {
  nlohmann::ordered_json j;
  j["gamma"] = report.gamma;
  j["window"] = {kLossWindowLo, kLossWindowHi};
  j["D_loss"] = report.d_loss;
  j["bracket"] = {report.lo, report.hi};
  j["variation"] = report.variation;
  j["flat_profile"] = report.flat_profile;
  j["profile"] = {{"D", report.D}, {"integral", report.integral}};
  return j;
}

}  // namespace xychain
