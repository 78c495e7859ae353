#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "xychain/error.hpp"
#include "xychain/features.hpp"
#include "xychain/figures.hpp"
#include "xychain/sweep.hpp"

using namespace xychain;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("range parsing") {
  const Range r = parse_range("-2:2:5");
  CHECK(r.lo == -2.0);
  CHECK(r.hi == 2.0);
  CHECK(r.points == 5);
  CHECK(r.at(0) == -2.0);
  CHECK(r.at(4) == 2.0);
  CHECK(r.at(2) == 0.0);
  for (const char* bad : {"", "1:2", "1:2:1", "a:2:3", "2:1:3", "0:1:3:4", "0:1:x", "0:inf:3"}) {
    INFO(bad);
    CHECK_THROWS_AS(parse_range(bad), Error);
  }
  CHECK(parse_quantity("QFIM") == Quantity::QFIM);
  CHECK_FALSE(parse_quantity("qfim2").has_value());
}

TEST_CASE("sweep output is ordered, even in J at D = 0 and thread-independent") {
  SweepSpec spec;
  spec.range = Range{-2.0, 2.0, 41};
  spec.fixed = {0.0, 0.5, 0.0};
  spec.quantities = {Quantity::F, Quantity::H, Quantity::S};
  spec.threads = 1;
  const SweepTable one = sweep(spec);
  spec.threads = 4;
  const SweepTable four = sweep(spec);
  CHECK(to_csv(one) == to_csv(four));

  REQUIRE(one.rows.size() == 41);
  const std::vector<double> J = one.axis_values();
  const std::vector<double> H = one.series("H_J");
  for (std::size_t i = 0; i < 41; ++i) {
    if (!one.rows[i].nudged) CHECK(J[i] == doctest::Approx(spec.range.at(i)));
    CHECK(H[i] == doctest::Approx(H[40 - i]).epsilon(1e-8));
  }
  // -2 + 0.1 * 10 and its mirror hit |J| = 1 and are nudged.
  CHECK(one.rows[10].nudged);
  CHECK(one.rows[30].nudged);
  CHECK(std::abs(one.rows[10].params.J) == doctest::Approx(1.0 - kCriticalNudge));
  CHECK_FALSE(one.warnings.empty());
  CHECK_THROWS_AS(one.column("nope"), Error);
}

TEST_CASE("CSV format") {
  SweepSpec spec;
  spec.axis = Param::D;
  spec.range = Range{0.0, 0.2, 3};
  spec.fixed = {0.5, 0.7, 0.0};
  spec.quantities = {Quantity::H, Quantity::det};
  spec.wrt = {Param::J, Param::D};
  const std::string csv = to_csv(sweep(spec));
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "J,gamma,D,H_J,H_D,det,det_relative,eig_ratio,nudged,error");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == std::count(header.begin(), header.end(), ','));
    CHECK(line.find(';') == std::string::npos);
  }
  CHECK(rows == 3);
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(NAN) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("per-point failures become NaN rows") {
  SweepSpec spec;
  spec.range = Range{0.5, 0.9, 2};
  spec.fixed = {0.0, 0.5, 0.0};
  spec.quantities = {Quantity::H};
  spec.quad = QuadratureConfig{1e-15, 1e-15, 1};
  const SweepTable t = sweep(spec);
  REQUIRE(t.rows.size() == 2);
  for (const SweepRow& r : t.rows) {
    CHECK_FALSE(r.error.empty());
    CHECK(r.error.find(',') == std::string::npos);
    CHECK(std::isnan(r.values[0]));
  }
  const nlohmann::ordered_json j = to_json(t);
  CHECK(j.dump().find("NaN") == std::string::npos);
}

TEST_CASE("curve classification on synthetic data") {
  std::vector<double> J, mono, peak, bump;
  for (int i = 0; i < 300; ++i) {
    const double x = -0.99 + 0.98 * i / 299.0;
    J.push_back(x);
    const double div = 1.0 / (x + 1.0);  // divergence at the left end
    mono.push_back(div);
    peak.push_back(div + 40.0 * std::exp(-std::pow((x + 0.5) / 0.05, 2)));
    bump.push_back(div + 0.2 * std::exp(-std::pow((x + 0.5) / 0.08, 2)));
  }
  CHECK(classify_curve(J, mono).shape == CurveShape::monotone);
  const ShapeAnalysis p = classify_curve(J, peak);
  CHECK(p.shape == CurveShape::peak);
  REQUIRE(p.peak_at.has_value());
  CHECK(*p.peak_at == doctest::Approx(-0.5).epsilon(0.02));
  const ShapeAnalysis b = classify_curve(J, bump);
  CHECK(b.shape == CurveShape::bump);
  REQUIRE(b.concave_span.has_value());
  CHECK(b.concave_span->first < -0.5);
  CHECK(b.concave_span->second > -0.6);
}

TEST_CASE("physical curve shapes and thresholds") {
  CHECK(detect_features(0.2, 0.0).analysis.shape == CurveShape::monotone);
  CHECK(detect_features(0.2, 0.1).analysis.shape == CurveShape::bump);
  CHECK(detect_features(0.2, 0.3).analysis.shape == CurveShape::peak);
  CHECK(detect_features(0.7, 0.0).analysis.shape == CurveShape::monotone);
  const CurveFeatures late = detect_features(0.7, 0.3);
  CHECK(late.analysis.shape == CurveShape::bump);
  CHECK_FALSE(late.insufficient_resolution);
  CHECK_THROWS_AS(detect_features(0.7, 0.3, 50), Error);

  const Threshold bump = locate_threshold(0.2, CurveShape::bump, 0.0, 0.3, kMinFeaturePoints, 5e-3);
  const Threshold peak = locate_threshold(0.2, CurveShape::peak, 0.0, 0.3, kMinFeaturePoints, 5e-3);
  REQUIRE(bump.found);
  REQUIRE(peak.found);
  CHECK(bump.hi - bump.lo <= 5e-3);
  CHECK(bump.value <= peak.value);
  // Larger anisotropy pushes the bump to larger D.
  const Threshold bump7 = locate_threshold(0.7, CurveShape::bump, 0.0, 0.3, kMinFeaturePoints, 5e-3);
  REQUIRE(bump7.found);
  CHECK(bump7.value > bump.value);
  CHECK_FALSE(locate_threshold(0.7, CurveShape::peak, 0.0, 0.3, kMinFeaturePoints, 5e-3).found);
}

TEST_CASE("D_loss profile") {
  const DLossReport r = detect_d_loss(0.7, 0.0, 0.4, 9, 81);
  CHECK(r.D.size() == 9);
  CHECK(r.integral.size() == 9);
  CHECK(r.lo <= r.d_loss);
  CHECK(r.d_loss <= r.hi);
  CHECK(r.variation >= 0.0);
  CHECK(r.flat_profile == (r.variation < 0.01));
  // The trapezoid integral converges under J refinement.
  CHECK(integrated_qfi(0.7, 0.1, 161) == doctest::Approx(integrated_qfi(0.7, 0.1, 321)).epsilon(1e-3));
  const nlohmann::ordered_json j = to_json(r);
  CHECK(j.contains("D_loss"));
}

TEST_CASE("figure bundles are deterministic") {
  CHECK(figure_names().size() == 6);
  CHECK_THROWS_AS(figure_bundle("fig9"), Error);

  const FigureBundle a = figure_bundle("fig5", {}, 1);
  const FigureBundle b = figure_bundle("fig5", {}, 4);
  CHECK(a.manifest.dump() == b.manifest.dump());
  REQUIRE(a.tables.size() == 3);
  for (std::size_t i = 0; i < a.tables.size(); ++i) {
    CHECK(a.tables[i].first == b.tables[i].first);
    CHECK(to_csv(a.tables[i].second) == to_csv(b.tables[i].second));
  }

  const auto dir = std::filesystem::temp_directory_path() / "xychain_test_reports";
  std::filesystem::remove_all(dir);
  const auto first = write_bundle(a, dir / "one");
  const auto second = write_bundle(b, dir / "two");
  REQUIRE(first.size() == 4);
  REQUIRE(second.size() == first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].filename() == second[i].filename());
    CHECK(slurp(first[i]) == slurp(second[i]));
  }
  const nlohmann::json m = nlohmann::json::parse(slurp(dir / "one" / "fig5_manifest.json"));
  CHECK(m["figure"] == "fig5");
  CHECK(m.contains("files"));
  std::filesystem::remove_all(dir);
}
