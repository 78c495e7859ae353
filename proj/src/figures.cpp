#include "xychain/figures.hpp"

#include <cstdio>
#include <fstream>

#include "xychain/error.hpp"

namespace xychain {
namespace {

std::string tag(const char* key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%g", key, value);
  return buf;
}

SweepSpec along_j(double gamma, double D, std::vector<Quantity> qs, const QuadratureConfig& quad) {
  SweepSpec s;
  s.axis = Param::J;
  s.range = {-2.0, 2.0, 401};
  s.fixed = {0.0, gamma, D};
  s.quantities = std::move(qs);
  s.wrt = {Param::J};
  s.quad = quad;
  return s;
}

SweepSpec along_d(double gamma, std::vector<Quantity> qs, const QuadratureConfig& quad) {
  SweepSpec s;
  s.axis = Param::D;
  s.range = {-0.4, 0.4, 161};
  s.fixed = {0.999, gamma, 0.0};
  s.quantities = std::move(qs);
  s.wrt = {};
  s.quad = quad;
  return s;
}

}  // namespace

std::vector<std::string> figure_names() { return {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"}; }

std::vector<std::pair<std::string, SweepSpec>> figure_specs(const std::string& name, const QuadratureConfig& quad) {
  const std::vector<Quantity> fhs{Quantity::F, Quantity::H, Quantity::S};
  const std::vector<double> dm_values{0.0, 0.02, 0.1, 0.2, 0.3};
  std::vector<std::pair<std::string, SweepSpec>> out;
  if (name == "fig1") {
    for (double g : {0.2, 0.5, 0.7, 1.0}) out.emplace_back("fig1_" + tag("gamma", g), along_j(g, 0.0, fhs, quad));
  } else if (name == "fig2" || name == "fig3") {
    const double g = name == "fig2" ? 0.7 : 0.2;
    for (double D : dm_values) out.emplace_back(name + "_" + tag("D", D), along_j(g, D, fhs, quad));
  } else if (name == "fig4") {
    for (double g : {0.2, 0.5, 1.0}) {
      out.emplace_back("fig4_" + tag("gamma", g), along_d(g, {Quantity::QFIM, Quantity::U}, quad));
    }
  } else if (name == "fig5") {
    for (double g : {0.2, 0.5, 1.0}) out.emplace_back("fig5_" + tag("gamma", g), along_d(g, {Quantity::det}, quad));
  } else if (name == "fig6") {
    for (double D : {0.01, 0.1, 0.2, 0.3}) {
      out.emplace_back("fig6_" + tag("D", D), along_j(1.0, D, {Quantity::QFIM, Quantity::U, Quantity::det}, quad));
    }
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown figure '" + name + "' (expected fig1..fig6)");
  }
  return out;
}

FigureBundle figure_bundle(const std::string& name, const QuadratureConfig& quad, unsigned threads) {
  FigureBundle b;
  b.name = name;
  b.manifest["figure"] = name;
  b.manifest["library_version"] = XYCHAIN_VERSION;
  b.manifest["tolerances"] = {{"quadrature_abs", quad.abs_tol},
                              {"quadrature_rel", quad.rel_tol},
                              {"max_subdivisions", quad.max_subdivisions},
                              {"critical_nudge", kCriticalNudge}};
  auto files = nlohmann::ordered_json::array();
  for (auto& [stem, spec] : figure_specs(name, quad)) {
    spec.threads = threads;
    SweepTable t = sweep(spec);
    nlohmann::ordered_json f;
    f["file"] = stem + ".csv";
    f["spec"] = spec_to_json(spec);
    f["columns"] = t.columns;
    f["warnings"] = t.warnings;
    std::size_t failed = 0;
    for (const SweepRow& r : t.rows) failed += r.error.empty() ? 0 : 1;
    f["failed_points"] = failed;
    files.push_back(f);
    b.tables.emplace_back(stem, std::move(t));
  }
  b.manifest["files"] = files;
  return b;
}

std::vector<std::filesystem::path> write_bundle(const FigureBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + p.string());
    os << text;
    written.push_back(p);
  };
  for (const auto& [stem, table] : bundle.tables) write(dir / (stem + ".csv"), to_csv(table));
  write(dir / (bundle.name + "_manifest.json"), bundle.manifest.dump(2) + "\n");
  return written;
}

}  // namespace xychain
