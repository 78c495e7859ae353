#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "xychain/sweep.hpp"

namespace xychain {

/// fig1: F, H, S along J at D = 0, one file per gamma in {0.2, 0.5, 0.7, 1}.
/// fig2, fig3: F, H, S along J at gamma = 0.7 and 0.2, one file per D in
///   {0, 0.02, 0.1, 0.2, 0.3}.
/// fig4: QFIM and Uhlmann magnitudes along D in [-0.4, 0.4] at J = 0.999,
///   one file per gamma in {0.2, 0.5, 1}.
/// fig5: QFIM determinant on the fig4 grid.
/// fig6: QFIM, Uhlmann magnitudes and determinant along J at gamma = 1,
///   one file per D in {0.01, 0.1, 0.2, 0.3}.
std::vector<std::string> figure_names();

/// (file stem, spec) pairs making up one figure.
std::vector<std::pair<std::string, SweepSpec>> figure_specs(const std::string& name, const QuadratureConfig& quad = {});

struct FigureBundle {
  std::string name;
  std::vector<std::pair<std::string, SweepTable>> tables;  // file stem -> table
  nlohmann::ordered_json manifest;
};

/// Throws InvalidArgument for an unknown figure name.
FigureBundle figure_bundle(const std::string& name, const QuadratureConfig& quad = {}, unsigned threads = 0);

/// Writes <stem>.csv for each table and <name>_manifest.json into dir;
/// returns the paths written.
std::vector<std::filesystem::path> write_bundle(const FigureBundle& bundle, const std::filesystem::path& dir);

}  // namespace xychain
