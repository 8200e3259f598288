#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "polylayer/analysis.hpp"
#include "polylayer/assembly.hpp"
#include "polylayer/grid3d.hpp"

namespace polylayer {

using Json = nlohmann::ordered_json;

Json to_json(const PolyhedralAngle& angle);
Json to_json(const LayerGeometry& layer);
Json to_json(const ThresholdResult& r);
Json to_json(const SolverAudit& a);
Json to_json(const ScanRecord& r);
Json to_json(const ThetaScan& s);
Json to_json(const TruncationScan& s);
Json to_json(const CountResult& c);
Json to_json(const AlphaStar& a);
Json to_json(const Certificate& c);
Json to_json(const HardyReport& r);
Json to_json(const WeylResult& r);
Json to_json(const EigenResult& r);
Json grid_summary(const VoxelGrid& grid);

std::string hex64(std::uint64_t v);

// CSV tables, one row per scan point or certificate term.
std::string theta_scan_csv(const ThetaScan& s);
std::string truncation_scan_csv(const TruncationScan& s);
std::string veps_csv(const Certificate& c);
std::string levels_csv(const Certificate& c);

struct Series {
  std::string label;
  std::vector<double> x, y;
};
std::string svg_plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, bool log_y = false);

// Plain (ASCII) PGM of |u| sampled on a pixel grid over the mesh bounding box.
std::string pgm_heatmap(const TriMesh& mesh, const std::vector<double>& values, int width);

// Text dumps: mesh tables, coordinate-format matrix, run-length active cells.
std::string mesh_dump(const TriMesh& mesh);
std::string matrix_dump(const SparseSymmetric& A);
std::string active_cells_rle(const VoxelGrid& grid);

// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace polylayer
