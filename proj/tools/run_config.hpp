#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "polylayer/analysis.hpp"

namespace polylayer::cli {

// "60deg", "1.0472rad", "0.5pi rad" is not accepted; the suffix is mandatory.
double parse_angle(const std::string& text);
std::string format_angle(double radians);

struct GeometrySpec {
  std::string kind = "fichera";  // fichera, regular, trihedral
  int n = 3;
  std::vector<double> angles;  // radians: one for regular, three for trihedral

  bool operator==(const GeometrySpec&) const = default;
};

struct RunConfig {
  std::string subcommand;
  GeometrySpec geometry;

  // bent-strip numerics
  double h = 0.1;
  double R = 0;  // 0: automatic
  double R_max = 30;
  int levels = 3;
  int m = 1;  // eigenpairs
  double tolerance = 1e-9;
  std::uint64_t seed = 20240917;

  // voxel numerics
  double voxel_h = 0.1;
  double voxel_R = 6;
  int voxel_levels = 2;
  double voxel_tolerance = 1e-8;

  // per-subcommand parameters
  double theta = kPi / 2;
  std::vector<double> thetas;  // scan-theta; empty: 12 points on [0.3, 3.0]
  std::vector<double> R_list{2, 3, 4, 5, 6};
  std::vector<double> eps;  // empty: logarithmic grid on [1e-3, 1]
  double alpha = 0.26;      // absence
  double alpha_star = 0;    // absence; 0 computes it
  double alpha_tol = 1e-2;
  std::string hardy_case = "random";  // exp, inv, zero, random
  int hardy_samples = 1000;
  double hardy_R0 = 2;
  int weyl_n_min = 2, weyl_n_max = 5;
  std::vector<double> kappa{0, 1};
  double weyl_h = 0.05;

  std::string out_dir;
  std::vector<std::string> formats{"json"};
  bool dumps = false;  // mesh, matrix and active-cell text dumps

  bool operator==(const RunConfig&) const = default;

  // Throws InvalidInput on anything out of range; runs before any computation.
  void validate() const;
  WaveguideNumerics waveguide() const;
  VoxelNumerics voxel() const;
  LayerGeometry layer() const;
  bool wants(const std::string& format) const;
};

const std::vector<std::string>& subcommands();

nlohmann::ordered_json to_json(const RunConfig& c);
// Rejects unknown keys; keys absent from the document keep the values already in `base`.
RunConfig from_json(const nlohmann::json& j, RunConfig base = {});

}  // namespace polylayer::cli
