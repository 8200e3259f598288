#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "polylayer/geometry.hpp"

namespace polylayer {

enum class CutCondition { dirichlet, neumann };

// face_aligned: node coordinates xi = n_i . x on a cubic lattice (trihedral angles only),
// so the layer boundary coincides with lattice planes.
// cartesian: nodes on h * Z^3 in world coordinates.
enum class Lattice { automatic, face_aligned, cartesian };

// Why a lattice cell was rejected; 0 means active.
enum CellStatus : std::uint8_t { cell_active = 0, cell_outside_cone = 1, cell_hits_inner = 2, cell_truncated = 3 };

struct VoxelGrid {
  double h = 0;
  double R = 0;
  CutCondition cut_bc = CutCondition::dirichlet;
  Lattice lattice = Lattice::cartesian;
  // World position of lattice index p: h * frame * p (frame row-major 3x3).
  std::array<double, 9> frame{1, 0, 0, 0, 1, 0, 0, 0, 1};
  double cell_volume = 0;
  // Node box: indices lo + (i, j, k) with 0 <= i < dims[0] etc.
  std::array<int, 3> lo{};
  std::array<int, 3> dims{};
  // Cells are addressed by their lower corner node in the box.
  std::vector<std::int64_t> active_cells;
  // Box node -> grid node number, -1 when the node touches no active cell.
  std::vector<int> node_of_box;
  std::vector<std::int64_t> box_of_node;
  std::vector<char> dirichlet;

  std::size_t node_count() const { return box_of_node.size(); }
  double volume() const { return cell_volume * static_cast<double>(active_cells.size()); }
  std::array<int, 3> box_index(std::int64_t linear) const;
  std::int64_t box_linear(int i, int j, int k) const {
    return i + static_cast<std::int64_t>(dims[0]) * (j + static_cast<std::int64_t>(dims[1]) * k);
  }
  Vec3 position(const std::array<int, 3>& lattice_index) const;
  Vec3 node_position(int node) const;
  // Metric N N^T / h^2 of the reference cube (identity / h^2 for cartesian).
  std::array<double, 9> metric() const;
};

VoxelGrid voxelize(const LayerGeometry& layer, double R, double h, CutCondition cut_bc,
                   Lattice lattice = Lattice::automatic);
double volume(const VoxelGrid& grid);

// Per-cell classification of a box of cells; serial reference and OpenMP version.
struct CellClassifier {
  std::vector<Vec3> normals;
  double R = 0;
  double h = 0;
  std::array<double, 9> frame{};
  std::array<int, 3> lo{};
  std::array<int, 3> cells{};  // cell box extents
  CellStatus classify(int i, int j, int k) const;
};
std::vector<std::uint8_t> classify_cells_serial(const CellClassifier& c);
std::vector<std::uint8_t> classify_cells_omp(const CellClassifier& c);

std::uint64_t grid_hash(const VoxelGrid& grid);

}  // namespace polylayer
