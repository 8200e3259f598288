#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polylayer/grid3d.hpp"
#include "polylayer/mesh2d.hpp"
#include "polylayer/sparse.hpp"

namespace polylayer {

struct DiscreteProblem {
  SparseSymmetric K;
  SparseSymmetric M;
  // Mesh/grid node -> equation (-1 when eliminated) and back.
  std::vector<int> equation_of_node;
  std::vector<int> node_of_equation;
  std::string source;
  std::uint64_t provenance = 0;

  int dofs() const { return K.n; }
  // Scatter an equation vector to all nodes (eliminated nodes get 0).
  std::vector<double> expand(std::span<const double> x) const;
};

using Mat3 = std::array<std::array<double, 3>, 3>;
using Mat8 = std::array<std::array<double, 8>, 8>;

// P1 element matrices of a triangle; throws on non-positive area.
void p1_element(const Vec2& a, const Vec2& b, const Vec2& c, Mat3& K, Mat3& M);
// Q1 element matrices of an affine cell with reference metric G (row-major) and volume |det J|.
// Local node l has lattice offset (l & 1, (l >> 1) & 1, (l >> 2) & 1).
void q1_element(const std::array<double, 9>& G, double volume, Mat8& K, Mat8& M);

// With eliminate = false all nodes are kept (no boundary conditions applied).
DiscreteProblem assemble_p1(const TriMesh& mesh, bool eliminate = true);
DiscreteProblem assemble_q1(const VoxelGrid& grid, bool eliminate = true);

double rayleigh_quotient(const DiscreteProblem& problem, std::span<const double> v);

std::uint64_t mesh_hash(const TriMesh& mesh);

}  // namespace polylayer
