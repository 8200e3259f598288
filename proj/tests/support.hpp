#pragma once

#include "polylayer/grid3d.hpp"

namespace polylayer::testing {

// Unit cube on a cartesian lattice with n cells per side, Dirichlet on the whole boundary.
inline VoxelGrid unit_cube(int n) {
  VoxelGrid g;
  g.h = 1.0 / n;
  g.lattice = Lattice::cartesian;
  g.cell_volume = g.h * g.h * g.h;
  g.dims = {n + 1, n + 1, n + 1};
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) g.active_cells.push_back(g.box_linear(i, j, k));
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        g.node_of_box.push_back(static_cast<int>(g.box_of_node.size()));
        g.box_of_node.push_back(g.box_linear(i, j, k));
        bool wall = i == 0 || j == 0 || k == 0 || i == n || j == n || k == n;
        g.dirichlet.push_back(wall ? 1 : 0);
      }
  return g;
}

}  // namespace polylayer::testing
