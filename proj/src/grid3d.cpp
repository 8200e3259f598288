#include "polylayer/grid3d.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "polylayer/errors.hpp"

namespace polylayer {

namespace {

constexpr double kTol = 1e-10;

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

}  // namespace

std::array<int, 3> VoxelGrid::box_index(std::int64_t linear) const {
  int i = static_cast<int>(linear % dims[0]);
  std::int64_t rest = linear / dims[0];
  int j = static_cast<int>(rest % dims[1]);
  int k = static_cast<int>(rest / dims[1]);
  return {i, j, k};
}

Vec3 VoxelGrid::position(const std::array<int, 3>& p) const {
  Vec3 x{};
  for (int r = 0; r < 3; ++r)
    x[r] = h * (frame[3 * r] * p[0] + frame[3 * r + 1] * p[1] + frame[3 * r + 2] * p[2]);
  return x;
}

Vec3 VoxelGrid::node_position(int node) const {
  auto b = box_index(box_of_node[node]);
  return position({b[0] + lo[0], b[1] + lo[1], b[2] + lo[2]});
}

std::array<double, 9> VoxelGrid::metric() const {
  Eigen::Matrix3d L;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) L(r, c) = frame[3 * r + c];
  Eigen::Matrix3d Li = L.inverse();
  Eigen::Matrix3d G = Li * Li.transpose() / (h * h);
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[3 * r + c] = G(r, c);
  return out;
}

CellStatus CellClassifier::classify(int i, int j, int k) const {
  const int p[3] = {lo[0] + i, lo[1] + j, lo[2] + k};
  bool inside = true, separated = false, truncated = false;
  for (const Vec3& nv : normals) {
    // Range of n.x over the 8 corners of the cell.
    double step[3];
    for (int d = 0; d < 3; ++d) step[d] = h * (nv[0] * frame[d] + nv[1] * frame[3 + d] + nv[2] * frame[6 + d]);
    double mn = step[0] * p[0] + step[1] * p[1] + step[2] * p[2];
    double mx = mn;
    for (double s : step) (s < 0 ? mn : mx) += s;
    if (mn < -kTol) inside = false;
    if (mx <= 1 + kTol) separated = true;
    if (mx > R + kTol) truncated = true;
  }
  if (!inside) return cell_outside_cone;
  if (!separated) return cell_hits_inner;
  if (truncated) return cell_truncated;
  return cell_active;
}

std::vector<std::uint8_t> classify_cells_serial(const CellClassifier& c) {
  const std::int64_t nx = c.cells[0], ny = c.cells[1], nz = c.cells[2];
  std::vector<std::uint8_t> out(nx * ny * nz);
  for (std::int64_t k = 0; k < nz; ++k)
    for (std::int64_t j = 0; j < ny; ++j)
      for (std::int64_t i = 0; i < nx; ++i) out[i + nx * (j + ny * k)] = c.classify(i, j, k);
  return out;
}

std::vector<std::uint8_t> classify_cells_omp(const CellClassifier& c) {
  const std::int64_t nx = c.cells[0], ny = c.cells[1], nz = c.cells[2];
  std::vector<std::uint8_t> out(nx * ny * nz);
#pragma omp parallel for schedule(static) collapse(2)
  for (std::int64_t k = 0; k < nz; ++k)
    for (std::int64_t j = 0; j < ny; ++j)
      for (std::int64_t i = 0; i < nx; ++i) out[i + nx * (j + ny * k)] = c.classify(i, j, k);
  return out;
}

VoxelGrid voxelize(const LayerGeometry& layer, double R, double h, CutCondition cut_bc, Lattice lattice) {
  if (!(h > 0 && h <= 1.0 / 3 + 1e-12)) throw InvalidInput("voxel size h must lie in (0, 1/3]");
  if (!(R >= 3)) throw InvalidInput("truncation R must be at least 3");
  const auto& ang = layer.angle();
  const int n = ang.faces();
  if (lattice == Lattice::automatic) lattice = n == 3 ? Lattice::face_aligned : Lattice::cartesian;
  if (lattice == Lattice::face_aligned && n != 3) throw InvalidInput("face-aligned lattice needs a trihedral angle");

  VoxelGrid g;
  g.h = h;
  g.R = R;
  g.cut_bc = cut_bc;
  g.lattice = lattice;

  Eigen::Matrix3d N3;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) N3(r, c) = ang.normals[r][c];
  Eigen::Matrix3d L = Eigen::Matrix3d::Identity();
  if (lattice == Lattice::face_aligned) L = N3.inverse();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) g.frame[3 * r + c] = L(r, c);
  g.cell_volume = std::abs(L.determinant()) * h * h * h;

  // Bounding box of {0 <= n_i.x <= R, i < 3} in lattice coordinates.
  Eigen::Matrix3d Linv = L.inverse();
  Eigen::Matrix3d Ninv = N3.inverse();
  Eigen::Vector3d pmin = Eigen::Vector3d::Constant(1e300), pmax = Eigen::Vector3d::Constant(-1e300);
  for (int corner = 0; corner < 8; ++corner) {
    Eigen::Vector3d xi((corner & 1) ? R : 0, (corner & 2) ? R : 0, (corner & 4) ? R : 0);
    Eigen::Vector3d p = Linv * (Ninv * xi) / h;
    pmin = pmin.cwiseMin(p);
    pmax = pmax.cwiseMax(p);
  }
  for (int d = 0; d < 3; ++d) {
    g.lo[d] = static_cast<int>(std::floor(pmin[d] + 1e-9)) - 1;
    int hi = static_cast<int>(std::ceil(pmax[d] - 1e-9)) + 1;
    g.dims[d] = hi - g.lo[d] + 1;
  }

  CellClassifier cls;
  cls.normals = ang.normals;
  cls.R = R;
  cls.h = h;
  cls.frame = g.frame;
  cls.lo = g.lo;
  cls.cells = {g.dims[0] - 1, g.dims[1] - 1, g.dims[2] - 1};
  if (lattice == Lattice::face_aligned) {
    // Exact projections: n_i . x = h * p_i on this lattice.
    cls.normals = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    cls.frame = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  }
  std::vector<std::uint8_t> status = classify_cells_omp(cls);

  const std::int64_t cx = cls.cells[0], cy = cls.cells[1], cz = cls.cells[2];
  auto cell_status = [&](std::int64_t i, std::int64_t j, std::int64_t k) -> std::uint8_t {
    if (i < 0 || j < 0 || k < 0 || i >= cx || j >= cy || k >= cz) return cell_outside_cone;
    return status[i + cx * (j + cy * k)];
  };
  for (std::int64_t k = 0; k < cz; ++k)
    for (std::int64_t j = 0; j < cy; ++j)
      for (std::int64_t i = 0; i < cx; ++i)
        if (status[i + cx * (j + cy * k)] == cell_active) g.active_cells.push_back(g.box_linear(i, j, k));
  if (g.active_cells.empty()) throw InvalidInput("voxelization produced no active cells");

  const std::int64_t total_nodes = static_cast<std::int64_t>(g.dims[0]) * g.dims[1] * g.dims[2];
  g.node_of_box.assign(total_nodes, -1);
  for (std::int64_t k = 0; k < g.dims[2]; ++k)
    for (std::int64_t j = 0; j < g.dims[1]; ++j)
      for (std::int64_t i = 0; i < g.dims[0]; ++i) {
        bool any_active = false, all_active = true, only_truncation = true;
        for (int c = 0; c < 8; ++c) {
          std::uint8_t s = cell_status(i - 1 + (c & 1), j - 1 + ((c >> 1) & 1), k - 1 + ((c >> 2) & 1));
          if (s == cell_active) {
            any_active = true;
          } else {
            all_active = false;
            if (s != cell_truncated) only_truncation = false;
          }
        }
        if (!any_active) continue;
        std::int64_t lin = g.box_linear(i, j, k);
        g.node_of_box[lin] = static_cast<int>(g.box_of_node.size());
        g.box_of_node.push_back(lin);
        bool free = all_active || (cut_bc == CutCondition::neumann && only_truncation);
        g.dirichlet.push_back(free ? 0 : 1);
      }
  return g;
}

double volume(const VoxelGrid& grid) { return grid.volume(); }

std::uint64_t grid_hash(const VoxelGrid& g) {
  std::uint64_t h = 1469598103934665603ULL;
  fnv(h, &g.h, sizeof g.h);
  fnv(h, &g.R, sizeof g.R);
  int bc = static_cast<int>(g.cut_bc), lat = static_cast<int>(g.lattice);
  fnv(h, &bc, sizeof bc);
  fnv(h, &lat, sizeof lat);
  fnv(h, g.frame.data(), sizeof(double) * 9);
  fnv(h, g.lo.data(), sizeof(int) * 3);
  fnv(h, g.dims.data(), sizeof(int) * 3);
  fnv(h, g.active_cells.data(), sizeof(std::int64_t) * g.active_cells.size());
  fnv(h, g.dirichlet.data(), g.dirichlet.size());
  return h;
}

}  // namespace polylayer
