#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "polylayer/analysis.hpp"
#include "polylayer/assembly.hpp"
#include "polylayer/errors.hpp"

using namespace polylayer;
using doctest::Approx;

namespace {

constexpr std::array<EdgeTag, 4> kAllDirichlet{EdgeTag::dirichlet, EdgeTag::dirichlet, EdgeTag::dirichlet,
                                               EdgeTag::dirichlet};

std::vector<double> times(const SparseSymmetric& A, const std::vector<double>& x) {
  std::vector<double> y(A.n);
  A.multiply(x, y);
  return y;
}

double total(const SparseSymmetric& A) { return std::accumulate(A.val.begin(), A.val.end(), 0.0); }

}  // namespace

TEST_SUITE("assembly") {

TEST_CASE("P1 element matrices of the unit right triangle") {
  Mat3 K, M;
  p1_element({0, 0}, {1, 0}, {0, 1}, K, M);
  const double Kref[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(K[i][j] == Approx(Kref[i][j]).epsilon(1e-14));
      CHECK(M[i][j] == Approx(i == j ? 2.0 / 24 : 1.0 / 24).epsilon(1e-14));
    }
  CHECK_THROWS_AS(p1_element({0, 0}, {0, 1}, {1, 0}, K, M), InvalidInput);
  CHECK_THROWS_AS(p1_element({0, 0}, {1, 1}, {2, 2}, K, M), InvalidInput);
}

TEST_CASE("Q1 element matrices of the unit cube") {
  Mat8 K, M;
  q1_element({1, 0, 0, 0, 1, 0, 0, 0, 1}, 1.0, K, M);
  const double kref[4] = {4.0 / 12, 0, -1.0 / 12, -1.0 / 12};
  const double mref[4] = {8.0 / 216, 4.0 / 216, 2.0 / 216, 1.0 / 216};
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      int d = std::popcount(static_cast<unsigned>(i ^ j));
      CHECK(K[i][j] == Approx(kref[d]).epsilon(1e-13).scale(1));
      CHECK(M[i][j] == Approx(mref[d]).epsilon(1e-13));
    }
}

TEST_CASE("Q1 element on a scaled sheared cell keeps row sums and mass") {
  // Cell spanned by h L with L = [[1, .3, 0], [0, 1, .2], [0, 0, 1]], h = 0.5.
  const double h = 0.5;
  Eigen::Matrix3d L;
  L << 1, 0.3, 0, 0, 1, 0.2, 0, 0, 1;
  Eigen::Matrix3d Li = L.inverse();
  Eigen::Matrix3d G = Li * Li.transpose() / (h * h);
  std::array<double, 9> g{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) g[3 * r + c] = G(r, c);
  const double vol = h * h * h * L.determinant();
  Mat8 K, M;
  q1_element(g, vol, K, M);
  double msum = 0;
  for (int i = 0; i < 8; ++i) {
    double ksum = 0;
    for (int j = 0; j < 8; ++j) {
      ksum += K[i][j];
      msum += M[i][j];
      CHECK(K[i][j] == Approx(K[j][i]).epsilon(1e-14));
    }
    CHECK(std::abs(ksum) < 1e-13);
  }
  CHECK(msum == Approx(vol).epsilon(1e-13));
  // Energy of the linear function u = x: |grad u|^2 * volume.
  std::array<double, 8> u{};
  for (int l = 0; l < 8; ++l) {
    Eigen::Vector3d p((l & 1), (l >> 1) & 1, (l >> 2) & 1);
    u[l] = (h * L * p)[0];
  }
  double e = 0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) e += u[i] * K[i][j] * u[j];
  CHECK(e == Approx(vol).epsilon(1e-12));
}

TEST_CASE("assembled P1 matrices on the bent strip") {
  auto mesh = mesh_lshape(lshape_profile(1.3, 3), 0.2);
  auto full = assemble_p1(mesh, false);
  CHECK(full.dofs() == static_cast<int>(mesh.nodes.size()));
  CHECK(total(full.M) == Approx(mesh.area()).epsilon(1e-12));
  auto k1 = times(full.K, std::vector<double>(full.dofs(), 1.0));
  double worst = 0;
  for (double v : k1) worst = std::max(worst, std::abs(v));
  CHECK(worst < 1e-12);
  CHECK(full.K.max_asymmetry() == 0);
  CHECK(full.M.max_asymmetry() == 0);

  auto P = assemble_p1(mesh);
  auto dir = mesh.dirichlet_nodes();
  int free = 0;
  for (char d : dir) free += !d;
  CHECK(P.dofs() == free);
  for (int e = 0; e < P.dofs(); ++e) CHECK(P.equation_of_node[P.node_of_equation[e]] == e);
  auto x = P.expand(std::vector<double>(P.dofs(), 2.0));
  for (std::size_t v = 0; v < x.size(); ++v) CHECK(x[v] == (dir[v] ? 0.0 : 2.0));
}

TEST_CASE("five-point stencil on the uniform square mesh") {
  const int n = 8;
  auto mesh = mesh_rectangle(1, 1, n, n, kAllDirichlet);
  auto P = assemble_p1(mesh, false);
  for (int v = 0; v < P.dofs(); ++v) {
    const Vec2 x = mesh.nodes[v];
    if (x[0] < 1e-12 || x[0] > 1 - 1e-12 || x[1] < 1e-12 || x[1] > 1 - 1e-12) continue;
    int nonzero = 0;
    for (int k = P.K.row_ptr[v]; k < P.K.row_ptr[v + 1]; ++k) {
      const int w = P.K.col[k];
      const double a = P.K.val[k];
      if (std::abs(a) < 1e-14) continue;
      ++nonzero;
      Vec2 d = mesh.nodes[w] - x;
      if (w == v) CHECK(a == Approx(4).epsilon(1e-13));
      else {
        CHECK(a == Approx(-1).epsilon(1e-13));
        CHECK(std::abs(norm(d) - 1.0 / n) < 1e-12);
      }
    }
    CHECK(nonzero == 5);
  }
}

TEST_CASE("patch test: linear functions are discrete harmonic") {
  auto mesh = refine(mesh_lshape(lshape_profile(2.2, 2), 0.25));
  auto P = assemble_p1(mesh, false);
  std::vector<double> u(P.dofs());
  for (int v = 0; v < P.dofs(); ++v) u[v] = 0.7 - 1.3 * mesh.nodes[v][0] + 2.1 * mesh.nodes[v][1];
  auto Ku = times(P.K, u);
  std::vector<char> boundary(P.dofs(), 0);
  for (const auto& e : mesh.boundary_edges) boundary[e.a] = boundary[e.b] = 1;
  double worst = 0;
  for (int v = 0; v < P.dofs(); ++v)
    if (!boundary[v]) worst = std::max(worst, std::abs(Ku[v]));
  CHECK(worst < 1e-12);
  double energy = 0;
  for (int v = 0; v < P.dofs(); ++v) energy += u[v] * Ku[v];
  CHECK(energy == Approx((1.3 * 1.3 + 2.1 * 2.1) * mesh.area()).epsilon(1e-11));
}

TEST_CASE("Rayleigh quotients bound the discrete ground state") {
  auto mesh = mesh_rectangle(1, 1, 12, 12, kAllDirichlet);
  auto P = assemble_p1(mesh);
  SolverConfig cfg;
  auto r = smallest_eigenpairs(P, cfg);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int s = 0; s < 50; ++s) {
    std::vector<double> v(P.dofs());
    for (auto& x : v) x = U(gen);
    CHECK(rayleigh_quotient(P, v) >= r.eigenvalues[0] * (1 - 1e-12));
  }
  std::vector<double> v(r.vectors.col(0).data(), r.vectors.col(0).data() + P.dofs());
  CHECK(rayleigh_quotient(P, v) == Approx(r.eigenvalues[0]).epsilon(1e-10));
  CHECK_THROWS_AS(rayleigh_quotient(P, std::vector<double>(P.dofs() + 1, 1.0)), InvalidInput);
  CHECK_THROWS_AS(rayleigh_quotient(P, std::vector<double>(P.dofs(), 0.0)), InvalidInput);
}

TEST_CASE("voxel assembly") {
  auto g = voxelize(make_layer(build_regular(3, kPi / 3)), 3, 0.25, CutCondition::dirichlet);
  auto full = assemble_q1(g, false);
  CHECK(total(full.M) == Approx(g.volume()).epsilon(1e-12));
  auto k1 = times(full.K, std::vector<double>(full.dofs(), 1.0));
  double worst = 0, scale = 0;
  for (double v : k1) worst = std::max(worst, std::abs(v));
  for (double v : full.K.val) scale = std::max(scale, std::abs(v));
  CHECK(worst < 1e-12 * scale);
  CHECK(full.K.max_asymmetry() == 0);
  auto P = assemble_q1(g);
  CHECK(P.dofs() == std::count(g.dirichlet.begin(), g.dirichlet.end(), 0));
}

TEST_CASE("a mesh without free nodes is rejected") {
  auto mesh = mesh_rectangle(1, 1, 1, 1, kAllDirichlet);
  CHECK_THROWS_AS(assemble_p1(mesh), InvalidInput);
  CHECK_NOTHROW(assemble_p1(mesh, false));
}

TEST_CASE("mesh hash tracks the mesh") {
  auto a = mesh_lshape(lshape_profile(1.0, 3), 0.2);
  auto b = mesh_lshape(lshape_profile(1.0, 3), 0.2);
  auto c = mesh_lshape(lshape_profile(1.0 + 1e-9, 3), 0.2);
  CHECK(mesh_hash(a) == mesh_hash(b));
  CHECK(mesh_hash(a) != mesh_hash(c));
  CHECK(assemble_p1(a).provenance == assemble_p1(b).provenance);
}

}  // TEST_SUITE
