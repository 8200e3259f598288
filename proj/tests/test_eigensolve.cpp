#include <omp.h>

#include <cmath>

#include "doctest.h"
#include "polylayer/analysis.hpp"
#include "polylayer/eigensolve.hpp"
#include "polylayer/errors.hpp"
#include "polylayer/multigrid.hpp"
#include "support.hpp"

using namespace polylayer;
using doctest::Approx;

namespace {

constexpr std::array<EdgeTag, 4> kAllDirichlet{EdgeTag::dirichlet, EdgeTag::dirichlet, EdgeTag::dirichlet,
                                               EdgeTag::dirichlet};

using testing::unit_cube;

void check_contracts(const EigenResult& r, double tol) {
  CHECK(r.all_converged());
  for (double res : r.residuals) CHECK(res <= tol);
  CHECK(r.orthonormality_defect <= 1e-8);
  for (int i = 1; i < r.size(); ++i) CHECK(r.eigenvalues[i] >= r.eigenvalues[i - 1]);
}

}  // namespace

TEST_SUITE("eigensolve") {

TEST_CASE("unit square ground state") {
  auto P = assemble_p1(mesh_rectangle(1, 1, 40, 40, kAllDirichlet));
  SolverConfig cfg;
  auto r = smallest_eigenpairs(P, cfg, make_preconditioner(P.K, PreconditionerKind::cholesky).get());
  check_contracts(r, cfg.tolerance);
  CHECK(std::abs(r.eigenvalues[0] / (2 * kPi2) - 1) < 2e-3);
  CHECK(r.eigenvalues[0] > 2 * kPi2);
}

TEST_CASE("unit cube ground state on Q1 voxels") {
  auto P = assemble_q1(unit_cube(16));
  SolverConfig cfg;
  auto r = smallest_eigenpairs(P, cfg, make_preconditioner(P.K, PreconditionerKind::cholesky).get());
  check_contracts(r, cfg.tolerance);
  CHECK(std::abs(r.eigenvalues[0] / (3 * kPi2) - 1) < 1e-2);
  CHECK(r.eigenvalues[0] > 3 * kPi2);
}

TEST_CASE("straight strip with Neumann ends sits at pi^2") {
  auto mesh = mesh_rectangle(4, 1, 80, 20, {EdgeTag::dirichlet, EdgeTag::neumann, EdgeTag::dirichlet, EdgeTag::neumann});
  auto P = assemble_p1(mesh);
  SolverConfig cfg;
  auto r = smallest_eigenpairs(P, cfg, make_preconditioner(P.K, PreconditionerKind::cholesky).get());
  check_contracts(r, cfg.tolerance);
  CHECK(std::abs(r.eigenvalues[0] / kPi2 - 1) < 5e-3);
}

TEST_CASE("deflation finds the double second eigenvalue of the square") {
  auto P = assemble_p1(mesh_rectangle(1, 1, 32, 32, kAllDirichlet));
  SolverConfig cfg;
  auto pre = make_preconditioner(P.K, PreconditionerKind::cholesky);
  auto first = smallest_eigenpairs(P, cfg, pre.get());
  auto all = deflate_and_continue(P, first, 2, cfg, pre.get());
  REQUIRE(all.size() == 3);
  check_contracts(all, cfg.tolerance);
  CHECK(all.eigenvalues[0] == Approx(2 * kPi2).epsilon(5e-3));
  CHECK(all.eigenvalues[1] == Approx(5 * kPi2).epsilon(1e-2));
  CHECK(all.eigenvalues[2] == Approx(5 * kPi2).epsilon(1e-2));
  CHECK(all.eigenvalues[0] == first.eigenvalues[0]);

  cfg.num_pairs = 3;
  auto block = smallest_eigenpairs(P, cfg, pre.get());
  for (int i = 0; i < 3; ++i) CHECK(block.eigenvalues[i] == Approx(all.eigenvalues[i]).epsilon(1e-8));
}

TEST_CASE("preconditioners agree") {
  auto P = assemble_p1(mesh_lshape(lshape_profile(kPi / 2, 3), 0.2));
  SolverConfig cfg;
  cfg.max_iterations = 5000;
  double ref = 0;
  for (auto kind : {PreconditionerKind::cholesky, PreconditionerKind::jacobi, PreconditionerKind::none}) {
    cfg.preconditioner = kind;
    auto pre = make_preconditioner(P.K, kind);
    auto r = smallest_eigenpairs(P, cfg, pre.get());
    check_contracts(r, cfg.tolerance);
    if (kind == PreconditionerKind::cholesky) ref = r.eigenvalues[0];
    CHECK(r.eigenvalues[0] == Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("results do not depend on the thread count") {
  auto P = assemble_p1(mesh_lshape(lshape_profile(1.1, 3), 0.1));
  SolverConfig cfg;
  cfg.num_pairs = 2;
  auto pre = make_preconditioner(P.K, PreconditionerKind::cholesky);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  auto a = smallest_eigenpairs(P, cfg, pre.get());
  omp_set_num_threads(3);
  auto b = smallest_eigenpairs(P, cfg, pre.get());
  omp_set_num_threads(saved);
  auto c = smallest_eigenpairs(P, cfg, pre.get());
  for (int i = 0; i < 2; ++i) {
    CHECK(a.eigenvalues[i] == b.eigenvalues[i]);
    CHECK(a.eigenvalues[i] == c.eigenvalues[i]);
  }
  CHECK(a.iterations == b.iterations);
  CHECK((a.vectors - b.vectors).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("solver configuration is validated") {
  auto P = assemble_p1(mesh_rectangle(1, 1, 8, 8, kAllDirichlet));
  SolverConfig cfg;
  cfg.num_pairs = 0;
  CHECK_THROWS_AS(smallest_eigenpairs(P, cfg), InvalidInput);
  cfg = {};
  cfg.tolerance = 0.5;
  CHECK_THROWS_AS(smallest_eigenpairs(P, cfg), InvalidInput);
  cfg = {};
  cfg.num_pairs = 10;
  CHECK_THROWS_AS(smallest_eigenpairs(P, cfg), InvalidInput);
  cfg = {};
  cfg.max_iterations = 1;
  cfg.preconditioner = PreconditionerKind::none;
  auto r = smallest_eigenpairs(P, cfg);
  CHECK_FALSE(r.all_converged());
}

TEST_CASE("seeded random block is reproducible") {
  auto a = random_block(100, 3, 7), b = random_block(100, 3, 7), c = random_block(100, 3, 8);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0);
  CHECK(a.maxCoeff() < 1);
  CHECK(a.minCoeff() >= -1);
}

}  // TEST_SUITE

TEST_SUITE("multigrid") {

TEST_CASE("P1 prolongation reproduces linear functions") {
  auto coarse = mesh_lshape(lshape_profile(1.7, 3), 0.25);
  auto fine = refine(coarse);
  auto Pc = assemble_p1(coarse, false), Pf = assemble_p1(fine, false);
  auto T = prolongation_p1(fine, Pc, Pf);
  CHECK(T.rows == Pf.dofs());
  CHECK(T.cols == Pc.dofs());
  auto lin = [](const Vec2& x) { return 1 + 0.5 * x[0] - 2 * x[1]; };
  std::vector<double> u(Pc.dofs()), v(Pf.dofs());
  for (int i = 0; i < Pc.dofs(); ++i) u[i] = lin(coarse.nodes[Pc.node_of_equation[i]]);
  T.multiply(u, v);
  for (int i = 0; i < Pf.dofs(); ++i) CHECK(v[i] == Approx(lin(fine.nodes[Pf.node_of_equation[i]])).epsilon(1e-13));
  std::vector<double> short_x(3);
  CHECK_THROWS(T.multiply(short_x, v));
}

TEST_CASE("Q1 prolongation reproduces linear functions") {
  auto layer = make_layer(build_regular(3, kPi / 3));
  auto gc = voxelize(layer, 3, 0.2, CutCondition::dirichlet);
  auto gf = voxelize(layer, 3, 0.1, CutCondition::dirichlet);
  auto Pc = assemble_q1(gc, false), Pf = assemble_q1(gf, false);
  auto T = prolongation_q1(gc, gf, Pc, Pf);
  auto lin = [](const Vec3& x) { return 0.3 + x[0] - 0.7 * x[1] + 0.2 * x[2]; };
  std::vector<double> u(Pc.dofs()), v(Pf.dofs());
  for (int i = 0; i < Pc.dofs(); ++i) u[i] = lin(gc.node_position(Pc.node_of_equation[i]));
  T.multiply(u, v);
  int checked = 0;
  for (int i = 0; i < Pf.dofs(); ++i) {
    // Fine nodes outside the coarse grid have no coarse parents.
    if (T.row_ptr[i] == T.row_ptr[i + 1]) continue;
    double w = 0;
    for (int k = T.row_ptr[i]; k < T.row_ptr[i + 1]; ++k) w += T.val[k];
    if (std::abs(w - 1) > 1e-12) continue;
    ++checked;
    CHECK(v[i] == Approx(lin(gf.node_position(Pf.node_of_equation[i]))).epsilon(1e-12));
  }
  CHECK(checked > Pf.dofs() / 2);
}

TEST_CASE("V-cycle preconditioner is symmetric positive and drives the eigensolver") {
  auto layer = make_layer(build_regular(3, kPi / 2));
  std::vector<VoxelGrid> grids{voxelize(layer, 4, 0.25, CutCondition::dirichlet),
                               voxelize(layer, 4, 0.125, CutCondition::dirichlet)};
  std::vector<DiscreteProblem> problems{assemble_q1(grids[0]), assemble_q1(grids[1])};
  std::vector<SparseRect> prolong(2);
  prolong[1] = prolongation_q1(grids[0], grids[1], problems[0], problems[1]);
  MultigridPreconditioner mg({&problems[0].K, &problems[1].K}, std::move(prolong));
  CHECK(mg.levels() == 2);
  const int n = problems[1].dofs();
  Eigen::MatrixXd R = random_block(n, 2, 11), Z(n, 2);
  mg.apply(R, Z);
  double a = R.col(0).dot(Z.col(1)), b = R.col(1).dot(Z.col(0));
  CHECK(a == Approx(b).epsilon(1e-10));
  CHECK(R.col(0).dot(Z.col(0)) > 0);
  CHECK(R.col(1).dot(Z.col(1)) > 0);

  SolverConfig cfg;
  cfg.tolerance = 1e-8;
  auto viaMg = smallest_eigenpairs(problems[1], cfg, &mg);
  auto chol = make_preconditioner(problems[1].K, PreconditionerKind::cholesky);
  auto direct = smallest_eigenpairs(problems[1], cfg, chol.get());
  check_contracts(viaMg, 1e-8);
  CHECK(viaMg.eigenvalues[0] == Approx(direct.eigenvalues[0]).epsilon(1e-9));
}

}  // TEST_SUITE
