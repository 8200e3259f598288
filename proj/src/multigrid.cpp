#include "polylayer/multigrid.hpp"

#include <algorithm>
#include <cmath>

#include "polylayer/errors.hpp"
#include "polylayer/kernels.hpp"

namespace polylayer {

namespace {

constexpr double kSafety = 1.1;
constexpr double kLowerFraction = 0.1;

double estimate_lmax(const SparseSymmetric& A, const std::vector<double>& inv_diag) {
  const int n = A.n;
  Eigen::MatrixXd start = random_block(n, 1, 7);
  std::vector<double> x(start.data(), start.data() + n), y(n);
  double lam = 0;
  for (int it = 0; it < 30; ++it) {
    double nx = std::sqrt(kernels::dot(n, x.data(), x.data()));
    for (double& v : x) v /= nx;
    kernels::spmv(A, x.data(), y.data());
    for (int i = 0; i < n; ++i) y[i] *= inv_diag[i];
    lam = std::sqrt(kernels::dot(n, y.data(), y.data()));
    std::swap(x, y);
  }
  return lam;
}

}  // namespace

MultigridPreconditioner::MultigridPreconditioner(std::vector<const SparseSymmetric*> operators,
                                                 std::vector<SparseRect> prolongations, int smoothing_degree)
    : ops_(std::move(operators)), prolong_(std::move(prolongations)), degree_(smoothing_degree) {
  if (ops_.empty()) throw InvalidInput("multigrid needs at least one level");
  if (prolong_.size() != ops_.size()) throw InvalidInput("one prolongation per level expected");
  for (std::size_t l = 1; l < ops_.size(); ++l) {
    if (prolong_[l].rows != ops_[l]->n || prolong_[l].cols != ops_[l - 1]->n)
      throw InvalidInput("prolongation shape does not match the level operators");
  }
  coarse_ = std::make_unique<CholeskySolver>(*ops_[0]);
  inv_diag_.resize(ops_.size());
  lmax_.assign(ops_.size(), 0.0);
  for (std::size_t l = 1; l < ops_.size(); ++l) {
    auto d = ops_[l]->diagonal();
    inv_diag_[l].resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) inv_diag_[l][i] = 1 / d[i];
    lmax_[l] = kSafety * estimate_lmax(*ops_[l], inv_diag_[l]);
  }
}

MultigridPreconditioner::~MultigridPreconditioner() = default;

void MultigridPreconditioner::smooth(int level, const double* r_in, double* x) const {
  // x = q(D^-1 K) D^-1 r, the Chebyshev polynomial on [lower, upper].
  const SparseSymmetric& A = *ops_[level];
  const auto& dinv = inv_diag_[level];
  const int n = A.n;
  const double upper = lmax_[level], lower = kLowerFraction * upper;
  const double theta = 0.5 * (upper + lower), delta = 0.5 * (upper - lower);
  const double sigma = theta / delta;
  double rho = 1 / sigma;
  std::vector<double> r(r_in, r_in + n), d(n), Ad(n);
  for (int i = 0; i < n; ++i) {
    d[i] = dinv[i] * r[i] / theta;
    x[i] = d[i];
  }
  for (int k = 1; k < degree_; ++k) {
    kernels::spmv(A, d.data(), Ad.data());
    for (int i = 0; i < n; ++i) r[i] -= Ad[i];
    double rho_next = 1 / (2 * sigma - rho);
    for (int i = 0; i < n; ++i) {
      d[i] = rho_next * rho * d[i] + 2 * rho_next / delta * dinv[i] * r[i];
      x[i] += d[i];
    }
    rho = rho_next;
  }
}

void MultigridPreconditioner::vcycle(int level, const double* r, double* z) const {
  if (level == 0) {
    coarse_->solve(r, z);
    return;
  }
  const SparseSymmetric& A = *ops_[level];
  const SparseRect& P = prolong_[level];
  const int n = A.n, nc = P.cols;
  std::vector<double> res(n), tmp(n), rc(nc), zc(nc);
  smooth(level, r, z);
  kernels::spmv(A, z, tmp.data());
  for (int i = 0; i < n; ++i) res[i] = r[i] - tmp[i];
  P.multiply_transpose(res, rc);
  vcycle(level - 1, rc.data(), zc.data());
  P.multiply(zc, tmp);
  for (int i = 0; i < n; ++i) z[i] += tmp[i];
  kernels::spmv(A, z, tmp.data());
  for (int i = 0; i < n; ++i) res[i] = r[i] - tmp[i];
  smooth(level, res.data(), tmp.data());
  for (int i = 0; i < n; ++i) z[i] += tmp[i];
}

void MultigridPreconditioner::apply(const Eigen::MatrixXd& R, Eigen::MatrixXd& Z) const {
  Z.resize(R.rows(), R.cols());
  for (int j = 0; j < R.cols(); ++j) vcycle(levels() - 1, R.col(j).data(), Z.col(j).data());
}

SparseRect prolongation_p1(const TriMesh& fine, const DiscreteProblem& pc, const DiscreteProblem& pf) {
  if (fine.parent_nodes <= 0) throw InvalidInput("fine mesh is not a refinement");
  if (static_cast<int>(pc.equation_of_node.size()) != fine.parent_nodes)
    throw InvalidInput("coarse problem does not match the parent mesh");
  SparseRect P;
  P.rows = pf.dofs();
  P.cols = pc.dofs();
  for (int r = 0; r < P.rows; ++r) {
    int v = pf.node_of_equation[r];
    if (v < fine.parent_nodes) {
      int c = pc.equation_of_node[v];
      if (c >= 0) {
        P.col.push_back(c);
        P.val.push_back(1.0);
      }
    } else {
      auto par = fine.midpoint_parents[v - fine.parent_nodes];
      for (int a : par) {
        int c = pc.equation_of_node[a];
        if (c >= 0) {
          P.col.push_back(c);
          P.val.push_back(0.5);
        }
      }
    }
    P.row_ptr.push_back(static_cast<int>(P.col.size()));
  }
  return P;
}

SparseRect prolongation_q1(const VoxelGrid& coarse, const VoxelGrid& fine, const DiscreteProblem& pc,
                           const DiscreteProblem& pf) {
  if (coarse.lattice != fine.lattice || coarse.frame != fine.frame || std::abs(fine.h * 2 - coarse.h) > 1e-14)
    throw InvalidInput("grids are not nested");
  SparseRect P;
  P.rows = pf.dofs();
  P.cols = pc.dofs();
  for (int r = 0; r < P.rows; ++r) {
    auto b = fine.box_index(fine.box_of_node[pf.node_of_equation[r]]);
    int q[3] = {b[0] + fine.lo[0], b[1] + fine.lo[1], b[2] + fine.lo[2]};
    int lo[3], cnt[3];
    for (int d = 0; d < 3; ++d) {
      int fl = q[d] >= 0 ? q[d] / 2 : -((-q[d] + 1) / 2);
      lo[d] = fl;
      cnt[d] = (q[d] - 2 * fl == 0) ? 1 : 2;
    }
    std::vector<std::pair<int, double>> entries;
    for (int k = 0; k < cnt[2]; ++k)
      for (int j = 0; j < cnt[1]; ++j)
        for (int i = 0; i < cnt[0]; ++i) {
          int c[3] = {lo[0] + i - coarse.lo[0], lo[1] + j - coarse.lo[1], lo[2] + k - coarse.lo[2]};
          if (c[0] < 0 || c[1] < 0 || c[2] < 0 || c[0] >= coarse.dims[0] || c[1] >= coarse.dims[1] ||
              c[2] >= coarse.dims[2])
            continue;
          int node = coarse.node_of_box[coarse.box_linear(c[0], c[1], c[2])];
          if (node < 0) continue;
          int e = pc.equation_of_node[node];
          if (e < 0) continue;
          double w = (cnt[0] == 2 ? 0.5 : 1.0) * (cnt[1] == 2 ? 0.5 : 1.0) * (cnt[2] == 2 ? 0.5 : 1.0);
          entries.push_back({e, w});
        }
    std::sort(entries.begin(), entries.end());
    for (auto& e : entries) {
      P.col.push_back(e.first);
      P.val.push_back(e.second);
    }
    P.row_ptr.push_back(static_cast<int>(P.col.size()));
  }
  return P;
}

}  // namespace polylayer
