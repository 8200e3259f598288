#pragma once

#include <memory>
#include <vector>

#include "polylayer/eigensolve.hpp"

namespace polylayer {

// Geometric V-cycle over nested discretizations: Chebyshev-Jacobi smoothing on
// every level, sparse Cholesky on the coarsest. The cycle is symmetric, so it
// can precondition the block eigensolver.
// operators[0] is the coarsest; prolongations[l] maps level l-1 to level l
// (prolongations[0] is ignored). The operators must outlive this object.
class MultigridPreconditioner : public Preconditioner {
 public:
  MultigridPreconditioner(std::vector<const SparseSymmetric*> operators, std::vector<SparseRect> prolongations,
                          int smoothing_degree = 3);
  ~MultigridPreconditioner() override;
  void apply(const Eigen::MatrixXd& R, Eigen::MatrixXd& Z) const override;
  void vcycle(int level, const double* r, double* z) const;
  int levels() const { return static_cast<int>(ops_.size()); }
  double spectral_bound(int level) const { return lmax_[level]; }

 private:
  void smooth(int level, const double* r, double* z) const;

  std::vector<const SparseSymmetric*> ops_;
  std::vector<SparseRect> prolong_;
  std::vector<std::vector<double>> inv_diag_;
  std::vector<double> lmax_;
  int degree_;
  std::unique_ptr<CholeskySolver> coarse_;
};

// Fine mesh must be refine(coarse mesh); rows follow the fine equations.
SparseRect prolongation_p1(const TriMesh& fine, const DiscreteProblem& coarse_problem,
                           const DiscreteProblem& fine_problem);
// Fine grid must use the same lattice as the coarse one with half the spacing.
SparseRect prolongation_q1(const VoxelGrid& coarse, const VoxelGrid& fine, const DiscreteProblem& coarse_problem,
                           const DiscreteProblem& fine_problem);

}  // namespace polylayer
