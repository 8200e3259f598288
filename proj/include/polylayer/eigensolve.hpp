#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "polylayer/assembly.hpp"

namespace polylayer {

enum class PreconditionerKind { none, jacobi, cholesky };

struct SolverConfig {
  int num_pairs = 1;
  double tolerance = 1e-8;  // relative residual |Kx - lambda Mx| / |Kx|
  int max_iterations = 1000;
  std::uint64_t seed = 20240917;
  PreconditionerKind preconditioner = PreconditionerKind::cholesky;
  int guard = -1;  // extra block columns; negative selects max(2, m / 2)

  void validate() const;
};

struct EigenResult {
  std::vector<double> eigenvalues;   // ascending
  Eigen::MatrixXd vectors;           // M-orthonormal columns
  std::vector<double> residuals;     // relative, recomputed with serial products
  std::vector<char> converged;
  int iterations = 0;
  double orthonormality_defect = 0;  // max |X^T M X - I|

  bool all_converged() const;
  int size() const { return static_cast<int>(eigenvalues.size()); }
};

// Approximate inverse of K applied column by column.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual void apply(const Eigen::MatrixXd& R, Eigen::MatrixXd& Z) const = 0;
};

std::unique_ptr<Preconditioner> make_preconditioner(const SparseSymmetric& K, PreconditionerKind kind);

// Sparse Cholesky of K (CHOLMOD supernodal).
class CholeskySolver : public Preconditioner {
 public:
  explicit CholeskySolver(const SparseSymmetric& K);
  ~CholeskySolver() override;
  void apply(const Eigen::MatrixXd& R, Eigen::MatrixXd& Z) const override;
  void solve(const double* b, double* x) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Blocked locally optimal preconditioned conjugate gradient iteration for the
// smallest eigenpairs of (K, M). Optional initial columns seed the block; the
// rest is filled from the seeded generator. Columns of `constraints` (M-orthonormal)
// are projected out of every iterate.
EigenResult smallest_eigenpairs(const DiscreteProblem& problem, const SolverConfig& config,
                                const Preconditioner* preconditioner = nullptr,
                                const Eigen::MatrixXd* initial = nullptr,
                                const Eigen::MatrixXd* constraints = nullptr);

// Adds `extra` pairs M-orthogonal to those of `prior`; result sorted ascending.
EigenResult deflate_and_continue(const DiscreteProblem& problem, const EigenResult& prior, int extra,
                                 const SolverConfig& config, const Preconditioner* preconditioner = nullptr);

// Relative residuals and M-orthonormality defect recomputed with serial products.
void audit_result(const DiscreteProblem& problem, EigenResult& result, double tolerance);

// Seeded uniform numbers in [-1, 1), identical on every platform.
Eigen::MatrixXd random_block(int rows, int cols, std::uint64_t seed);

}  // namespace polylayer
