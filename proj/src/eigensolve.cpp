#include "polylayer/eigensolve.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "polylayer/errors.hpp"
#include "polylayer/kernels.hpp"

namespace polylayer {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

void spmm(const SparseSymmetric& A, const Mat& X, Mat& Y) {
  Y.resize(X.rows(), X.cols());
  if (X.cols() > 0) kernels::spmm(A, static_cast<int>(X.cols()), X.data(), Y.data());
}

Mat gram(const Mat& A, const Mat& B) {
  Mat C(A.cols(), B.cols());
  if (A.cols() > 0 && B.cols() > 0)
    kernels::gram(A.rows(), static_cast<int>(A.cols()), A.data(), static_cast<int>(B.cols()), B.data(), C.data());
  return C;
}

Mat symmetric_part(const Mat& A) { return 0.5 * (A + A.transpose()); }

// Transform T with T^T G T = I on the numerically independent part of G.
Mat svqb_transform(const Mat& G, double drop) {
  const int k = static_cast<int>(G.rows());
  Vec d(k);
  for (int i = 0; i < k; ++i) d(i) = G(i, i) > 0 ? 1 / std::sqrt(G(i, i)) : 0.0;
  Mat Gs = d.asDiagonal() * symmetric_part(G) * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(Gs);
  const Vec& th = es.eigenvalues();
  double tmax = th.size() ? th.maxCoeff() : 0;
  int first = 0;
  while (first < k && !(th(first) > drop * tmax)) ++first;
  const int keep = k - first;
  Mat T = d.asDiagonal() * es.eigenvectors().rightCols(keep);
  for (int j = 0; j < keep; ++j) T.col(j) /= std::sqrt(th(first + j));
  return T;
}

Mat select_columns(const Mat& A, const std::vector<int>& cols) {
  Mat out(A.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(j) = A.col(cols[j]);
  return out;
}

Mat hcat(const Mat& A, const Mat& B, const Mat& C) {
  Mat S(A.rows(), A.cols() + B.cols() + C.cols());
  S << A, B, C;
  return S;
}

double column_norm(const Mat& A, int j) {
  return std::sqrt(kernels::dot(A.rows(), A.col(j).data(), A.col(j).data()));
}

class IdentityPreconditioner : public Preconditioner {
 public:
  void apply(const Mat& R, Mat& Z) const override { Z = R; }
};

class JacobiPreconditioner : public Preconditioner {
 public:
  explicit JacobiPreconditioner(const SparseSymmetric& K) {
    auto d = K.diagonal();
    inv_.resize(K.n);
    for (int i = 0; i < K.n; ++i) inv_(i) = 1 / d[i];
  }
  void apply(const Mat& R, Mat& Z) const override { Z = inv_.asDiagonal() * R; }

 private:
  Vec inv_;
};

struct Block {
  Mat V, KV, MV;
  int cols() const { return static_cast<int>(V.cols()); }
  void transform(const Mat& T) {
    V = V * T;
    KV = KV * T;
    MV = MV * T;
  }
};

void rayleigh_ritz(Block& X, Vec& theta) {
  Mat A = symmetric_part(gram(X.V, X.KV));
  Mat B = symmetric_part(gram(X.V, X.MV));
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(A, B);
  if (ges.info() != Eigen::Success) throw NotConverged("Rayleigh-Ritz step failed");
  theta = ges.eigenvalues();
  X.transform(ges.eigenvectors());
}

void fix_signs(Mat& X) {
  for (int j = 0; j < X.cols(); ++j) {
    double s = X.col(j).sum();
    if (std::abs(s) < 1e-12 * X.col(j).cwiseAbs().sum()) {
      Eigen::Index i;
      X.col(j).cwiseAbs().maxCoeff(&i);
      s = X(i, j);
    }
    if (s < 0) X.col(j) *= -1;
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (num_pairs < 1) throw InvalidInput("num_pairs must be at least 1");
  if (!(tolerance > 0 && tolerance <= 1e-2)) throw InvalidInput("tolerance must lie in (0, 1e-2]");
  if (max_iterations < 1) throw InvalidInput("max_iterations must be positive");
}

bool EigenResult::all_converged() const {
  return std::all_of(converged.begin(), converged.end(), [](char c) { return c != 0; });
}

Eigen::MatrixXd random_block(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Mat X(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) X(i, j) = 2.0 * static_cast<double>(gen() >> 11) * 0x1.0p-53 - 1.0;
  return X;
}

struct CholeskySolver::Impl {
  Eigen::SparseMatrix<double> A;
  Eigen::CholmodSupernodalLLT<Eigen::SparseMatrix<double>> llt;
};

CholeskySolver::CholeskySolver(const SparseSymmetric& K) : impl_(std::make_unique<Impl>()) {
  // CSR of a symmetric matrix read as CSC is the same matrix.
  Eigen::Map<const Eigen::SparseMatrix<double, Eigen::ColMajor, int>> map(
      K.n, K.n, static_cast<int>(K.nnz()), K.row_ptr.data(), K.col.data(), K.val.data());
  impl_->A = map;
  impl_->llt.compute(impl_->A);
  if (impl_->llt.info() != Eigen::Success) throw NotConverged("sparse Cholesky factorization failed");
}

CholeskySolver::~CholeskySolver() = default;

void CholeskySolver::apply(const Mat& R, Mat& Z) const { Z = impl_->llt.solve(R); }

void CholeskySolver::solve(const double* b, double* x) const {
  Eigen::Map<const Vec> bv(b, impl_->A.rows());
  Eigen::Map<Vec> xv(x, impl_->A.rows());
  xv = impl_->llt.solve(bv);
}

std::unique_ptr<Preconditioner> make_preconditioner(const SparseSymmetric& K, PreconditionerKind kind) {
  switch (kind) {
    case PreconditionerKind::none: return std::make_unique<IdentityPreconditioner>();
    case PreconditionerKind::jacobi: return std::make_unique<JacobiPreconditioner>(K);
    case PreconditionerKind::cholesky: return std::make_unique<CholeskySolver>(K);
  }
  throw InvalidInput("unknown preconditioner");
}

void audit_result(const DiscreteProblem& problem, EigenResult& result, double tolerance) {
  const int n = problem.dofs();
  const int m = static_cast<int>(result.vectors.cols());
  std::vector<double> kx(n), mx(n), r(n);
  Mat MX(n, m);
  result.residuals.assign(m, 0.0);
  result.converged.assign(m, 0);
  for (int j = 0; j < m; ++j) {
    const double* x = result.vectors.col(j).data();
    kernels::spmv_serial(problem.K, x, kx.data());
    kernels::spmv_serial(problem.M, x, mx.data());
    double lam = rayleigh_quotient(problem, std::span<const double>(x, n));
    result.eigenvalues[j] = lam;
    for (int i = 0; i < n; ++i) r[i] = kx[i] - lam * mx[i];
    double rn = std::sqrt(kernels::dot_serial(n, r.data(), r.data()));
    double kn = std::sqrt(kernels::dot_serial(n, kx.data(), kx.data()));
    result.residuals[j] = rn / kn;
    result.converged[j] = result.residuals[j] <= tolerance;
    std::copy(mx.begin(), mx.end(), MX.col(j).data());
  }
  Mat G(m, m);
  kernels::gram_serial(n, m, result.vectors.data(), m, MX.data(), G.data());
  result.orthonormality_defect = (G - Mat::Identity(m, m)).cwiseAbs().maxCoeff();
}

EigenResult smallest_eigenpairs(const DiscreteProblem& problem, const SolverConfig& cfg,
                                const Preconditioner* precond, const Eigen::MatrixXd* initial,
                                const Eigen::MatrixXd* constraints) {
  cfg.validate();
  const SparseSymmetric& K = problem.K;
  const SparseSymmetric& M = problem.M;
  const int n = K.n;
  const int m = cfg.num_pairs;
  const int fixed = constraints ? static_cast<int>(constraints->cols()) : 0;
  if (10 * (m + fixed) >= n) throw InvalidInput("number of pairs must stay below a tenth of the dimension");
  const int guard = cfg.guard >= 0 ? cfg.guard : std::max(2, m / 2);
  const int k = std::min(m + guard, std::max(m, n / 10));

  std::unique_ptr<Preconditioner> owned;
  if (!precond) {
    owned = make_preconditioner(K, cfg.preconditioner);
    precond = owned.get();
  }

  Mat Y, MY;
  if (constraints) {
    Y = *constraints;
    spmm(M, Y, MY);
  }
  auto project = [&](Mat& V) {
    if (Y.cols() == 0) return;
    V -= Y * gram(MY, V);
    V -= Y * gram(MY, V);
  };

  Block X;
  X.V = random_block(n, k, cfg.seed);
  if (initial && initial->cols() > 0) {
    if (initial->rows() != n) throw InvalidInput("initial block has the wrong length");
    int c = std::min<int>(k, static_cast<int>(initial->cols()));
    X.V.leftCols(c) = initial->leftCols(c);
  }
  project(X.V);
  spmm(M, X.V, X.MV);
  {
    Mat T = svqb_transform(gram(X.V, X.MV), 1e-14);
    if (T.cols() < k) throw NotConverged("initial block is rank deficient");
    X.V = X.V * T;
    X.MV = X.MV * T;
  }
  spmm(K, X.V, X.KV);
  Vec theta;
  rayleigh_ritz(X, theta);

  Block P;
  EigenResult result;
  std::vector<double> res(k, 1.0);
  int it = 0;
  for (it = 1; it <= cfg.max_iterations; ++it) {
    Mat Rm = X.KV - X.MV * theta.asDiagonal();
    for (int j = 0; j < k; ++j) res[j] = column_norm(Rm, j) / column_norm(X.KV, j);
    bool done = std::all_of(res.begin(), res.begin() + m, [&](double r) { return r <= cfg.tolerance; });
    if (done) {
      // Refresh products before declaring convergence.
      spmm(K, X.V, X.KV);
      spmm(M, X.V, X.MV);
      rayleigh_ritz(X, theta);
      Mat R2 = X.KV - X.MV * theta.asDiagonal();
      bool ok = true;
      for (int j = 0; j < m; ++j) ok = ok && column_norm(R2, j) / column_norm(X.KV, j) <= cfg.tolerance;
      if (ok) break;
      continue;
    }
    std::vector<int> active;
    for (int j = 0; j < k; ++j)
      if (res[j] > cfg.tolerance) active.push_back(j);

    Block W;
    precond->apply(select_columns(Rm, active), W.V);
    project(W.V);
    W.V -= X.V * gram(X.MV, W.V);
    W.V -= X.V * gram(X.MV, W.V);
    spmm(M, W.V, W.MV);
    {
      Mat T = svqb_transform(gram(W.V, W.MV), 1e-12);
      W.V = W.V * T;
      W.MV = W.MV * T;
    }
    spmm(K, W.V, W.KV);

    Block Pa;
    if (P.cols() > 0) {
      Pa.V = select_columns(P.V, active);
      Pa.KV = select_columns(P.KV, active);
      Pa.MV = select_columns(P.MV, active);
      for (const Block* B : {&X, &W}) {
        Mat c = gram(B->MV, Pa.V);
        Pa.V -= B->V * c;
        Pa.KV -= B->KV * c;
        Pa.MV -= B->MV * c;
      }
      Pa.transform(svqb_transform(gram(Pa.V, Pa.MV), 1e-12));
    } else {
      Pa.V.resize(n, 0);
      Pa.KV.resize(n, 0);
      Pa.MV.resize(n, 0);
    }

    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges;
    Block S;
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (attempt == 1) {
        Pa.V.resize(n, 0);
        Pa.KV.resize(n, 0);
        Pa.MV.resize(n, 0);
      }
      S.V = hcat(X.V, W.V, Pa.V);
      S.KV = hcat(X.KV, W.KV, Pa.KV);
      S.MV = hcat(X.MV, W.MV, Pa.MV);
      Mat A = symmetric_part(gram(S.V, S.KV));
      Mat B = symmetric_part(gram(S.V, S.MV));
      Eigen::LLT<Mat> llt(B);
      if (llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().minCoeff() < 1e-7) {
        if (attempt == 0 && Pa.cols() > 0) continue;
      }
      ges.compute(A, B);
      if (ges.info() == Eigen::Success) break;
      if (attempt == 1) throw NotConverged("Rayleigh-Ritz step failed");
    }
    Mat C = ges.eigenvectors().leftCols(k);
    theta = ges.eigenvalues().head(k);
    const int rest = S.cols() - k;
    Mat Cr = C.bottomRows(rest);
    P.V = S.V.rightCols(rest) * Cr;
    P.KV = S.KV.rightCols(rest) * Cr;
    P.MV = S.MV.rightCols(rest) * Cr;
    X.V = S.V * C;
    X.KV = S.KV * C;
    X.MV = S.MV * C;
    if (it % 25 == 0) {
      spmm(K, X.V, X.KV);
      spmm(M, X.V, X.MV);
      rayleigh_ritz(X, theta);
    }
  }

  result.iterations = std::min(it, cfg.max_iterations);
  result.vectors = X.V.leftCols(m);
  fix_signs(result.vectors);
  result.eigenvalues.assign(theta.data(), theta.data() + m);
  audit_result(problem, result, cfg.tolerance);
  return result;
}

EigenResult deflate_and_continue(const DiscreteProblem& problem, const EigenResult& prior, int extra,
                                 const SolverConfig& config, const Preconditioner* preconditioner) {
  if (!prior.all_converged()) throw InvalidInput("deflation needs a converged prior result");
  SolverConfig cfg = config;
  cfg.num_pairs = extra;
  EigenResult more = smallest_eigenpairs(problem, cfg, preconditioner, nullptr, &prior.vectors);

  const int a = prior.size(), b = more.size();
  std::vector<int> order(a + b);
  std::iota(order.begin(), order.end(), 0);
  auto value = [&](int i) { return i < a ? prior.eigenvalues[i] : more.eigenvalues[i - a]; };
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return value(x) < value(y); });

  EigenResult out;
  out.vectors.resize(problem.dofs(), a + b);
  out.eigenvalues.resize(a + b);
  for (int j = 0; j < a + b; ++j) {
    int i = order[j];
    if (i < a) out.vectors.col(j) = prior.vectors.col(i);
    else out.vectors.col(j) = more.vectors.col(i - a);
    out.eigenvalues[j] = value(i);
  }
  out.iterations = prior.iterations + more.iterations;
  audit_result(problem, out, config.tolerance);
  return out;
}

}  // namespace polylayer
