#include "polylayer/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <vector>

namespace polylayer::kernels {

namespace {

std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

double block_dot(const double* a, const double* b, std::size_t lo, std::size_t hi) {
  double s = 0;
  for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
  return s;
}

void block_gram(std::size_t n, std::size_t lo, std::size_t hi, int ka, const double* A, int kb,
                const double* B, double* C) {
  for (int q = 0; q < kb; ++q) {
    const double* bq = B + static_cast<std::size_t>(q) * n;
    for (int p = 0; p < ka; ++p) {
      const double* ap = A + static_cast<std::size_t>(p) * n;
      C[p + static_cast<std::size_t>(q) * ka] = block_dot(ap, bq, lo, hi);
    }
  }
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

void spmv_serial(const SparseSymmetric& A, const double* x, double* y) {
  for (int i = 0; i < A.n; ++i) {
    double s = 0;
    for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) s += A.val[p] * x[A.col[p]];
    y[i] = s;
  }
}

void spmv_omp(const SparseSymmetric& A, const double* x, double* y) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.n; ++i) {
    double s = 0;
    for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) s += A.val[p] * x[A.col[p]];
    y[i] = s;
  }
}

void spmm_serial(const SparseSymmetric& A, int k, const double* X, double* Y) {
  const std::size_t n = A.n;
  for (int c = 0; c < k; ++c) spmv_serial(A, X + c * n, Y + c * n);
}

void spmm_omp(const SparseSymmetric& A, int k, const double* X, double* Y) {
  const std::size_t n = A.n;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.n; ++i) {
    for (int c = 0; c < k; ++c) {
      const double* x = X + c * n;
      double s = 0;
      for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) s += A.val[p] * x[A.col[p]];
      Y[i + c * n] = s;
    }
  }
}

double dot_serial(std::size_t n, const double* a, const double* b) {
  double total = 0;
  for (std::size_t blk = 0; blk < block_count(n); ++blk)
    total += block_dot(a, b, blk * kBlock, std::min(n, (blk + 1) * kBlock));
  return total;
}

double dot_omp(std::size_t n, const double* a, const double* b) {
  const std::size_t nb = block_count(n);
  std::vector<double> partial(nb);
#pragma omp parallel for schedule(static)
  for (std::size_t blk = 0; blk < nb; ++blk)
    partial[blk] = block_dot(a, b, blk * kBlock, std::min(n, (blk + 1) * kBlock));
  double total = 0;
  for (double p : partial) total += p;
  return total;
}

void gram_serial(std::size_t n, int ka, const double* A, int kb, const double* B, double* C) {
  const std::size_t cells = static_cast<std::size_t>(ka) * kb;
  std::fill(C, C + cells, 0.0);
  std::vector<double> part(cells);
  for (std::size_t blk = 0; blk < block_count(n); ++blk) {
    block_gram(n, blk * kBlock, std::min(n, (blk + 1) * kBlock), ka, A, kb, B, part.data());
    for (std::size_t c = 0; c < cells; ++c) C[c] += part[c];
  }
}

void gram_omp(std::size_t n, int ka, const double* A, int kb, const double* B, double* C) {
  const std::size_t cells = static_cast<std::size_t>(ka) * kb;
  const std::size_t nb = block_count(n);
  std::vector<double> partial(nb * cells);
#pragma omp parallel for schedule(static)
  for (std::size_t blk = 0; blk < nb; ++blk)
    block_gram(n, blk * kBlock, std::min(n, (blk + 1) * kBlock), ka, A, kb, B, partial.data() + blk * cells);
  std::fill(C, C + cells, 0.0);
  for (std::size_t blk = 0; blk < nb; ++blk)
    for (std::size_t c = 0; c < cells; ++c) C[c] += partial[blk * cells + c];
}

}  // namespace polylayer::kernels
