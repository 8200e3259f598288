#pragma once

#include <cstddef>

#include "polylayer/sparse.hpp"

// Hot loops in two flavours: a serial reference and an OpenMP version.
// Reductions are split into fixed blocks of kBlock entries whose partial sums
// are combined in block order, so both flavours return identical bits for
// any thread count.
namespace polylayer::kernels {

inline constexpr std::size_t kBlock = 4096;

void spmv_serial(const SparseSymmetric& A, const double* x, double* y);
void spmv_omp(const SparseSymmetric& A, const double* x, double* y);

// Y = A X for k column-major columns of length A.n.
void spmm_serial(const SparseSymmetric& A, int k, const double* X, double* Y);
void spmm_omp(const SparseSymmetric& A, int k, const double* X, double* Y);

double dot_serial(std::size_t n, const double* a, const double* b);
double dot_omp(std::size_t n, const double* a, const double* b);

// C = A^T B with A (n x ka), B (n x kb) column-major, C (ka x kb) column-major.
void gram_serial(std::size_t n, int ka, const double* A, int kb, const double* B, double* C);
void gram_omp(std::size_t n, int ka, const double* A, int kb, const double* B, double* C);

// Library entry points; currently the OpenMP flavour.
inline void spmv(const SparseSymmetric& A, const double* x, double* y) { spmv_omp(A, x, y); }
inline void spmm(const SparseSymmetric& A, int k, const double* X, double* Y) { spmm_omp(A, k, X, Y); }
inline double dot(std::size_t n, const double* a, const double* b) { return dot_omp(n, a, b); }
inline void gram(std::size_t n, int ka, const double* A, int kb, const double* B, double* C) {
  gram_omp(n, ka, A, kb, B, C);
}

int max_threads();

}  // namespace polylayer::kernels
