#include "polylayer/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polylayer/kernels.hpp"

namespace polylayer {

std::vector<double> SparseSymmetric::diagonal() const {
  std::vector<double> d(n, 0.0);
  for (int i = 0; i < n; ++i) d[i] = entry(i, i);
  return d;
}

double SparseSymmetric::entry(int i, int j) const {
  auto first = col.begin() + row_ptr[i], last = col.begin() + row_ptr[i + 1];
  auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return val[it - col.begin()];
}

double SparseSymmetric::max_asymmetry() const {
  double worst = 0;
  for (int i = 0; i < n; ++i)
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
      worst = std::max(worst, std::abs(val[p] - entry(col[p], i)));
  return worst;
}

void SparseSymmetric::multiply(std::span<const double> x, std::span<double> y) const {
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw std::invalid_argument("matrix-vector size mismatch");
  kernels::spmv(*this, x.data(), y.data());
}

void SparseRect::multiply(std::span<const double> x, std::span<double> y) const {
  if (static_cast<int>(x.size()) != cols || static_cast<int>(y.size()) != rows)
    throw std::invalid_argument("matrix-vector size mismatch");
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i) {
    double s = 0;
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += val[p] * x[col[p]];
    y[i] = s;
  }
}

void SparseRect::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  if (static_cast<int>(x.size()) != rows || static_cast<int>(y.size()) != cols)
    throw std::invalid_argument("matrix-vector size mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < rows; ++i)
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) y[col[p]] += val[p] * x[i];
}

}  // namespace polylayer
