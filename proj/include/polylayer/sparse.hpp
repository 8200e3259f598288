#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace polylayer {

// Square matrix in compressed sparse row layout, both triangles stored.
// Columns are sorted within each row.
struct SparseSymmetric {
  int n = 0;
  std::vector<int> row_ptr{0};
  std::vector<int> col;
  std::vector<double> val;

  std::size_t nnz() const { return val.size(); }
  std::vector<double> diagonal() const;
  double entry(int i, int j) const;
  // max |a_ij - a_ji| over stored entries; structural asymmetry counts as the entry magnitude.
  double max_asymmetry() const;
  void multiply(std::span<const double> x, std::span<double> y) const;
};

// Rows of P map coarse unknowns to fine unknowns (general rectangular CSR).
struct SparseRect {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr{0};
  std::vector<int> col;
  std::vector<double> val;

  void multiply(std::span<const double> x, std::span<double> y) const;
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;
};

}  // namespace polylayer
