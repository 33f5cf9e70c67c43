#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hjcell {

using Index = std::int64_t;

/// Real sparse matrix assembled from (row, col, value) triplets.
///
/// Triplets may repeat; compress() sums duplicates and builds a compressed
/// column representation with row indices sorted inside each column. Adding
/// a triplet to a compressed matrix expands it back to triplet form.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  void reserve(std::size_t n);
  void add(Index row, Index col, double value);

  void compress();
  bool compressed() const { return compressed_; }

  /// Stored entries: triplets before compress(), distinct entries after.
  std::size_t stored() const;

  // Compressed-column views; valid only when compressed().
  std::span<const Index> col_ptr() const { return col_ptr_; }
  std::span<const Index> row_index() const { return row_idx_; }
  std::span<const double> values() const { return values_; }

  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> transpose_multiply(std::span<const double> y) const;

  SparseMatrix transposed() const;
  SparseMatrix scaled(double factor) const;

  double frobenius_norm() const;

  /// Column-major dense copy, rows() * cols() entries.
  std::vector<double> to_dense() const;
  static SparseMatrix from_dense(std::size_t rows, std::size_t cols,
                                 std::span<const double> column_major);

 private:
  void expand();

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  bool compressed_ = false;

  std::vector<Index> trip_row_, trip_col_;
  std::vector<double> trip_val_;

  std::vector<Index> col_ptr_, row_idx_;
  std::vector<double> values_;
};

}  // namespace hjcell
