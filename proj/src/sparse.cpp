#include "hjcell/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hjcell/errors.hpp"

namespace hjcell {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols) {}

void SparseMatrix::reserve(std::size_t n) {
  trip_row_.reserve(n);
  trip_col_.reserve(n);
  trip_val_.reserve(n);
}

void SparseMatrix::add(Index row, Index col, double value) {
  detail::require(row >= 0 && static_cast<std::size_t>(row) < rows_ && col >= 0 &&
                      static_cast<std::size_t>(col) < cols_,
                  "SparseMatrix::add: index (" + std::to_string(row) + ", " +
                      std::to_string(col) + ") outside " + std::to_string(rows_) + "x" +
                      std::to_string(cols_));
  if (compressed_) expand();
  trip_row_.push_back(row);
  trip_col_.push_back(col);
  trip_val_.push_back(value);
}

std::size_t SparseMatrix::stored() const {
  return compressed_ ? values_.size() : trip_val_.size();
}

void SparseMatrix::compress() {
  if (compressed_) return;
  const std::size_t nt = trip_val_.size();
  std::vector<std::size_t> order(nt);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (trip_col_[a] != trip_col_[b]) return trip_col_[a] < trip_col_[b];
    return trip_row_[a] < trip_row_[b];
  });

  col_ptr_.assign(cols_ + 1, 0);
  row_idx_.clear();
  values_.clear();
  row_idx_.reserve(nt);
  values_.reserve(nt);
  Index last_row = -1, last_col = -1;
  for (std::size_t k : order) {
    const Index r = trip_row_[k], c = trip_col_[k];
    if (r == last_row && c == last_col) {
      values_.back() += trip_val_[k];
      continue;
    }
    row_idx_.push_back(r);
    values_.push_back(trip_val_[k]);
    ++col_ptr_[static_cast<std::size_t>(c) + 1];
    last_row = r;
    last_col = c;
  }
  for (std::size_t c = 0; c < cols_; ++c) col_ptr_[c + 1] += col_ptr_[c];

  trip_row_.clear();
  trip_col_.clear();
  trip_val_.clear();
  trip_row_.shrink_to_fit();
  trip_col_.shrink_to_fit();
  trip_val_.shrink_to_fit();
  compressed_ = true;
}

void SparseMatrix::expand() {
  trip_row_.clear();
  trip_col_.clear();
  trip_val_.clear();
  reserve(values_.size());
  for (std::size_t c = 0; c < cols_; ++c) {
    for (Index k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) {
      trip_row_.push_back(row_idx_[k]);
      trip_col_.push_back(static_cast<Index>(c));
      trip_val_.push_back(values_[k]);
    }
  }
  col_ptr_.clear();
  row_idx_.clear();
  values_.clear();
  compressed_ = false;
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  detail::require(x.size() == cols_, "SparseMatrix::multiply: size mismatch");
  std::vector<double> y(rows_, 0.0);
  if (compressed_) {
    for (std::size_t c = 0; c < cols_; ++c)
      for (Index k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) y[row_idx_[k]] += values_[k] * x[c];
  } else {
    for (std::size_t k = 0; k < trip_val_.size(); ++k)
      y[trip_row_[k]] += trip_val_[k] * x[trip_col_[k]];
  }
  return y;
}

std::vector<double> SparseMatrix::transpose_multiply(std::span<const double> y) const {
  detail::require(y.size() == rows_, "SparseMatrix::transpose_multiply: size mismatch");
  std::vector<double> x(cols_, 0.0);
  if (compressed_) {
    for (std::size_t c = 0; c < cols_; ++c)
      for (Index k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) x[c] += values_[k] * y[row_idx_[k]];
  } else {
    for (std::size_t k = 0; k < trip_val_.size(); ++k)
      x[trip_col_[k]] += trip_val_[k] * y[trip_row_[k]];
  }
  return x;
}

SparseMatrix SparseMatrix::transposed() const {
  SparseMatrix t(cols_, rows_);
  t.reserve(stored());
  if (compressed_) {
    for (std::size_t c = 0; c < cols_; ++c)
      for (Index k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k)
        t.add(static_cast<Index>(c), row_idx_[k], values_[k]);
  } else {
    for (std::size_t k = 0; k < trip_val_.size(); ++k) t.add(trip_col_[k], trip_row_[k], trip_val_[k]);
  }
  t.compress();
  return t;
}

SparseMatrix SparseMatrix::scaled(double factor) const {
  SparseMatrix s = *this;
  for (double& v : s.values_) v *= factor;
  for (double& v : s.trip_val_) v *= factor;
  return s;
}

double SparseMatrix::frobenius_norm() const {
  SparseMatrix c = *this;
  c.compress();
  double acc = 0.0;
  for (double v : c.values_) acc += v * v;
  return std::sqrt(acc);
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> d(rows_ * cols_, 0.0);
  if (compressed_) {
    for (std::size_t c = 0; c < cols_; ++c)
      for (Index k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) d[c * rows_ + row_idx_[k]] += values_[k];
  } else {
    for (std::size_t k = 0; k < trip_val_.size(); ++k)
      d[static_cast<std::size_t>(trip_col_[k]) * rows_ + trip_row_[k]] += trip_val_[k];
  }
  return d;
}

SparseMatrix SparseMatrix::from_dense(std::size_t rows, std::size_t cols,
                                      std::span<const double> column_major) {
  detail::require(column_major.size() == rows * cols, "SparseMatrix::from_dense: size mismatch");
  SparseMatrix m(rows, cols);
  for (std::size_t c = 0; c < cols; ++c)
    for (std::size_t r = 0; r < rows; ++r)
      if (double v = column_major[c * rows + r]; v != 0.0)
        m.add(static_cast<Index>(r), static_cast<Index>(c), v);
  m.compress();
  return m;
}

}  // namespace hjcell
