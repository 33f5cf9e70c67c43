#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "hjcell/sparse.hpp"

namespace hjcell {

/// Householder QR factorization A E = Q R of a tall or square matrix
/// (rows >= cols), with E a column permutation (identity for the dense
/// backend). Q is kept in factored form; only its action is exposed.
class QrFactorization {
 public:
  virtual ~QrFactorization() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;

  /// Rank reported by the factorization itself. The sparse backend drops
  /// exactly-zero columns; the dense backend always reports cols().
  virtual std::size_t reported_rank() const = 0;

  virtual std::vector<double> r_diagonal() const = 0;

  /// x <- Q^T x and x <- Q x, with x of length rows().
  virtual void apply_qt(std::vector<double>& x) const = 0;
  virtual void apply_q(std::vector<double>& x) const = 0;

  /// Triangular solves with the leading cols() x cols() block of R.
  virtual std::vector<double> solve_r(std::span<const double> b) const = 0;
  virtual std::vector<double> solve_rt(std::span<const double> b) const = 0;

  /// E as a list: column k of A*E is column permutation()[k] of A.
  /// Empty means identity.
  virtual std::span<const Index> permutation() const = 0;
};

std::unique_ptr<QrFactorization> dense_householder_qr(const SparseMatrix& a);

bool sparse_qr_available();

/// Multifrontal sparse QR with a fill-reducing column ordering. Throws
/// ContractError when the library was built without a sparse backend.
std::unique_ptr<QrFactorization> sparse_qr(const SparseMatrix& a);

/// Rank-revealing sparse QR of any shape, A E = Q [R11 R12; 0 0] with R11
/// rank() x rank() upper triangular. Columns whose remaining norm falls
/// under the library's default tolerance are moved to the end as dead.
class TrapezoidalQr {
 public:
  virtual ~TrapezoidalQr() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual std::size_t rank() const = 0;

  /// [R11 R12], rank() x cols(), compressed, columns in permuted order.
  virtual const SparseMatrix& r() const = 0;

  virtual void apply_qt(std::vector<double>& x) const = 0;
  virtual std::span<const Index> permutation() const = 0;
};

std::unique_ptr<TrapezoidalQr> sparse_qr_trapezoidal(const SparseMatrix& a);

}  // namespace hjcell
