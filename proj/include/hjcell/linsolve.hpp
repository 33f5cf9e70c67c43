#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hjcell/sparse.hpp"

namespace hjcell {

enum class RankFlag { FullRank, Deficient };

enum class QrBackend { Auto, Dense, Sparse };

struct LsqOptions {
  // |R_kk| below rank_tol * max|R_kk| marks the system rank deficient.
  double rank_tol = 1e-12;
  // Auto picks the dense backend when min(rows, cols) <= dense_threshold.
  std::size_t dense_threshold = 400;
  QrBackend backend = QrBackend::Auto;
  // Sparse backend, rows >= cols: rows with more than
  // max(64, 10 sqrt(cols)) entries are taken out of the sparse factorization
  // and folded back in by a small dense correction, as long as there are at
  // most this many of them. 0 disables the split.
  std::size_t max_dense_rows = 16;
};

struct LsqSolution {
  std::vector<double> delta;
  double residual_norm = 0.0;  // ||J delta + F||_2
  RankFlag rank = RankFlag::FullRank;
  bool regularized = false;
};

/// Minimum-norm least-squares solution delta = -pinv(J) F.
///
/// rows >= cols: factor J E = Q R and solve R1 y = -(Q^T F)(1:n).
/// rows <  cols: factor J^T E = Q R, solve R1^T z1 = -E^T F and set
///               delta = Q [z1; 0].
/// With dense rows split off (see LsqOptions) the sparse rows are factored
/// S E = Q [R11 R12; 0 0] and the dense rows are eliminated through a
/// d x d system, d being their count.
/// A Deficient flag leaves `delta` unspecified; callers are expected to
/// regularize and retry.
LsqSolution qr_least_squares(const SparseMatrix& J, std::span<const double> F,
                             const LsqOptions& options = {});

/// J + tau*I with I the rectangular identity (ones on (i,i), i < min(M,N)).
SparseMatrix regularize_diagonal(const SparseMatrix& J, double tau);

}  // namespace hjcell
