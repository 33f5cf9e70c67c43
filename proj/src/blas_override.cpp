// dgemm_ and dtrmm_ replacements. OpenBLAS 0.3.20 selects its Cooperlake
// kernels on recent AVX-512 parts and those return wrong level-3 products,
// which corrupts the blocked Householder updates in SuiteSparseQR. Symbols
// defined in the executable or in the module take precedence over the shared
// BLAS. Built only with HJCELL_OVERRIDE_BLAS.

#include <vector>

#include <Eigen/Core>

namespace {

inline bool upper_char(char c) { return c == 'U' || c == 'u'; }
inline bool trans_char(char c) { return c == 'T' || c == 't' || c == 'C' || c == 'c'; }
inline bool left_char(char c) { return c == 'L' || c == 'l'; }
inline bool unit_char(char c) { return c == 'U' || c == 'u'; }

using ColMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
using ConstView = Eigen::Map<const ColMajor, 0, Eigen::OuterStride<>>;
using View = Eigen::Map<ColMajor, 0, Eigen::OuterStride<>>;

}  // namespace

extern "C" void dgemm_(const char* transa, const char* transb, const int* m, const int* n, const int* k,
                       const double* alpha, const double* a, const int* lda, const double* b, const int* ldb,
                       const double* beta, double* c, const int* ldc) {
  const int M = *m, N = *n, K = *k;
  if (M <= 0 || N <= 0) return;
  View C(c, M, N, Eigen::OuterStride<>(*ldc));
  if (*beta == 0.0) C.setZero();
  else if (*beta != 1.0) C *= *beta;
  if (K <= 0 || *alpha == 0.0) return;
  const bool ta = trans_char(*transa), tb = trans_char(*transb);
  const ConstView A(a, ta ? K : M, ta ? M : K, Eigen::OuterStride<>(*lda));
  const ConstView B(b, tb ? N : K, tb ? K : N, Eigen::OuterStride<>(*ldb));
  const double al = *alpha;
  if (!ta && !tb) C.noalias() += al * A * B;
  else if (ta && !tb) C.noalias() += al * A.transpose() * B;
  else if (!ta && tb) C.noalias() += al * A * B.transpose();
  else C.noalias() += al * A.transpose() * B.transpose();
}

extern "C" void dtrmm_(const char* side, const char* uplo, const char* transa, const char* diag, const int* m,
                       const int* n, const double* alpha, const double* a, const int* lda, double* b,
                       const int* ldb) {
  const int M = *m, N = *n, LDA = *lda, LDB = *ldb;
  if (M <= 0 || N <= 0) return;
  const bool left = left_char(*side), trans = trans_char(*transa), unit = unit_char(*diag);
  // op(A) is upper triangular when exactly one of (upper, transposed) holds.
  const bool op_upper = upper_char(*uplo) != trans;
  const int k = left ? M : N;
  auto op = [&](int r, int c) {
    if (r == c && unit) return 1.0;
    return trans ? a[c + static_cast<long>(r) * LDA] : a[r + static_cast<long>(c) * LDA];
  };
  std::vector<double> out(static_cast<std::size_t>(M) * N, 0.0);
  if (left) {
    for (int j = 0; j < N; ++j) {
      const double* bj = b + static_cast<long>(j) * LDB;
      double* oj = out.data() + static_cast<long>(j) * M;
      for (int l = 0; l < k; ++l) {
        const double bl = bj[l];
        if (bl == 0.0) continue;
        const int r0 = op_upper ? 0 : l, r1 = op_upper ? l + 1 : k;
        for (int r = r0; r < r1; ++r) oj[r] += op(r, l) * bl;
      }
    }
  } else {
    for (int j = 0; j < N; ++j) {
      double* oj = out.data() + static_cast<long>(j) * M;
      const int l0 = op_upper ? 0 : j, l1 = op_upper ? j + 1 : k;
      for (int l = l0; l < l1; ++l) {
        const double f = op(l, j);
        if (f == 0.0) continue;
        const double* bl = b + static_cast<long>(l) * LDB;
        for (int i = 0; i < M; ++i) oj[i] += bl[i] * f;
      }
    }
  }
  const double al = *alpha;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < M; ++i) b[i + static_cast<long>(j) * LDB] = al * out[i + static_cast<std::size_t>(j) * M];
}
