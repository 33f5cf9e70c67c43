#include "hjcell/errors.hpp"
#include "hjcell/qr.hpp"

#ifdef HJCELL_HAVE_SPQR

#include <SuiteSparseQR.hpp>

#include <cstring>

namespace hjcell {
namespace {

// Owns a cholmod workspace. SuiteSparse objects below are freed against it,
// so it must outlive them.
struct CholmodCommon {
  CholmodCommon() {
    cholmod_l_start(&cc);
    cc.SPQR_nthreads = 1;
  }
  ~CholmodCommon() { cholmod_l_finish(&cc); }
  CholmodCommon(const CholmodCommon&) = delete;
  CholmodCommon& operator=(const CholmodCommon&) = delete;
  cholmod_common cc;
};

cholmod_sparse* to_cholmod(const SparseMatrix& a, cholmod_common* cc) {
  cholmod_sparse* A = cholmod_l_allocate_sparse(a.rows(), a.cols(), a.stored(), /*sorted*/ 1, /*packed*/ 1,
                                                /*stype*/ 0, CHOLMOD_REAL, cc);
  detail::require(A != nullptr, "sparse_qr: allocation failed");
  std::memcpy(A->p, a.col_ptr().data(), (a.cols() + 1) * sizeof(SuiteSparse_long));
  std::memcpy(A->i, a.row_index().data(), a.stored() * sizeof(SuiteSparse_long));
  std::memcpy(A->x, a.values().data(), a.stored() * sizeof(double));
  return A;
}

void qmult(int method, cholmod_sparse* H, cholmod_dense* HTau, SuiteSparse_long* HPinv, std::vector<double>& x,
           std::size_t m, cholmod_common* cc) {
  detail::require(x.size() == m, "qmult: size mismatch");
  cholmod_dense X;
  X.nrow = m;
  X.ncol = 1;
  X.nzmax = m;
  X.d = m;
  X.x = x.data();
  X.z = nullptr;
  X.xtype = CHOLMOD_REAL;
  X.dtype = CHOLMOD_DOUBLE;
  cholmod_dense* Y = SuiteSparseQR_qmult<double>(method, H, HTau, HPinv, &X, cc);
  detail::require(Y != nullptr, "sparse_qr: qmult failed");
  std::memcpy(x.data(), Y->x, m * sizeof(double));
  cholmod_l_free_dense(&Y, cc);
}

class SuiteSparseQr final : public QrFactorization {
 public:
  explicit SuiteSparseQr(const SparseMatrix& input) : common_(std::make_unique<CholmodCommon>()) {
    SparseMatrix a = input;
    a.compress();
    m_ = a.rows();
    n_ = a.cols();
    detail::require(m_ >= n_, "sparse_qr: needs rows >= cols");

    cholmod_common* cc = &common_->cc;
    cholmod_sparse* A = to_cholmod(a, cc);

    SuiteSparse_long* E = nullptr;
    // tol = 0: only exactly-zero columns are treated as dead; numerical
    // rank decisions are made by the caller from diag(R).
    rank_ = static_cast<std::size_t>(SuiteSparseQR<double>(SPQR_ORDERING_DEFAULT, 0.0,
                                                           static_cast<SuiteSparse_long>(n_), A,
                                                           &R_, &E, &H_, &HPinv_, &HTau_, cc));
    cholmod_l_free_sparse(&A, cc);
    detail::require(R_ != nullptr && H_ != nullptr, "sparse_qr: factorization failed");
    if (E) {
      perm_.assign(E, E + n_);
      cholmod_l_free(n_, sizeof(SuiteSparse_long), E, cc);
    }
    extract_diagonal();
  }

  ~SuiteSparseQr() override {
    cholmod_common* cc = &common_->cc;
    if (R_) cholmod_l_free_sparse(&R_, cc);
    if (H_) cholmod_l_free_sparse(&H_, cc);
    if (HTau_) cholmod_l_free_dense(&HTau_, cc);
    if (HPinv_) cholmod_l_free(m_, sizeof(SuiteSparse_long), HPinv_, cc);
  }

  std::size_t rows() const override { return m_; }
  std::size_t cols() const override { return n_; }
  std::size_t reported_rank() const override { return rank_; }
  std::vector<double> r_diagonal() const override { return diag_; }

  void apply_qt(std::vector<double>& x) const override {
    qmult(SPQR_QTX, H_, HTau_, HPinv_, x, m_, &common_->cc);
  }
  void apply_q(std::vector<double>& x) const override {
    qmult(SPQR_QX, H_, HTau_, HPinv_, x, m_, &common_->cc);
  }

  std::vector<double> solve_r(std::span<const double> b) const override {
    detail::require(b.size() == n_, "solve_r: size mismatch");
    const auto* p = static_cast<const SuiteSparse_long*>(R_->p);
    const auto* ri = static_cast<const SuiteSparse_long*>(R_->i);
    const auto* rx = static_cast<const double*>(R_->x);
    std::vector<double> y(b.begin(), b.end());
    for (std::size_t j = n_; j-- > 0;) {
      y[j] /= diag_[j];
      for (SuiteSparse_long k = p[j]; k < p[j + 1]; ++k)
        if (static_cast<std::size_t>(ri[k]) < j) y[ri[k]] -= rx[k] * y[j];
    }
    return y;
  }

  std::vector<double> solve_rt(std::span<const double> b) const override {
    detail::require(b.size() == n_, "solve_rt: size mismatch");
    const auto* p = static_cast<const SuiteSparse_long*>(R_->p);
    const auto* ri = static_cast<const SuiteSparse_long*>(R_->i);
    const auto* rx = static_cast<const double*>(R_->x);
    std::vector<double> y(b.begin(), b.end());
    for (std::size_t j = 0; j < n_; ++j) {
      double acc = y[j];
      for (SuiteSparse_long k = p[j]; k < p[j + 1]; ++k)
        if (static_cast<std::size_t>(ri[k]) < j) acc -= rx[k] * y[ri[k]];
      y[j] = acc / diag_[j];
    }
    return y;
  }

  std::span<const Index> permutation() const override { return perm_; }

 private:
  void extract_diagonal() {
    diag_.assign(n_, 0.0);
    const auto* p = static_cast<const SuiteSparse_long*>(R_->p);
    const auto* ri = static_cast<const SuiteSparse_long*>(R_->i);
    const auto* rx = static_cast<const double*>(R_->x);
    for (std::size_t j = 0; j < n_; ++j)
      for (SuiteSparse_long k = p[j]; k < p[j + 1]; ++k)
        if (static_cast<std::size_t>(ri[k]) == j) diag_[j] += rx[k];
  }

  std::unique_ptr<CholmodCommon> common_;
  std::size_t m_ = 0, n_ = 0, rank_ = 0;
  cholmod_sparse* R_ = nullptr;
  cholmod_sparse* H_ = nullptr;
  cholmod_dense* HTau_ = nullptr;
  SuiteSparse_long* HPinv_ = nullptr;
  std::vector<Index> perm_;
  std::vector<double> diag_;
};

class SuiteSparseTrapezoidalQr final : public TrapezoidalQr {
 public:
  explicit SuiteSparseTrapezoidalQr(const SparseMatrix& input) : common_(std::make_unique<CholmodCommon>()) {
    SparseMatrix a = input;
    a.compress();
    m_ = a.rows();
    n_ = a.cols();
    cholmod_common* cc = &common_->cc;
    cholmod_sparse* A = to_cholmod(a, cc);
    cholmod_sparse* R = nullptr;
    SuiteSparse_long* E = nullptr;
    // econ = 0 returns only the rank() leading rows of R.
    rank_ = static_cast<std::size_t>(SuiteSparseQR<double>(SPQR_ORDERING_DEFAULT, SPQR_DEFAULT_TOL, 0, A, &R, &E,
                                                           &H_, &HPinv_, &HTau_, cc));
    cholmod_l_free_sparse(&A, cc);
    detail::require(R != nullptr && H_ != nullptr, "sparse_qr_trapezoidal: factorization failed");
    perm_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) perm_[k] = E ? E[k] : static_cast<Index>(k);
    if (E) cholmod_l_free(n_, sizeof(SuiteSparse_long), E, cc);

    r_ = SparseMatrix(rank_, n_);
    const auto* p = static_cast<const SuiteSparse_long*>(R->p);
    const auto* ri = static_cast<const SuiteSparse_long*>(R->i);
    const auto* rx = static_cast<const double*>(R->x);
    r_.reserve(static_cast<std::size_t>(p[n_]));
    for (std::size_t j = 0; j < n_; ++j)
      for (SuiteSparse_long k = p[j]; k < p[j + 1]; ++k)
        if (static_cast<std::size_t>(ri[k]) < rank_ && rx[k] != 0.0) r_.add(ri[k], static_cast<Index>(j), rx[k]);
    r_.compress();
    cholmod_l_free_sparse(&R, cc);
  }

  ~SuiteSparseTrapezoidalQr() override {
    cholmod_common* cc = &common_->cc;
    if (H_) cholmod_l_free_sparse(&H_, cc);
    if (HTau_) cholmod_l_free_dense(&HTau_, cc);
    if (HPinv_) cholmod_l_free(m_, sizeof(SuiteSparse_long), HPinv_, cc);
  }

  std::size_t rows() const override { return m_; }
  std::size_t cols() const override { return n_; }
  std::size_t rank() const override { return rank_; }
  const SparseMatrix& r() const override { return r_; }
  void apply_qt(std::vector<double>& x) const override {
    qmult(SPQR_QTX, H_, HTau_, HPinv_, x, m_, &common_->cc);
  }
  std::span<const Index> permutation() const override { return perm_; }

 private:
  std::unique_ptr<CholmodCommon> common_;
  std::size_t m_ = 0, n_ = 0, rank_ = 0;
  SparseMatrix r_;
  cholmod_sparse* H_ = nullptr;
  cholmod_dense* HTau_ = nullptr;
  SuiteSparse_long* HPinv_ = nullptr;
  std::vector<Index> perm_;
};

}  // namespace

bool sparse_qr_available() { return true; }

std::unique_ptr<TrapezoidalQr> sparse_qr_trapezoidal(const SparseMatrix& a) {
  return std::make_unique<SuiteSparseTrapezoidalQr>(a);
}

std::unique_ptr<QrFactorization> sparse_qr(const SparseMatrix& a) {
  static_assert(sizeof(SuiteSparse_long) == sizeof(Index));
  return std::make_unique<SuiteSparseQr>(a);
}

}  // namespace hjcell

#else

namespace hjcell {

bool sparse_qr_available() { return false; }

std::unique_ptr<QrFactorization> sparse_qr(const SparseMatrix&) {
  throw ContractError("sparse_qr: built without SuiteSparseQR");
}

std::unique_ptr<TrapezoidalQr> sparse_qr_trapezoidal(const SparseMatrix&) {
  throw ContractError("sparse_qr_trapezoidal: built without SuiteSparseQR");
}

}  // namespace hjcell

#endif
