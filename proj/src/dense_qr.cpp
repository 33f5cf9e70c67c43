#include <cmath>

#include "hjcell/errors.hpp"
#include "hjcell/qr.hpp"

namespace hjcell {
namespace {

// Column-major Householder QR. Reflector k is I - tau_k v_k v_k^T with
// v_k(k) = 1 implicit and v_k(k+1:) stored below the diagonal of `a_`.
class DenseHouseholderQr final : public QrFactorization {
 public:
  explicit DenseHouseholderQr(const SparseMatrix& a)
      : m_(a.rows()), n_(a.cols()), a_(a.to_dense()), tau_(n_, 0.0) {
    detail::require(m_ >= n_, "dense_householder_qr: needs rows >= cols");
    factor();
  }

  std::size_t rows() const override { return m_; }
  std::size_t cols() const override { return n_; }
  std::size_t reported_rank() const override { return n_; }

  std::vector<double> r_diagonal() const override {
    std::vector<double> d(n_);
    for (std::size_t k = 0; k < n_; ++k) d[k] = at(k, k);
    return d;
  }

  void apply_qt(std::vector<double>& x) const override {
    detail::require(x.size() == m_, "apply_qt: size mismatch");
    for (std::size_t k = 0; k < n_; ++k) reflect(k, x);
  }

  void apply_q(std::vector<double>& x) const override {
    detail::require(x.size() == m_, "apply_q: size mismatch");
    for (std::size_t k = n_; k-- > 0;) reflect(k, x);
  }

  std::vector<double> solve_r(std::span<const double> b) const override {
    detail::require(b.size() == n_, "solve_r: size mismatch");
    std::vector<double> y(b.begin(), b.end());
    for (std::size_t j = n_; j-- > 0;) {
      y[j] /= at(j, j);
      const double yj = y[j];
      const double* col = &a_[j * m_];
      for (std::size_t i = 0; i < j; ++i) y[i] -= col[i] * yj;
    }
    return y;
  }

  std::vector<double> solve_rt(std::span<const double> b) const override {
    detail::require(b.size() == n_, "solve_rt: size mismatch");
    std::vector<double> y(b.begin(), b.end());
    for (std::size_t j = 0; j < n_; ++j) {
      const double* col = &a_[j * m_];
      double acc = y[j];
      for (std::size_t i = 0; i < j; ++i) acc -= col[i] * y[i];
      y[j] = acc / col[j];
    }
    return y;
  }

  std::span<const Index> permutation() const override { return {}; }

 private:
  double at(std::size_t i, std::size_t j) const { return a_[j * m_ + i]; }

  void factor() {
    for (std::size_t k = 0; k < n_; ++k) {
      double* col = &a_[k * m_];
      double norm_sq = 0.0;
      for (std::size_t i = k; i < m_; ++i) norm_sq += col[i] * col[i];
      if (norm_sq == 0.0) continue;  // zero column: R(k,k) = 0, no reflector
      const double norm = std::sqrt(norm_sq);
      const double alpha = col[k] >= 0.0 ? -norm : norm;
      const double v0 = col[k] - alpha;
      // Scale v so that v(k) = 1.
      for (std::size_t i = k + 1; i < m_; ++i) col[i] /= v0;
      tau_[k] = (alpha - col[k]) / alpha;
      col[k] = alpha;

      for (std::size_t j = k + 1; j < n_; ++j) {
        double* cj = &a_[j * m_];
        double dot = cj[k];
        for (std::size_t i = k + 1; i < m_; ++i) dot += col[i] * cj[i];
        dot *= tau_[k];
        cj[k] -= dot;
        for (std::size_t i = k + 1; i < m_; ++i) cj[i] -= dot * col[i];
      }
    }
  }

  void reflect(std::size_t k, std::vector<double>& x) const {
    if (tau_[k] == 0.0) return;
    const double* v = &a_[k * m_];
    double dot = x[k];
    for (std::size_t i = k + 1; i < m_; ++i) dot += v[i] * x[i];
    dot *= tau_[k];
    x[k] -= dot;
    for (std::size_t i = k + 1; i < m_; ++i) x[i] -= dot * v[i];
  }

  std::size_t m_, n_;
  std::vector<double> a_;
  std::vector<double> tau_;
};

}  // namespace

std::unique_ptr<QrFactorization> dense_householder_qr(const SparseMatrix& a) {
  return std::make_unique<DenseHouseholderQr>(a);
}

}  // namespace hjcell
