// Shared helpers for the unit and acceptance suites: random systems, an
// SVD pseudoinverse oracle and finite-difference Jacobians.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hjcell/problem.hpp"
#include "hjcell/sparse.hpp"

namespace hjcell::test {

inline std::vector<double> random_vector(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = d(rng);
  return v;
}

inline SparseMatrix random_dense(int m, int n, std::mt19937& rng) {
  const auto v = random_vector(m * n, rng);
  return SparseMatrix::from_dense(static_cast<std::size_t>(m), static_cast<std::size_t>(n), v);
}

// Random pattern with the given density plus a shifted diagonal so that the
// matrix has full rank.
inline SparseMatrix random_sparse(int m, int n, double density, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0), u(0.0, 1.0);
  SparseMatrix a(static_cast<std::size_t>(m), static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      if (u(rng) < density) a.add(i, j, d(rng));
  for (int k = 0; k < std::min(m, n); ++k) a.add(k, k, 3.0 + d(rng));
  a.compress();
  return a;
}

inline double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) num += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(num) / std::max(norm(b), 1e-300);
}

inline Eigen::MatrixXd to_eigen(const SparseMatrix& a) {
  const auto d = a.to_dense();
  return Eigen::Map<const Eigen::MatrixXd>(d.data(), static_cast<Eigen::Index>(a.rows()),
                                           static_cast<Eigen::Index>(a.cols()));
}

// -pinv(J) F through a full SVD.
inline std::vector<double> pinv_solution(const SparseMatrix& J, const std::vector<double>& F) {
  const Eigen::MatrixXd A = to_eigen(J);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double tol = 1e-13 * s(0);
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(F.data(), static_cast<Eigen::Index>(F.size()));
  const Eigen::VectorXd c = svd.matrixU().transpose() * b;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(A.cols());
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > tol) y(k) = -c(k) / s(k);
  const Eigen::VectorXd x = svd.matrixV() * y;
  return std::vector<double>(x.data(), x.data() + x.size());
}

// Central differences of the residual, column by column.
inline Eigen::MatrixXd fd_jacobian(const Problem& p, const std::vector<double>& x, double step = 1e-6) {
  const auto m = static_cast<Eigen::Index>(p.n_equations());
  const auto n = static_cast<Eigen::Index>(p.n_unknowns());
  Eigen::MatrixXd J(m, n);
  std::vector<double> w = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = step * std::max(1.0, std::abs(x[j]));
    w[j] = x[j] + h;
    const auto fp = p.residual(w);
    w[j] = x[j] - h;
    const auto fm = p.residual(w);
    w[j] = x[j];
    for (Eigen::Index i = 0; i < m; ++i) J(i, j) = (fp[i] - fm[i]) / (2.0 * h);
  }
  return J;
}

// ||J - J_fd||_F / ||J||_F at x.
inline double jacobian_fd_mismatch(const Problem& p, const std::vector<double>& x) {
  const Eigen::MatrixXd A = to_eigen(p.jacobian(x));
  const Eigen::MatrixXd B = fd_jacobian(p, x);
  return (A - B).norm() / std::max(A.norm(), 1e-300);
}

}  // namespace hjcell::test
