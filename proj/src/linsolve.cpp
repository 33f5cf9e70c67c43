#include "hjcell/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "hjcell/errors.hpp"
#include "hjcell/qr.hpp"

namespace hjcell {
namespace {

bool use_dense(const SparseMatrix& a, const LsqOptions& options) {
  switch (options.backend) {
    case QrBackend::Dense: return true;
    case QrBackend::Sparse: return false;
    case QrBackend::Auto: break;
  }
  return std::min(a.rows(), a.cols()) <= options.dense_threshold || !sparse_qr_available();
}

std::unique_ptr<QrFactorization> factor(const SparseMatrix& tall, const LsqOptions& options) {
  return use_dense(tall, options) ? dense_householder_qr(tall) : sparse_qr(tall);
}

bool rank_deficient(const QrFactorization& qr, double rank_tol) {
  if (qr.reported_rank() < qr.cols()) return true;
  const std::vector<double> d = qr.r_diagonal();
  double largest = 0.0;
  for (double v : d) largest = std::max(largest, std::abs(v));
  if (largest == 0.0) return true;
  return std::any_of(d.begin(), d.end(),
                     [&](double v) { return !(std::abs(v) >= rank_tol * largest); });
}

double norm2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

std::vector<Index> find_dense_rows(const SparseMatrix& a, const LsqOptions& options) {
  if (options.max_dense_rows == 0) return {};
  std::vector<std::size_t> count(a.rows(), 0);
  for (Index r : a.row_index()) ++count[static_cast<std::size_t>(r)];
  const double limit = std::max(64.0, 10.0 * std::sqrt(static_cast<double>(a.cols())));
  std::vector<Index> dense;
  for (std::size_t i = 0; i < a.rows(); ++i)
    if (static_cast<double>(count[i]) > limit) dense.push_back(static_cast<Index>(i));
  if (dense.size() > options.max_dense_rows || dense.size() >= a.rows()) return {};
  return dense;
}

// Triangular solves with the leading r x r block of a compressed [R11 R12].
std::vector<double> solve_upper(const SparseMatrix& R, std::size_t r, std::span<const double> b) {
  const auto p = R.col_ptr();
  const auto ri = R.row_index();
  const auto rx = R.values();
  std::vector<double> y(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(r));
  for (std::size_t j = r; j-- > 0;) {
    double diag = 0.0;
    for (Index k = p[j]; k < p[j + 1]; ++k)
      if (static_cast<std::size_t>(ri[k]) == j) diag = rx[k];
    y[j] /= diag;
    for (Index k = p[j]; k < p[j + 1]; ++k)
      if (static_cast<std::size_t>(ri[k]) < j) y[ri[k]] -= rx[k] * y[j];
  }
  return y;
}

std::vector<double> solve_upper_transposed(const SparseMatrix& R, std::size_t r, std::span<const double> b) {
  const auto p = R.col_ptr();
  const auto ri = R.row_index();
  const auto rx = R.values();
  std::vector<double> y(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(r));
  for (std::size_t j = 0; j < r; ++j) {
    double acc = y[j], diag = 0.0;
    for (Index k = p[j]; k < p[j + 1]; ++k) {
      const auto i = static_cast<std::size_t>(ri[k]);
      if (i < j) acc -= rx[k] * y[i];
      else if (i == j) diag = rx[k];
    }
    y[j] = acc / diag;
  }
  return y;
}

// Least squares for A = [S; D] with D the d dense rows. With t = R11 y1 +
// R12 y2 - c1 the problem becomes min |t|^2 + |G t + H y2 - e|^2, where
// G = D1 R11^-1, H = D2 - G R12 and e = b_d - G c1. Eliminating t leaves a
// d x k problem for the k dead columns y2.
// Columns are scaled to unit norm first. A full-rank solution does not depend
// on the scaling, and it keeps the dead-column tolerance and the rank test
// meaningful when entries span many orders of magnitude (1/m terms).
LsqSolution split_dense_rows(const SparseMatrix& J, std::span<const double> F, const std::vector<Index>& dense_rows,
                             const LsqOptions& options) {
  const std::size_t m = J.rows(), n = J.cols(), d = dense_rows.size();
  LsqSolution sol;
  sol.delta.assign(n, 0.0);

  std::vector<Index> sparse_index(m, -1);
  std::vector<bool> is_dense(m, false);
  for (Index r : dense_rows) is_dense[static_cast<std::size_t>(r)] = true;
  std::vector<double> bs, bd;
  for (std::size_t i = 0; i < m; ++i) {
    if (is_dense[i]) {
      bd.push_back(-F[i]);
    } else {
      sparse_index[i] = static_cast<Index>(bs.size());
      bs.push_back(-F[i]);
    }
  }
  std::vector<std::size_t> dense_slot(m, 0);
  for (std::size_t t = 0; t < d; ++t) dense_slot[static_cast<std::size_t>(dense_rows[t])] = t;

  SparseMatrix S(bs.size(), n);
  S.reserve(J.stored());
  std::vector<std::vector<double>> D(d, std::vector<double>(n, 0.0));
  const auto cp = J.col_ptr();
  const auto ri = J.row_index();
  const auto vx = J.values();
  std::vector<double> scale(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    double sq = 0.0;
    for (Index k = cp[j]; k < cp[j + 1]; ++k) sq += vx[k] * vx[k];
    if (sq > 0.0) scale[j] = 1.0 / std::sqrt(sq);
  }
  for (std::size_t j = 0; j < n; ++j)
    for (Index k = cp[j]; k < cp[j + 1]; ++k) {
      const auto i = static_cast<std::size_t>(ri[k]);
      const double v = vx[k] * scale[j];
      if (is_dense[i]) D[dense_slot[i]][j] = v;
      else S.add(sparse_index[i], static_cast<Index>(j), v);
    }
  S.compress();

  const auto qr = sparse_qr_trapezoidal(S);
  const std::size_t r = qr->rank(), dead = n - r;
  const SparseMatrix& R = qr->r();
  const auto perm = qr->permutation();

  // rank tests: R11 against its own scale, the dead block against the same
  double largest = 0.0, smallest = std::numeric_limits<double>::infinity();
  {
    const auto p = R.col_ptr();
    const auto rri = R.row_index();
    const auto rx = R.values();
    for (std::size_t j = 0; j < r; ++j) {
      double diag = 0.0;
      for (Index k = p[j]; k < p[j + 1]; ++k)
        if (static_cast<std::size_t>(rri[k]) == j) diag = rx[k];
      largest = std::max(largest, std::abs(diag));
      smallest = std::min(smallest, std::abs(diag));
    }
  }
  if (dead > d || (r > 0 && !(smallest >= options.rank_tol * largest))) {
    sol.rank = RankFlag::Deficient;
    return sol;
  }

  std::vector<double> c = bs;
  qr->apply_qt(c);
  c.resize(r);

  // Permuted dense rows, G (d x r) and H (d x dead).
  std::vector<std::vector<double>> G(d), H(d, std::vector<double>(dead, 0.0));
  std::vector<double> e(d);
  const auto p = R.col_ptr();
  const auto rri = R.row_index();
  const auto rx = R.values();
  for (std::size_t t = 0; t < d; ++t) {
    std::vector<double> row(n);
    for (std::size_t k = 0; k < n; ++k) row[k] = D[t][static_cast<std::size_t>(perm[k])];
    G[t] = solve_upper_transposed(R, r, row);
    for (std::size_t j = 0; j < dead; ++j) {
      double acc = row[r + j];
      for (Index k = p[r + j]; k < p[r + j + 1]; ++k) acc -= rx[k] * G[t][static_cast<std::size_t>(rri[k])];
      H[t][j] = acc;
    }
    e[t] = bd[t] - dot(G[t], c);
  }

  // L L^T = I + G G^T
  std::vector<double> L(d * d, 0.0);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b <= a; ++b) {
      double acc = (a == b ? 1.0 : 0.0) + dot(G[a], G[b]);
      for (std::size_t k = 0; k < b; ++k) acc -= L[a * d + k] * L[b * d + k];
      L[a * d + b] = a == b ? std::sqrt(acc) : acc / L[b * d + b];
    }
  auto forward = [&](std::vector<double> v) {
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t k = 0; k < a; ++k) v[a] -= L[a * d + k] * v[k];
      v[a] /= L[a * d + a];
    }
    return v;
  };
  auto backward = [&](std::vector<double> v) {
    for (std::size_t a = d; a-- > 0;) {
      for (std::size_t k = a + 1; k < d; ++k) v[a] -= L[k * d + a] * v[k];
      v[a] /= L[a * d + a];
    }
    return v;
  };

  std::vector<double> y2(dead, 0.0);
  if (dead > 0) {
    std::vector<double> hat(d * dead);
    for (std::size_t j = 0; j < dead; ++j) {
      std::vector<double> col(d);
      for (std::size_t t = 0; t < d; ++t) col[t] = H[t][j];
      col = forward(std::move(col));
      for (std::size_t t = 0; t < d; ++t) hat[j * d + t] = col[t];
    }
    const auto small = dense_householder_qr(SparseMatrix::from_dense(d, dead, hat));
    for (double v : small->r_diagonal())
      if (!(std::abs(v) >= options.rank_tol * largest)) {
        sol.rank = RankFlag::Deficient;
        return sol;
      }
    std::vector<double> rhs = forward(e);
    small->apply_qt(rhs);
    rhs.resize(dead);
    y2 = small->solve_r(rhs);
  }

  // t = G^T (I + G G^T)^-1 (e - H y2)
  std::vector<double> f(d);
  for (std::size_t t = 0; t < d; ++t) f[t] = e[t] - dot(H[t], y2);
  const std::vector<double> w = backward(forward(f));
  std::vector<double> rhs1 = c;
  for (std::size_t t = 0; t < d; ++t)
    for (std::size_t k = 0; k < r; ++k) rhs1[k] += G[t][k] * w[t];
  for (std::size_t j = 0; j < dead; ++j)
    for (Index k = p[r + j]; k < p[r + j + 1]; ++k) rhs1[static_cast<std::size_t>(rri[k])] -= rx[k] * y2[j];
  const std::vector<double> y1 = solve_upper(R, r, rhs1);

  for (std::size_t k = 0; k < r; ++k) {
    const auto col = static_cast<std::size_t>(perm[k]);
    sol.delta[col] = y1[k] * scale[col];
  }
  for (std::size_t j = 0; j < dead; ++j) {
    const auto col = static_cast<std::size_t>(perm[r + j]);
    sol.delta[col] = y2[j] * scale[col];
  }
  return sol;
}

}  // namespace

LsqSolution qr_least_squares(const SparseMatrix& J, std::span<const double> F,
                             const LsqOptions& options) {
  detail::require(F.size() == J.rows(), "qr_least_squares: F has " + std::to_string(F.size()) +
                                            " entries for a Jacobian with " +
                                            std::to_string(J.rows()) + " rows");
  detail::require(options.rank_tol > 0.0, "qr_least_squares: rank_tol must be positive");

  const std::size_t m = J.rows();
  const std::size_t n = J.cols();
  LsqSolution sol;
  sol.delta.assign(n, 0.0);

  std::vector<Index> dense_rows;
  SparseMatrix a = J;
  a.compress();
  if (m >= n && !use_dense(a, options)) dense_rows = find_dense_rows(a, options);

  if (!dense_rows.empty()) {
    sol = split_dense_rows(a, F, dense_rows, options);
    if (sol.rank == RankFlag::Deficient) return sol;
  } else if (m >= n) {
    const auto qr = factor(a, options);
    if (rank_deficient(*qr, options.rank_tol)) {
      sol.rank = RankFlag::Deficient;
      return sol;
    }
    std::vector<double> c(F.begin(), F.end());
    qr->apply_qt(c);
    std::vector<double> rhs(n);
    for (std::size_t k = 0; k < n; ++k) rhs[k] = -c[k];
    const std::vector<double> y = qr->solve_r(rhs);
    const auto perm = qr->permutation();
    for (std::size_t k = 0; k < n; ++k) sol.delta[perm.empty() ? k : perm[k]] = y[k];
  } else {
    const SparseMatrix at = J.transposed();
    const auto qr = factor(at, options);
    if (rank_deficient(*qr, options.rank_tol)) {
      sol.rank = RankFlag::Deficient;
      return sol;
    }
    const auto perm = qr->permutation();
    std::vector<double> rhs(m);
    for (std::size_t k = 0; k < m; ++k) rhs[k] = -F[perm.empty() ? k : perm[k]];
    const std::vector<double> z1 = qr->solve_rt(rhs);
    std::vector<double> z(n, 0.0);
    std::copy(z1.begin(), z1.end(), z.begin());
    qr->apply_q(z);
    sol.delta = std::move(z);
  }

  std::vector<double> r = a.multiply(sol.delta);
  for (std::size_t i = 0; i < m; ++i) r[i] += F[i];
  sol.residual_norm = norm2(r);
  return sol;
}

SparseMatrix regularize_diagonal(const SparseMatrix& J, double tau) {
  detail::require_config(tau > 0.0, "regularize_diagonal: tau must be positive");
  SparseMatrix out = J;
  const std::size_t k = std::min(J.rows(), J.cols());
  out.reserve(out.stored() + k);
  for (std::size_t i = 0; i < k; ++i) out.add(static_cast<Index>(i), static_cast<Index>(i), tau);
  out.compress();
  return out;
}

}  // namespace hjcell
