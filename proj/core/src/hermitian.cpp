#include "apent/hermitian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace apent {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_hermitian(const CMat& Q, const char* who) {
  if (Q.rows() != Q.cols())
    throw std::invalid_argument(std::string(who) + ": matrix is " +
                                std::to_string(Q.rows()) + "x" +
                                std::to_string(Q.cols()) + ", not square");
  if (Q.size() == 0) return;
  double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  double dev = (Q - Q.adjoint()).cwiseAbs().maxCoeff();
  if (dev > 1e-10 * scale)
    throw std::invalid_argument(std::string(who) +
                                ": matrix is not Hermitian (deviation " +
                                std::to_string(dev) + ")");
}

double diag_scale(const CMat& Q) {
  double dmax = 0.0;
  for (int i = 0; i < Q.rows(); ++i)
    dmax = std::max(dmax, Q(i, i).real());
  return dmax;
}

}  // namespace

CMat submatrix(const CMat& Q, const std::vector<int>& rows,
               const std::vector<int>& cols) {
  CMat out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(i, j) = Q(rows[i], cols[j]);
  return out;
}

double chol_logdet(const CMat& Q) {
  require_hermitian(Q, "chol_logdet");
  const int n = static_cast<int>(Q.rows());
  if (n == 0) return 0.0;
  double dmax = 0.0, dmin = 0.0, dsum = 0.0;
  for (int i = 0; i < n; ++i) {
    double d = Q(i, i).real();
    dmax = std::max(dmax, d);
    dmin = std::min(dmin, d);
    dsum += d;
  }
  if (dmin < -kPsdTol * n * std::max(dmax, -dmin))
    throw std::domain_error("chol_logdet: negative diagonal entry " +
                            std::to_string(dmin));
  if (dmax <= 0.0) {
    // Numerically zero diagonal: PSD forces the whole matrix to vanish.
    if (Q.cwiseAbs().maxCoeff() > kPsdTol)
      throw std::domain_error(
          "chol_logdet: zero diagonal with off-diagonal mass");
    return -kInf;
  }
  const double scale = dsum / n;
  const double sing_thr = kSingTol * scale;
  const double neg_thr = -kPsdTol * scale * n;

  // Diagonally pivoted Cholesky; only pivots and the factor's rows for the
  // active set are kept.
  CMat A = Q;
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  double logdet = 0.0;
  for (int step = 0; step < n; ++step) {
    int best = step;
    for (int i = step + 1; i < n; ++i)
      if (A(perm[i], perm[i]).real() > A(perm[best], perm[best]).real())
        best = i;
    std::swap(perm[step], perm[best]);
    int p = perm[step];
    double piv = A(p, p).real();
    if (piv < neg_thr)
      throw std::domain_error("chol_logdet: not positive semidefinite, pivot " +
                              std::to_string(piv) + " at step " +
                              std::to_string(step));
    if (piv <= sing_thr) {
      // Remaining diagonal is at or below the singularity threshold; make
      // sure nothing clearly negative hides behind it.
      for (int i = step; i < n; ++i)
        if (A(perm[i], perm[i]).real() < neg_thr)
          throw std::domain_error(
              "chol_logdet: not positive semidefinite, pivot " +
              std::to_string(A(perm[i], perm[i]).real()));
      return -kInf;
    }
    logdet += std::log(piv);
    for (int i = step + 1; i < n; ++i) {
      int q = perm[i];
      std::complex<double> f = A(q, p) / piv;
      for (int j = step + 1; j < n; ++j) {
        int r = perm[j];
        A(q, r) -= f * std::conj(A(r, p));
      }
    }
  }
  return logdet;
}

double h_gram(const CMat& Q) { return 0.5 * chol_logdet(Q); }

std::vector<double> prefix_block_logdets(const CMat& Q, int block) {
  require_hermitian(Q, "prefix_block_logdets");
  const int n = static_cast<int>(Q.rows());
  if (block < 1 || n % block != 0)
    throw std::invalid_argument("prefix_block_logdets: size " +
                                std::to_string(n) +
                                " is not a multiple of block " +
                                std::to_string(block));
  std::vector<double> out;
  if (n == 0) return out;
  out.reserve(n / block);

  double dmax = 0.0, dmin = 0.0, dsum = 0.0;
  for (int i = 0; i < n; ++i) {
    double d = Q(i, i).real();
    dmax = std::max(dmax, d);
    dmin = std::min(dmin, d);
    dsum += d;
  }
  if (dmin < -kPsdTol * n * std::max(dmax, -dmin))
    throw std::domain_error("prefix_block_logdets: negative diagonal entry " +
                            std::to_string(dmin));
  const double scale = dsum / n;
  const double sing_thr = kSingTol * std::max(scale, 0.0);
  const double neg_thr = -kPsdTol * std::max(scale, 0.0) * n;

  CMat A = Q;
  double logdet = 0.0;
  for (int j = 0; j < n; ++j) {
    double piv = A(j, j).real();
    if (piv < neg_thr)
      throw std::domain_error(
          "prefix_block_logdets: not positive semidefinite, pivot " +
          std::to_string(piv) + " at index " + std::to_string(j));
    if (piv <= sing_thr) {
      // Every prefix from here on is singular.
      while (static_cast<int>(out.size()) < n / block)
        out.push_back(-std::numeric_limits<double>::infinity());
      return out;
    }
    logdet += std::log(piv);
    // Right-looking update confined to the lower triangle, which is all the
    // later iterations read.
    for (int q = j + 1; q < n; ++q) {
      std::complex<double> f = A(q, j) / piv;
      for (int r = j + 1; r <= q; ++r) A(q, r) -= f * std::conj(A(r, j));
    }
    if ((j + 1) % block == 0) out.push_back(logdet);
  }
  return out;
}

std::vector<int> greedy_spanning_subset(const CMat& Q) {
  require_hermitian(Q, "greedy_spanning_subset");
  const int n = static_cast<int>(Q.rows());
  std::vector<int> kept;
  if (n == 0) return kept;
  double scale = diag_scale(Q);
  if (scale <= 0.0) return kept;
  const double thr = kSingTol * scale;

  // Incremental Cholesky of Q[kept, kept] = L L*, indices scanned in order;
  // j is kept when its pivot stays above the singularity threshold.
  CMat L = CMat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const int m = static_cast<int>(kept.size());
    Eigen::VectorXcd y(m);
    for (int i = 0; i < m; ++i) {
      std::complex<double> s = Q(kept[i], j);
      for (int t = 0; t < i; ++t) s -= L(i, t) * y(t);
      y(i) = s / L(i, i);
    }
    double piv = Q(j, j).real() - (m > 0 ? y.squaredNorm() : 0.0);
    if (piv > thr) {
      for (int i = 0; i < m; ++i) L(m, i) = std::conj(y(i));
      L(m, m) = std::sqrt(piv);
      kept.push_back(j);
    }
  }
  return kept;
}

CMat schur_complement(const CMat& Q, const std::vector<int>& a,
                      const std::vector<int>& b) {
  require_hermitian(Q, "schur_complement");
  CMat B = submatrix(Q, b, b);
  std::vector<int> keep = greedy_spanning_subset(B);
  std::vector<int> b2;
  for (int i : keep) b2.push_back(b[i]);
  CMat A = submatrix(Q, a, a);
  if (b2.empty()) return A;
  CMat B2 = submatrix(Q, b2, b2);
  CMat R = submatrix(Q, b2, a);
  Eigen::LLT<CMat> llt(B2);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("schur_complement: conditioning block not PSD");
  CMat S = A - R.adjoint() * llt.solve(R);
  S = 0.5 * (S + S.adjoint().eval());
  // A row whose conditional norm collapses relative to its unconditional one
  // lies in the span of the conditioning block; flush it to exact zero so the
  // residual noise is not mistaken for a tiny positive determinant.
  for (std::size_t i = 0; i < a.size(); ++i) {
    double orig = Q(a[i], a[i]).real();
    if (S(i, i).real() <= kSingTol * std::max(orig, 0.0)) {
      S.row(i).setZero();
      S.col(i).setZero();
    }
  }
  return S;
}

double cond_h(const CMat& Q, const std::vector<int>& a,
              const std::vector<int>& b) {
  return h_gram(schur_complement(Q, a, b));
}

CMat herm_sqrt(const CMat& Q) {
  require_hermitian(Q, "herm_sqrt");
  if (Q.rows() == 0) return Q;
  Eigen::SelfAdjointEigenSolver<CMat> es(Q);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

CMat herm_pinv_sqrt(const CMat& Q) {
  require_hermitian(Q, "herm_pinv_sqrt");
  if (Q.rows() == 0) return Q;
  Eigen::SelfAdjointEigenSolver<CMat> es(Q);
  Eigen::VectorXd lam = es.eigenvalues();
  double thr = kSingTol * std::max(0.0, lam.maxCoeff());
  Eigen::VectorXd inv(lam.size());
  for (int i = 0; i < lam.size(); ++i)
    inv(i) = lam(i) > thr ? 1.0 / std::sqrt(lam(i)) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

double op_norm(const CMat& A) {
  if (A.rows() == 0 || A.cols() == 0) return 0.0;
  return A.jacobiSvd().singularValues()(0);
}

CMat two_block_contraction(const CMat& Q, int d1) {
  require_hermitian(Q, "two_block_contraction");
  const int n = static_cast<int>(Q.rows());
  if (d1 < 0 || d1 > n)
    throw std::invalid_argument("two_block_contraction: block size " +
                                std::to_string(d1) + " out of range");
  CMat q11 = Q.topLeftCorner(d1, d1);
  CMat q22 = Q.bottomRightCorner(n - d1, n - d1);
  CMat r = Q.topRightCorner(d1, n - d1);
  return herm_pinv_sqrt(q11) * r * herm_pinv_sqrt(q22);
}

double mutual_info(const CMat& Q, const std::vector<int>& a,
                   const std::vector<int>& b) {
  require_hermitian(Q, "mutual_info");
  std::vector<int> a2, b2;
  for (int i : greedy_spanning_subset(submatrix(Q, a, a))) a2.push_back(a[i]);
  for (int i : greedy_spanning_subset(submatrix(Q, b, b))) b2.push_back(b[i]);
  if (a2.empty() || b2.empty()) return 0.0;
  std::vector<int> ab = a2;
  ab.insert(ab.end(), b2.begin(), b2.end());
  CMat C = two_block_contraction(submatrix(Q, ab, ab),
                                 static_cast<int>(a2.size()));
  // -1/2 log det(I - C*C) through the singular values of C; a singular value
  // at one signals linear dependence across the blocks, hence infinite
  // information.
  Eigen::VectorXd sv = C.jacobiSvd().singularValues();
  double acc = 0.0;
  for (int i = 0; i < sv.size(); ++i) {
    double s2 = sv(i) * sv(i);
    if (s2 >= 1.0 - kSingTol) return kInf;
    acc += std::log1p(-s2);
  }
  return std::max(0.0, -0.5 * acc);
}

double cond_mutual_info(const CMat& Q, const std::vector<int>& a,
                        const std::vector<int>& b, const std::vector<int>& c) {
  std::vector<int> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  CMat S = schur_complement(Q, ab, c);
  std::vector<int> ia(a.size()), ib(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ia[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < b.size(); ++i)
    ib[i] = static_cast<int>(a.size() + i);
  return mutual_info(S, ia, ib);
}

}  // namespace apent
