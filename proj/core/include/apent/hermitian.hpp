#pragma once

#include <Eigen/Dense>
#include <vector>

namespace apent {

using CMat = Eigen::MatrixXcd;

// Relative pivot threshold below which a Gram matrix counts as singular
// (log-determinant -inf), and the tolerance beyond which negative directions
// are rejected as "not positive semidefinite" rather than projected away.
inline constexpr double kSingTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

CMat submatrix(const CMat& Q, const std::vector<int>& rows,
               const std::vector<int>& cols);

// log det of a positive semidefinite Hermitian matrix via diagonally pivoted
// Cholesky: -inf when some pivot falls below kSingTol * (trace/dim), throws
// std::domain_error when a pivot is negative beyond kPsdTol scale, and
// std::invalid_argument when the input is not Hermitian. 0x0 gives 0.
double chol_logdet(const CMat& Q);

// Entropy of the tuple with Gram matrix Q: (1/2) log det Q.
double h_gram(const CMat& Q);

// Greedy maximal nonsingular principal submatrix, scanning indices in order
// and keeping those whose Cholesky pivot stays above the singularity
// threshold. For PSD input the kept columns span the range.
std::vector<int> greedy_spanning_subset(const CMat& Q);

// Schur complement Q[a] - Q[a,b] Q[b]^+ Q[b,a]; a singular Q[b] is trimmed
// to a spanning subset first, which for PSD Q agrees with the pseudoinverse.
CMat schur_complement(const CMat& Q, const std::vector<int>& a,
                      const std::vector<int>& b);

// Conditional entropy h(a | b) = (1/2) log det of the Schur complement.
double cond_h(const CMat& Q, const std::vector<int>& a,
              const std::vector<int>& b);

// Log-determinants of all leading principal submatrices whose size is a
// multiple of `block`, from one unpivoted Cholesky pass: entry i covers the
// first (i+1)*block rows. Once a prefix goes singular every later entry is
// -inf. Throws like chol_logdet on indefinite input.
std::vector<double> prefix_block_logdets(const CMat& Q, int block);

// Mutual information between index blocks, computed from the contraction of
// the (trimmed) two-block compression: -1/2 log det(I - C*C). Nonnegative;
// +inf when the blocks overlap linearly.
double mutual_info(const CMat& Q, const std::vector<int>& a,
                   const std::vector<int>& b);
double cond_mutual_info(const CMat& Q, const std::vector<int>& a,
                        const std::vector<int>& b, const std::vector<int>& c);

// Hermitian square root with negative eigenvalues clamped to zero, and the
// pseudoinverse square root (eigenvalues at or below the relative threshold
// dropped).
CMat herm_sqrt(const CMat& Q);
CMat herm_pinv_sqrt(const CMat& Q);

// Largest singular value.
double op_norm(const CMat& A);

// The unique minimal-norm C with Q12 = Q11^{1/2} C Q22^{1/2}, where Q11 is
// the leading d1 x d1 block of Q. Same shape as Q12; a contraction when Q
// is PSD, strict exactly when Q is nonsingular.
CMat two_block_contraction(const CMat& Q, int d1);

}  // namespace apent
