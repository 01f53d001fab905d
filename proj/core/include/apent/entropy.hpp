#pragma once

#include <string>
#include <vector>

#include "apent/chain.hpp"
#include "apent/pdf.hpp"

namespace apent {

// Tolerance for declaring the two ball formulas converged to a common value,
// the growth-rate threshold separating tempered sphere norms from exponential
// ones (nats per step; nontempered needs three times this), and the
// closeness-to-zero threshold for classifying mollification trends.
inline constexpr double kGapTol = 1e-8;
inline constexpr double kRateTol = 0.02;
inline constexpr double kMollifyZeroTol = 0.02;

// log det q - sum over generators s of log det q[F cap sF], for a Gram matrix
// of k x k blocks over a grounded word set F; -inf exactly when q is
// singular. For a unital Toeplitz q this is the exponential growth rate
// (negative large-deviations rate) of the probability that a Haar-random
// representation approximately realizes q. Throws std::invalid_argument when
// the word set is not grounded.
double h_grounded(const BlockGram& q);

// First entropy formula at radius n:
//   log det phi[B_n] - sum_s log det phi[B_n cap sB_n].
// Equals h_grounded of phi[B_n]; non-increasing from n = 1 with the annealed
// entropy as limit. Needs radius >= 2n.
double seq1(const PdFunction& phi, int n);

// Second entropy formula at radius n:
//   sum_s log det phi[B_n cup sB_n] - (2r-1) log det phi[B_n].
// Same limit, interleaved as seq2(n+1) <= seq1(n+1) <= seq2(n). Needs radius
// >= 2n+1.
double seq2(const PdFunction& phi, int n);

// Telescoped series over a length-lexicographic enumeration. value is the
// partial (1/2)(log det phi[B_{N+1}] - (2r-1) log det phi[B_N]), which equals
// (seq1(N+1) + seq2(N))/2 and converges to the annealed entropy; terms[i-1]
// is the conditional-entropy drop contributed by the i-th chain word (one per
// non-identity word of B_{N+1}, each <= 0); partials[n] is the value at
// radius n <= N, non-increasing. Throws std::invalid_argument when the chain
// is not a length-lexicographic enumeration covering B_{N+1}, and
// std::out_of_range when the radius cannot support the Gram matrix.
struct SewardSum {
  double value;
  std::vector<double> terms;
  std::vector<double> partials;
};
SewardSum seward_sum(const PdFunction& phi, int N, const GroundedChain& chain);

// Partial sums of log det(I - C_i* C_i) over the coefficients of phi along
// the first N chain steps. Terms are <= 0; for a unital phi and a chain
// covering B_n the sum equals seq1(phi, n), and full-series limits are
// chain-independent. Throws std::domain_error on a singular intermediate
// Gram matrix (a singular final set gives a -inf last term instead).
struct VerblunskySeries {
  double value;
  std::vector<double> terms;
};
VerblunskySeries verblunsky_series(const PdFunction& phi,
                                   const GroundedChain& chain, std::size_t N);

// One report row. Row n pairs the ball-(n+1) intersection formula with the
// ball-n union formula, the bracket that tightens to the common limit:
//   seq1 = seq1(phi, n+1), seq2 = seq2(phi, n), avg their mean,
//   seward_partial the telescoped partial at radius n,
//   verblunsky_partial the coefficient series summed over the words of
//   B_{n+1}. All five columns converge to the annealed entropy.
struct EntropyRow {
  int n;
  double seq1;
  double seq2;
  double avg;
  double seward_partial;
  double verblunsky_partial;
};

struct EntropyReport {
  int rank = 0;
  int k = 0;
  int max_n = -1;      // rows cover n = 0..max_n
  int radius_used = 0;  // values consumed up to this word length
  double gap_tol = kGapTol;
  std::vector<EntropyRow> rows;
  // seq1 is always an upper bound for the limit, so upper is sound at any
  // truncation; value is the common value when the last gap closes (or when
  // upper is -inf, which settles the limit exactly), else NaN with the
  // bracket left as [upper - unknown tail, upper].
  bool converged = false;
  double value = 0.0;
  double upper = 0.0;
  double gap = 0.0;
  int first_singular_n = -1;  // smallest n with a -inf column, -1 if none
  bool negative_witness = false;  // upper < 0 certifies a negative limit
};

// Evaluates all formula columns for n = 0..max_n, clamped to what the radius
// supports (row n needs radius 2n+2). Throws std::out_of_range when not even
// row 0 is feasible. phi(e) must be nonsingular for finite results; a
// singular phi(e) yields an all -inf report.
EntropyReport h_ann(const PdFunction& phi, int max_n = 2,
                    double gap_tol = kGapTol);

// Annealed entropy along a decreasing mollification schedule s_1 > ... > 0:
// h[i] is the reported upper bound for mollify(phi, s[i]). For tempered phi
// the values increase to 0 as s decreases; a value stuck below zero at the
// finest s witnesses a negative zeroth-order entropy. classification is
// "->0" when the finest value clears -kMollifyZeroTol, else
// "bounded below 0". Requires unital phi and a strictly decreasing schedule
// in (0, 1].
struct MollifiedTrace {
  std::vector<double> s;
  std::vector<double> h;
  std::vector<bool> converged;
  bool increasing = false;
  std::string classification;
};
MollifiedTrace h_zero_mollified(const PdFunction& phi,
                                const std::vector<double>& schedule,
                                int max_n = 2);

// l2 norm of phi restricted to the sphere of radius m (Frobenius norm across
// the block), closed form for regular / letter-multiplicative / mollified
// kinds, enumeration for tables. Needs radius >= m.
double sphere_l2(const PdFunction& phi, int m);

// Paired sphere norms w(n) = |phi 1_{S_{2n-1}}|_2 + |phi 1_{S_2n}|_2 and
// their window sums W(n) = 1 + 4 sum_{l<=n} (n+1-l)^2 w(l), n = 1..N
// (stored at index n-1). c is the structural lower positivity constant
// (1 - s for mollified, 1 for regular, 0 when unknown). Needs radius >= 2N.
struct SphereNorms {
  std::vector<double> w;
  std::vector<double> W;
  double c = 0.0;
};
SphereNorms sphere_norms(const PdFunction& phi, int N);

// Least-squares growth rate of log |phi 1_{S_n}|_2 over n in [N/2, N].
// Subexponential sphere norms characterize temperedness, so the slope
// classifies: tempered when <= rate_tol, nontempered when >= 3 rate_tol,
// else inconclusive. Zero-norm spheres are dropped; all-zero windows are
// tempered with slope -inf. Needs radius >= N.
struct TemperedReport {
  double slope = 0.0;
  double rate_tol = kRateTol;
  int n_lo = 0;
  int n_hi = 0;
  std::string classification;
};
TemperedReport tempered_test(const PdFunction& phi, int N,
                             double rate_tol = kRateTol);

// max over n <= N of c w(n)^2 / (8 n W(n)^2): a certified lower bound on the
// size |h| of the (negative) annealed entropy for normalized phi dominating
// c times the regular character. c must lie in (0, 1].
double hann_aux_bound(const PdFunction& phi, double c, int N);

// The discrete Gronwall constant delta(eps) =
// 1 / (1 + 4 e^{2 eps} (1 + e^{-eps}) / (1 - e^{-eps})^3).
double gronwall_delta(double eps);

// Checks, for v(1), v(2), ... >= 0 and A >= 1, that every n satisfies
// v(n) <= A e^{eps n} or v(n) <= delta V(n) with
// V(n) = 1 + 4 sum_{l < n} (n+1-l)^2 v(l), and (when the hypothesis holds)
// that the conclusion v(n) <= A e^{eps n} holds on the whole range. The
// conclusion is not asserted when the hypothesis fails. Failure indices are
// 1-based.
struct GronwallResult {
  bool hypothesis = false;
  bool conclusion = false;
  int first_hypothesis_failure = -1;
  int first_conclusion_failure = -1;
  bool ok() const { return hypothesis && conclusion; }
};
GronwallResult gronwall_check(const std::vector<double>& v, double eps,
                              double delta, double A);

}  // namespace apent
