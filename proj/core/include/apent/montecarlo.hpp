#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "apent/chain.hpp"
#include "apent/hermitian.hpp"
#include "apent/pdf.hpp"

namespace apent {

// Counter-based generator: the stream position is a pure function of
// (seed, stream, draw index), so independent streams can be laid out over
// sample blocks and replayed bit-identically for any worker schedule.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  double uniform();  // [0, 1)
  double normal();   // standard real Gaussian
  std::complex<double> cnormal();  // E|z|^2 = 1

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Samples are processed in fixed blocks; block j always draws from stream
// (base stream * kStreamStride + j), so results do not depend on how blocks
// are scheduled across workers.
inline constexpr long kBlockSamples = 4096;
inline constexpr std::uint64_t kStreamStride = 1u << 20;

// Haar-distributed unitary: QR of an i.i.d. complex-Gaussian matrix with the
// R diagonal rotated to be positive real.
CMat haar_unitary(int n, StreamRng& rng);

// Haar-random unitary representation: independent generator images;
// inverse letters act by the adjoint.
struct RandomRep {
  int n = 0;
  std::vector<CMat> gens;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  CMat image(Letter l) const;
};
RandomRep sample_rep(int rank, int n, StreamRng& rng);
RandomRep sample_rep(int rank, int n, std::uint64_t seed, std::uint64_t stream);

// First k columns of the identity, the canonical orthonormal frame.
CMat canonical_frame(int n, int k);

// Gram matrix of the orbit {pi(g)V : g in F}: blocks V* pi(g^{-1} h) V,
// assembled from prefix-memoized products, so it is exactly positive
// semidefinite and exactly constant on equal quotients. V must have
// orthonormal columns (within 1e-10).
BlockGram orbit_gram(const RandomRep& rep, const CMat& V,
                     const std::vector<Word>& F);

// First l rows of a Haar-random k-frame in dimension n: the projected-frame
// distribution. For l = n this is a full Haar frame.
CMat sigma_sample(int n, int l, int k, StreamRng& rng);

// Verblunsky coefficients of the empirical orbit function along the chain:
// assembles phi(w) = V* pi(w) V on the quotients of the chain's word set and
// extracts through the positive definite codec. Throws like the codec on a
// singular intermediate Gram matrix; requires n >= k * |chain|.
VerblunskySeq empirical_verblunsky(const RandomRep& rep, const CMat& V,
                                   const GroundedChain& chain);

struct McStat {
  std::string name;
  double value = 0.0;
  double se = 0.0;
};
struct McVerdict {
  std::string name;
  bool pass = false;
  std::string detail;
};
struct McReport {
  std::string experiment;
  std::uint64_t seed = 0;
  long samples = 0;
  std::vector<McStat> stats;
  std::vector<McVerdict> verdicts;
  bool pass = true;
};

// Empirical decay rate of P(max-norm distance of the orbit Gram matrix from
// the target < eps) across the dimension grid. The bracket [rate_lo,
// rate_hi] is the extremal grounded-formula value over the realizable
// (unit-diagonal, quotient-respecting) closed eps-window, which the slope
// approaches from inside as eps shrinks. Point i of the grid draws
// samples[i] replicas. A grid point with zero hits marks the report
// infeasible instead of throwing.
struct LdpPoint {
  int n = 0;
  long samples = 0;
  long hits = 0;
  double log_p = 0.0;
  double se = 0.0;
};
struct LdpReport {
  std::vector<LdpPoint> points;
  double slope = 0.0;
  double slope_se = 0.0;
  double rate_lo = 0.0;
  double rate_hi = 0.0;
  bool feasible = true;
  int first_empty_n = -1;
};
LdpReport ldp_slope(const std::vector<Word>& F, const BlockGram& q, double eps,
                    const std::vector<int>& n_grid,
                    const std::vector<long>& samples, std::uint64_t seed,
                    int workers = 1);

// log( vol T(n,O) / v(n)^k ) for T(n,O) the n x k matrices whose Gram lies
// in O = {Q' psd : |Q' - Q|_max <= window/2}, estimated by importance
// sampling of Gaussian tuples matched to Q (log-sum-exp reduction). The
// quantity grows like n log det Q. k <= 2 and Q nonsingular.
struct TypesPoint {
  int n = 0;
  long samples = 0;
  long hits = 0;
  double log_fraction = 0.0;
  double se = 0.0;
};
TypesPoint types_volume_mc(const CMat& Q, double window, int n, long samples,
                           std::uint64_t seed, std::uint64_t stream = 0,
                           int workers = 1);

// Conditional variant: Q is (l+k) x (l+k) with identity corner I_l, fixing
// the first l coordinates as a frame; the window applies to the off-corner
// block R and to the Schur complement of the varying block, so the volume
// factorizes exactly and the rate becomes n log det(Schur complement).
TypesPoint types_volume_cond_mc(const CMat& Q, int l, double window, int n,
                                long samples, std::uint64_t seed,
                                std::uint64_t stream = 0, int workers = 1);

// Normalized traces of pi(g) over Haar-random representations: means with
// standard errors per word, variance stats, and null verdicts for g != e
// (|mean| within 4 max(1,|g|)/n of zero).
McReport trace_check(int rank, int n, const std::vector<Word>& words,
                     long samples, std::uint64_t seed, int workers = 1);

// Moments of the projected-frame distribution: mean squared Hilbert-Schmidt
// norm against lk/n, strict-contraction violations for l < n, and (for the
// scalar case l = k = 1, n > 1) Kolmogorov-Smirnov against the exact law of
// the squared entry.
McReport sigma_check(int n, int l, int k, long samples, std::uint64_t seed,
                     int workers = 1);

// The independence/distribution battery for empirical Verblunsky
// coefficients along a chain (block size one): per-step Hilbert-Schmidt
// moments against the projected-frame law, Kolmogorov-Smirnov on the first
// coefficient against its exact density, pairwise Pearson correlations and
// a distance correlation on a subsample across all coefficient entries,
// and a count of singular intermediates (expected zero).
McReport kn_battery(int rank, int n, const GroundedChain& chain, long samples,
                    std::uint64_t seed, long subsample = 2000,
                    int workers = 1);

// Statistics helpers. ks_statistic sorts a copy of the values and compares
// against the given CDF; ks_pass_1pct applies the finite-sample adjusted
// 1% critical value for a fully specified distribution.
double ks_statistic(std::vector<double> values,
                    const std::function<double(double)>& cdf);
bool ks_pass_1pct(double d, long n);
double pearson(const std::vector<double>& x, const std::vector<double>& y);
// Distance correlation of paired d-dimensional points, rows of x and y.
double distance_correlation(const std::vector<std::vector<double>>& x,
                            const std::vector<std::vector<double>>& y);
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};
// Weighted least squares with per-point standard errors (weights 1/se^2;
// se entries must be positive).
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& se);

}  // namespace apent
