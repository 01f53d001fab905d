#include "apent/montecarlo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <utility>

#include "apent/entropy.hpp"

namespace apent {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Fixed pairwise combination trees: the reduction shape depends only on the
// block count, never on scheduling.
double tree_total(std::vector<double> parts) {
  if (parts.empty()) return 0.0;
  while (parts.size() > 1) {
    std::vector<double> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2)
      next.push_back(parts[i] + parts[i + 1]);
    if (parts.size() % 2 != 0) next.push_back(parts.back());
    parts = std::move(next);
  }
  return parts[0];
}

std::vector<double> tree_total_vec(std::vector<std::vector<double>> parts) {
  if (parts.empty()) return {};
  while (parts.size() > 1) {
    std::vector<std::vector<double>> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
      std::vector<double> s = parts[i];
      for (std::size_t j = 0; j < s.size(); ++j) s[j] += parts[i + 1][j];
      next.push_back(std::move(s));
    }
    if (parts.size() % 2 != 0) next.push_back(parts.back());
    parts = std::move(next);
  }
  return parts[0];
}

// Streaming log-sum-exp accumulator with a second moment, mergeable in a
// fixed tree.
struct Lse {
  double m = -kInf;
  double s = 0.0;
  double s2 = 0.0;
  long hits = 0;

  void add(double v) {
    if (hits == 0 || v > m) {
      double f = hits == 0 ? 0.0 : std::exp(m - v);
      s = s * f + 1.0;
      s2 = s2 * f * f + 1.0;
      m = v;
    } else {
      double f = std::exp(v - m);
      s += f;
      s2 += f * f;
    }
    ++hits;
  }

  static Lse merge(const Lse& a, const Lse& b) {
    if (a.hits == 0) return b;
    if (b.hits == 0) return a;
    Lse r;
    r.m = std::max(a.m, b.m);
    double fa = std::exp(a.m - r.m);
    double fb = std::exp(b.m - r.m);
    r.s = a.s * fa + b.s * fb;
    r.s2 = a.s2 * fa * fa + b.s2 * fb * fb;
    r.hits = a.hits + b.hits;
    return r;
  }
};

Lse tree_lse(std::vector<Lse> parts) {
  if (parts.empty()) return {};
  while (parts.size() > 1) {
    std::vector<Lse> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2)
      next.push_back(Lse::merge(parts[i], parts[i + 1]));
    if (parts.size() % 2 != 0) next.push_back(parts.back());
    parts = std::move(next);
  }
  return parts[0];
}

long block_count(long samples) {
  return (samples + kBlockSamples - 1) / kBlockSamples;
}
long block_quota(long samples, long b) {
  return std::min<long>(kBlockSamples, samples - b * kBlockSamples);
}

// Runs fn(b) for b in [0, nb) on up to `workers` threads. Each call writes
// only its own slot, so the result does not depend on the schedule; the
// first exception wins and is rethrown after the join.
template <class F>
void run_blocks(long nb, int workers, F&& fn) {
  long w = std::min<long>(std::max(workers, 1), nb);
  if (w <= 1) {
    for (long b = 0; b < nb; ++b) fn(b);
    return;
  }
  std::atomic<long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (long t = 0; t < w; ++t)
    pool.emplace_back([&] {
      for (long b = next.fetch_add(1); b < nb && !failed;
           b = next.fetch_add(1)) {
        try {
          fn(b);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
          failed = true;
        }
      }
    });
  for (std::thread& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::string strf(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void check_frame(const RandomRep& rep, const CMat& V, const char* who) {
  if (rep.n < 1 || rep.gens.empty())
    throw std::invalid_argument(std::string(who) + ": empty representation");
  for (const CMat& u : rep.gens)
    if (u.rows() != rep.n || u.cols() != rep.n)
      throw std::invalid_argument(std::string(who) +
                                  ": generator image has the wrong shape");
  if (V.rows() != rep.n || V.cols() < 1 || V.cols() > V.rows())
    throw std::invalid_argument(std::string(who) +
                                ": frame shape does not match the dimension");
  int k = static_cast<int>(V.cols());
  double err =
      (V.adjoint() * V - CMat::Identity(k, k)).cwiseAbs().maxCoeff();
  if (err > 1e-10)
    throw std::invalid_argument(std::string(who) +
                                ": frame columns are not orthonormal");
}

// Orbit vectors pi(g)V memoized over drop_leftmost prefixes.
class OrbitVectors {
 public:
  OrbitVectors(const RandomRep& rep, const CMat& V) : rep_(rep) {
    memo_.emplace(Word(), V);
  }

  const CMat& at(const Word& w) {
    auto it = memo_.find(w);
    if (it != memo_.end()) return it->second;
    const CMat& tail = at(w.drop_leftmost());
    Letter l = w.leftmost();
    int g = letter_generator(l);
    if (g >= static_cast<int>(rep_.gens.size()))
      throw std::invalid_argument(
          "orbit vectors: word uses a generator the representation lacks");
    CMat img = letter_is_inverse(l) ? CMat(rep_.gens[g].adjoint() * tail)
                                    : CMat(rep_.gens[g] * tail);
    return memo_.emplace(w, std::move(img)).first->second;
  }

 private:
  const RandomRep& rep_;
  std::unordered_map<Word, CMat, WordHash> memo_;
};

// Gaussian matrix -> QR -> frame with the R diagonal rotated positive real.
CMat gaussian_frame(int n, int k, StreamRng& rng) {
  CMat A(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) A(i, j) = rng.cnormal();
  Eigen::HouseholderQR<CMat> qr(A);
  CMat Q = qr.householderQ() * CMat::Identity(n, k);
  const CMat& R = qr.matrixQR();
  for (int j = 0; j < k; ++j) {
    std::complex<double> d = R(j, j);
    double a = std::abs(d);
    if (a > 0) Q.col(j) *= d / a;
  }
  return Q;
}

int infer_rank(const std::vector<Word>& F) {
  int rank = 1;
  for (const Word& w : F)
    for (Letter l : w.letters())
      rank = std::max(rank, letter_generator(l) + 1);
  return rank;
}

// Extremal grounded-formula value over the realizable closed window: the
// diagonal is pinned and entries with equal quotients move together, since
// the empirical Gram matrix satisfies both exactly. Probes are the center,
// radial pushes per quotient class, and a fixed battery of random fills;
// non-psd probes lie outside the window and are skipped.
void ldp_bracket(const std::vector<Word>& F, const BlockGram& q, double eps,
                 double& lo, double& hi) {
  int k = q.k;
  Alphabet alpha(infer_rank(F));
  struct Entry {
    int i, j;
    bool conjugate;
  };
  std::vector<std::vector<Entry>> classes;
  std::vector<std::complex<double>> dir;
  std::unordered_map<Word, int, WordHash> class_of;
  for (std::size_t i = 0; i < F.size(); ++i)
    for (std::size_t j = i + 1; j < F.size(); ++j) {
      Word w = mul(inv(F[i]), F[j]);
      Word wi = inv(w);
      bool keep = length_lex_less(alpha, w, wi) || w == wi;
      const Word& rep = keep ? w : wi;
      auto it = class_of.find(rep);
      if (it == class_of.end()) {
        it = class_of.emplace(rep, static_cast<int>(classes.size())).first;
        classes.emplace_back();
        std::complex<double> v = q.gram(i * k, j * k);
        if (!keep) v = std::conj(v);
        double a = std::abs(v);
        dir.push_back(a > 0 ? v / a : std::complex<double>(1.0, 0.0));
      }
      classes[it->second].push_back(
          {static_cast<int>(i), static_cast<int>(j), !keep});
    }

  double center = h_grounded(q);
  lo = hi = center;
  if (classes.empty()) return;

  auto eval = [&](const std::vector<std::complex<double>>& delta) {
    CMat g = q.gram;
    for (std::size_t c = 0; c < classes.size(); ++c)
      for (const Entry& en : classes[c]) {
        std::complex<double> d =
            en.conjugate ? std::conj(delta[c]) : delta[c];
        for (int t = 0; t < k; ++t) {
          g(en.i * k + t, en.j * k + t) += d;
          g(en.j * k + t, en.i * k + t) += std::conj(d);
        }
      }
    try {
      BlockGram bg{F, k, g};
      return h_grounded(bg);
    } catch (const std::domain_error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  auto consider = [&](double v) {
    if (std::isnan(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };

  std::vector<std::complex<double>> delta(classes.size(), 0.0);
  for (double sign : {1.0, -1.0}) {
    for (std::size_t c = 0; c < classes.size(); ++c) {
      std::fill(delta.begin(), delta.end(), std::complex<double>(0.0));
      delta[c] = sign * eps * dir[c];
      consider(eval(delta));
    }
    for (std::size_t c = 0; c < classes.size(); ++c)
      delta[c] = sign * eps * dir[c];
    consider(eval(delta));
  }
  StreamRng rng(0x57494e444f575ull, 0);  // fixed key: pure in the arguments
  for (int t = 0; t < 512; ++t) {
    for (std::size_t c = 0; c < classes.size(); ++c) {
      double r = eps * std::sqrt(rng.uniform());
      double th = 2.0 * std::numbers::pi * rng.uniform();
      delta[c] = std::polar(r, th);
    }
    consider(eval(delta));
  }
}

}  // namespace

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed + kGolden * (stream + 1))) {}

std::uint64_t StreamRng::next() {
  state_ += kGolden;
  return mix64(state_);
}

double StreamRng::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double StreamRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 1.0 - uniform();  // (0, 1]
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

std::complex<double> StreamRng::cnormal() {
  double re = normal();
  double im = normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

CMat haar_unitary(int n, StreamRng& rng) {
  if (n < 1) throw std::invalid_argument("haar_unitary: n must be positive");
  return gaussian_frame(n, n, rng);
}

CMat RandomRep::image(Letter l) const {
  int g = letter_generator(l);
  if (g >= static_cast<int>(gens.size()))
    throw std::invalid_argument(
        "RandomRep::image: no image for this generator");
  return letter_is_inverse(l) ? CMat(gens[g].adjoint()) : gens[g];
}

RandomRep sample_rep(int rank, int n, StreamRng& rng) {
  if (rank < 1) throw std::invalid_argument("sample_rep: rank must be >= 1");
  if (n < 1) throw std::invalid_argument("sample_rep: n must be >= 1");
  RandomRep rep;
  rep.n = n;
  rep.gens.reserve(rank);
  for (int i = 0; i < rank; ++i) rep.gens.push_back(haar_unitary(n, rng));
  return rep;
}

RandomRep sample_rep(int rank, int n, std::uint64_t seed,
                     std::uint64_t stream) {
  StreamRng rng(seed, stream);
  RandomRep rep = sample_rep(rank, n, rng);
  rep.seed = seed;
  rep.stream = stream;
  return rep;
}

CMat canonical_frame(int n, int k) {
  if (k < 1 || n < k)
    throw std::invalid_argument("canonical_frame: need n >= k >= 1");
  return CMat::Identity(n, k);
}

BlockGram orbit_gram(const RandomRep& rep, const CMat& V,
                     const std::vector<Word>& F) {
  check_frame(rep, V, "orbit_gram");
  if (F.empty()) throw std::invalid_argument("orbit_gram: empty word set");
  int k = static_cast<int>(V.cols());
  OrbitVectors orb(rep, V);
  CMat W(rep.n, static_cast<Eigen::Index>(F.size()) * k);
  for (std::size_t i = 0; i < F.size(); ++i)
    W.middleCols(static_cast<Eigen::Index>(i) * k, k) = orb.at(F[i]);
  BlockGram G;
  G.words = F;
  G.k = k;
  G.gram = W.adjoint() * W;
  return G;
}

CMat sigma_sample(int n, int l, int k, StreamRng& rng) {
  if (k < 1 || n < k)
    throw std::invalid_argument("sigma_sample: need n >= k >= 1");
  if (l < 1 || l > n)
    throw std::invalid_argument("sigma_sample: need 1 <= l <= n");
  if (k == 1) {
    Eigen::VectorXcd z(n);
    double nrm2 = 0.0;
    for (int i = 0; i < n; ++i) {
      z(i) = rng.cnormal();
      nrm2 += std::norm(z(i));
    }
    return z.head(l) / std::sqrt(nrm2);
  }
  return gaussian_frame(n, k, rng).topRows(l);
}

VerblunskySeq empirical_verblunsky(const RandomRep& rep, const CMat& V,
                                   const GroundedChain& chain) {
  check_frame(rep, V, "empirical_verblunsky");
  int k = static_cast<int>(V.cols());
  if (static_cast<long>(rep.n) <
      static_cast<long>(k) * static_cast<long>(chain.size()))
    throw std::invalid_argument(
        "empirical_verblunsky: dimension too small for the chain (need n >= "
        "k * set size)");
  const std::vector<Word>& ws = chain.words();
  OrbitVectors orb(rep, V);
  int radius = 0;
  for (const Word& w : ws)
    radius = std::max(radius, 2 * static_cast<int>(w.length()));
  PdFunction phat(chain.alphabet().rank(), k, std::max(radius, 1));
  for (std::size_t i = 0; i < ws.size(); ++i)
    for (std::size_t j = 0; j < ws.size(); ++j) {
      Word q = mul(inv(ws[i]), ws[j]);
      if (phat.has_value(q)) continue;
      phat.set_value(q, CMat(orb.at(ws[i]).adjoint() * orb.at(ws[j])));
    }
  return verblunsky_extract(phat, chain);
}

LdpReport ldp_slope(const std::vector<Word>& F, const BlockGram& q, double eps,
                    const std::vector<int>& n_grid,
                    const std::vector<long>& samples, std::uint64_t seed,
                    int workers) {
  int k = q.k;
  if (k < 1) throw std::invalid_argument("ldp_slope: block size must be >= 1");
  if (q.words.size() != F.size() ||
      !std::equal(F.begin(), F.end(), q.words.begin()))
    throw std::invalid_argument(
        "ldp_slope: target Gram matrix is over a different word set");
  if (q.gram.rows() != static_cast<Eigen::Index>(F.size()) * k ||
      q.gram.cols() != q.gram.rows())
    throw std::invalid_argument("ldp_slope: target Gram matrix shape");
  if (!(eps > 0)) throw std::invalid_argument("ldp_slope: eps must be > 0");
  if (n_grid.size() != samples.size() || n_grid.size() < 2)
    throw std::invalid_argument(
        "ldp_slope: need matching grids with at least two points");
  long min_dim = static_cast<long>(k) * static_cast<long>(F.size());
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < min_dim)
      throw std::invalid_argument(
          "ldp_slope: grid dimension below the nonsingular regime (need n >= "
          "k |F|)");
    if (samples[i] < 1)
      throw std::invalid_argument("ldp_slope: need at least one sample");
  }

  LdpReport rep;
  ldp_bracket(F, q, eps, rep.rate_lo, rep.rate_hi);

  int rank = infer_rank(F);
  bool fast = k == 1 && F.size() == 2 && F[0].empty() && F[1].length() == 1;
  std::complex<double> target = fast ? q.gram(0, 1) : 0.0;

  for (std::size_t p = 0; p < n_grid.size(); ++p) {
    int n = n_grid[p];
    long N = samples[p];
    long nb = block_count(N);
    std::vector<double> parts(nb, 0.0);
    run_blocks(nb, workers, [&](long b) {
      StreamRng rng(seed, static_cast<std::uint64_t>(p) * kStreamStride +
                              static_cast<std::uint64_t>(b));
      long quota = block_quota(N, b);
      long h = 0;
      if (fast) {
        for (long s = 0; s < quota; ++s) {
          std::complex<double> z0 = rng.cnormal();
          double nrm2 = std::norm(z0);
          for (int i = 1; i < n; ++i) nrm2 += std::norm(rng.cnormal());
          if (std::abs(z0 / std::sqrt(nrm2) - target) < eps) ++h;
        }
      } else {
        CMat Vf = canonical_frame(n, k);
        for (long s = 0; s < quota; ++s) {
          RandomRep r = sample_rep(rank, n, rng);
          BlockGram G = orbit_gram(r, Vf, F);
          if ((G.gram - q.gram).cwiseAbs().maxCoeff() < eps) ++h;
        }
      }
      parts[b] = static_cast<double>(h);
    });
    long hits = static_cast<long>(tree_total(std::move(parts)));
    LdpPoint pt;
    pt.n = n;
    pt.samples = N;
    pt.hits = hits;
    if (hits == 0) {
      pt.log_p = -kInf;
      pt.se = kInf;
      if (rep.feasible) {
        rep.feasible = false;
        rep.first_empty_n = n;
      }
    } else {
      double ph = static_cast<double>(hits) / static_cast<double>(N);
      pt.log_p = std::log(static_cast<double>(hits)) -
                 std::log(static_cast<double>(N));
      pt.se = std::max(std::sqrt((1.0 - ph) / static_cast<double>(hits)),
                       1e-9);
    }
    rep.points.push_back(pt);
  }

  if (!rep.feasible) {
    rep.slope = std::numeric_limits<double>::quiet_NaN();
    rep.slope_se = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  std::vector<double> xs, ys, ses;
  for (const LdpPoint& pt : rep.points) {
    xs.push_back(pt.n);
    ys.push_back(pt.log_p);
    ses.push_back(pt.se);
  }
  LineFit fit = fit_line(xs, ys, ses);
  rep.slope = fit.slope;
  rep.slope_se = fit.slope_se;
  return rep;
}

TypesPoint types_volume_mc(const CMat& Q, double window, int n, long samples,
                           std::uint64_t seed, std::uint64_t stream,
                           int workers) {
  int k = static_cast<int>(Q.rows());
  if (k < 1 || k > 2 || Q.cols() != k)
    throw std::invalid_argument(
        "types_volume_mc: target must be k x k with k in {1, 2}");
  double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("types_volume_mc: target must be Hermitian");
  if (!(window > 0))
    throw std::invalid_argument("types_volume_mc: window must be positive");
  if (n < k) throw std::invalid_argument("types_volume_mc: need n >= k");
  if (samples < 1)
    throw std::invalid_argument("types_volume_mc: need at least one sample");
  Eigen::LLT<CMat> llt(Q);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(
        "types_volume_mc: target must be positive definite");
  CMat L = llt.matrixL();
  double logdetQ = 0.0;
  for (int j = 0; j < k; ++j) logdetQ += 2.0 * std::log(L(j, j).real());
  CMat Ls = L / std::sqrt(static_cast<double>(n));
  CMat Qinv = llt.solve(CMat::Identity(k, k));
  double half = window / 2.0;
  double nn = static_cast<double>(n);
  double base =
      nn * logdetQ - nn * k * std::log(nn) + k * std::lgamma(nn + 1.0);

  long nb = block_count(samples);
  std::vector<Lse> parts(nb);
  run_blocks(nb, workers, [&](long b) {
    StreamRng rng(seed, stream * kStreamStride + static_cast<std::uint64_t>(b));
    long quota = block_quota(samples, b);
    Eigen::VectorXcd g(k), x(k);
    CMat A(k, k);
    for (long s = 0; s < quota; ++s) {
      A.setZero();
      for (int r = 0; r < n; ++r) {
        for (int j = 0; j < k; ++j) g(j) = rng.cnormal();
        x.noalias() = Ls * g;
        A.noalias() += x * x.adjoint();
      }
      if ((A - Q).cwiseAbs().maxCoeff() <= half)
        parts[b].add(base + nn * (Qinv * A).trace().real());
    }
  });
  Lse total = tree_lse(std::move(parts));

  TypesPoint out;
  out.n = n;
  out.samples = samples;
  out.hits = total.hits;
  double N = static_cast<double>(samples);
  if (total.hits == 0) {
    out.log_fraction = -kInf;
    out.se = kInf;
  } else {
    out.log_fraction = total.m + std::log(total.s) - std::log(N);
    out.se = std::sqrt(
        std::max(0.0, N * total.s2 / (total.s * total.s) - 1.0) / N);
  }
  return out;
}

TypesPoint types_volume_cond_mc(const CMat& Q, int l, double window, int n,
                                long samples, std::uint64_t seed,
                                std::uint64_t stream, int workers) {
  int m = static_cast<int>(Q.rows());
  if (Q.cols() != m || l < 1 || m - l < 1)
    throw std::invalid_argument(
        "types_volume_cond_mc: target must be (l+k) x (l+k) with l, k >= 1");
  int k = m - l;
  double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument(
        "types_volume_cond_mc: target must be Hermitian");
  if ((Q.topLeftCorner(l, l) - CMat::Identity(l, l)).cwiseAbs().maxCoeff() >
      1e-12)
    throw std::invalid_argument(
        "types_volume_cond_mc: fixed corner must be the identity");
  if (n < l + k)
    throw std::invalid_argument("types_volume_cond_mc: need n >= l + k");
  CMat R = Q.topRightCorner(l, k);
  CMat S = Q.bottomRightCorner(k, k) - R.adjoint() * R;

  TypesPoint out =
      types_volume_mc(S, window, n - l, samples, seed, stream, workers);
  double half = window / 2.0;
  out.n = n;
  out.log_fraction +=
      static_cast<double>(k) * l * std::log(std::numbers::pi * half * half) +
      static_cast<double>(k) *
          (std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(n - l) + 1.0) -
           l * std::log(std::numbers::pi));
  return out;
}

McReport trace_check(int rank, int n, const std::vector<Word>& words,
                     long samples, std::uint64_t seed, int workers) {
  if (rank < 1) throw std::invalid_argument("trace_check: rank must be >= 1");
  if (n < 1) throw std::invalid_argument("trace_check: n must be >= 1");
  if (samples < 1)
    throw std::invalid_argument("trace_check: need at least one sample");
  if (words.empty())
    throw std::invalid_argument("trace_check: empty word list");
  for (const Word& w : words)
    for (Letter l : w.letters())
      if (letter_generator(l) >= rank)
        throw std::invalid_argument(
            "trace_check: word uses a generator outside the rank");

  std::size_t W = words.size();
  long nb = block_count(samples);
  std::vector<std::vector<double>> parts(nb,
                                         std::vector<double>(3 * W, 0.0));
  run_blocks(nb, workers, [&](long b) {
    StreamRng rng(seed, static_cast<std::uint64_t>(b));
    long quota = block_quota(samples, b);
    for (long s = 0; s < quota; ++s) {
      RandomRep rep = sample_rep(rank, n, rng);
      for (std::size_t wi = 0; wi < W; ++wi) {
        const Word& w = words[wi];
        std::complex<double> t;
        if (w.empty()) {
          t = 1.0;
        } else if (w.length() == 1) {
          std::complex<double> tr = rep.gens[letter_generator(w.at(0))].trace();
          if (letter_is_inverse(w.at(0))) tr = std::conj(tr);
          t = tr / static_cast<double>(n);
        } else {
          CMat M = rep.image(w.at(w.length() - 1));
          for (std::size_t pos = w.length() - 2; pos >= 1; --pos)
            M = rep.image(w.at(pos)) * M;
          CMat A = rep.image(w.at(0));
          t = A.transpose().cwiseProduct(M).sum() / static_cast<double>(n);
        }
        parts[b][3 * wi] += t.real();
        parts[b][3 * wi + 1] += t.imag();
        parts[b][3 * wi + 2] += std::norm(t);
      }
    }
  });
  std::vector<double> tot = tree_total_vec(std::move(parts));

  McReport rep;
  rep.experiment = "trace_check";
  rep.seed = seed;
  rep.samples = samples;
  double N = static_cast<double>(samples);
  for (std::size_t wi = 0; wi < W; ++wi) {
    const Word& w = words[wi];
    std::string nm = to_string(w);
    double re = tot[3 * wi] / N;
    double im = tot[3 * wi + 1] / N;
    double var = std::max(0.0, tot[3 * wi + 2] / N - (re * re + im * im));
    double se = std::sqrt(var / N);
    rep.stats.push_back({"tr(" + nm + ") re", re, se});
    rep.stats.push_back({"tr(" + nm + ") im", im, se});
    rep.stats.push_back({"tr(" + nm + ") var", var, var * std::sqrt(2.0 / N)});
    McVerdict v;
    double mag = std::hypot(re, im);
    if (w.empty()) {
      v.name = "tr(e) exact";
      v.pass = re == 1.0 && im == 0.0;
      v.detail = "mean = " + strf(re);
    } else {
      double thr = 4.0 * std::max<double>(1.0, w.length()) /
                   static_cast<double>(n);
      v.name = "tr(" + nm + ") null";
      v.pass = mag <= thr;
      v.detail = "|mean| = " + strf(mag) + " vs " + strf(thr);
    }
    rep.verdicts.push_back(v);
    rep.pass = rep.pass && v.pass;
  }
  return rep;
}

McReport sigma_check(int n, int l, int k, long samples, std::uint64_t seed,
                     int workers) {
  if (n < 1 || k < 1 || k > n || l < 1 || l > n)
    throw std::invalid_argument("sigma_check: need n >= k >= 1, 1 <= l <= n");
  if (samples < 2)
    throw std::invalid_argument("sigma_check: need at least two samples");

  bool scalar = l == 1 && k == 1 && n > 1;
  long nb = block_count(samples);
  // per block: sum |Y|^2, sum |Y|^4, op-norm violations
  std::vector<std::vector<double>> parts(nb, std::vector<double>(3, 0.0));
  std::vector<std::vector<double>> law(scalar ? nb : 0);
  run_blocks(nb, workers, [&](long b) {
    StreamRng rng(seed, static_cast<std::uint64_t>(b));
    long quota = block_quota(samples, b);
    if (scalar) law[b].reserve(quota);
    for (long s = 0; s < quota; ++s) {
      CMat Y = sigma_sample(n, l, k, rng);
      double hs = Y.squaredNorm();
      parts[b][0] += hs;
      parts[b][1] += hs * hs;
      Eigen::SelfAdjointEigenSolver<CMat> es(CMat(Y.adjoint() * Y),
                                             Eigen::EigenvaluesOnly);
      if (es.eigenvalues().maxCoeff() >= 1.0 + 1e-12) parts[b][2] += 1.0;
      if (scalar) law[b].push_back(std::norm(Y(0, 0)));
    }
  });
  std::vector<double> tot = tree_total_vec(std::move(parts));

  McReport rep;
  rep.experiment = "sigma_check";
  rep.seed = seed;
  rep.samples = samples;
  double N = static_cast<double>(samples);
  double mean = tot[0] / N;
  double var = std::max(0.0, tot[1] / N - mean * mean);
  double se = std::sqrt(var / N);
  double expected =
      static_cast<double>(l) * static_cast<double>(k) / static_cast<double>(n);
  rep.stats.push_back({"mean |Y|^2", mean, se});
  {
    McVerdict v;
    v.name = "second moment";
    v.pass = std::abs(mean - expected) <= 4.0 * se + 1e-15;
    v.detail = strf(mean) + " vs " + strf(expected) + " (se " + strf(se) + ")";
    rep.verdicts.push_back(v);
    rep.pass = rep.pass && v.pass;
  }
  if (l < n) {
    rep.stats.push_back({"op norm violations", tot[2], 0.0});
    McVerdict v;
    v.name = "strict contraction";
    v.pass = tot[2] == 0.0;
    v.detail = strf(tot[2]) + " of " + strf(N);
    rep.verdicts.push_back(v);
    rep.pass = rep.pass && v.pass;
  }
  if (scalar) {
    std::vector<double> values;
    values.reserve(samples);
    for (long b = 0; b < nb; ++b)
      values.insert(values.end(), law[b].begin(), law[b].end());
    double m1 = static_cast<double>(n) - 1.0;
    double d = ks_statistic(values, [m1](double u) {
      u = std::clamp(u, 0.0, 1.0);
      return 1.0 - std::pow(1.0 - u, m1);
    });
    rep.stats.push_back({"ks entry", d, 0.0});
    McVerdict v;
    v.name = "entry law (ks 1%)";
    v.pass = ks_pass_1pct(d, samples);
    v.detail = "D = " + strf(d);
    rep.verdicts.push_back(v);
    rep.pass = rep.pass && v.pass;
  }
  return rep;
}

McReport kn_battery(int rank, int n, const GroundedChain& chain, long samples,
                    std::uint64_t seed, long subsample, int workers) {
  if (rank < chain.alphabet().rank())
    throw std::invalid_argument(
        "kn_battery: rank below the chain's alphabet rank");
  if (chain.step_count() < 1)
    throw std::invalid_argument("kn_battery: chain has no steps");
  if (n < static_cast<int>(chain.size()))
    throw std::invalid_argument(
        "kn_battery: dimension too small for the chain");
  if (samples < 2)
    throw std::invalid_argument("kn_battery: need at least two samples");
  if (subsample < 8)
    throw std::invalid_argument("kn_battery: subsample too small");

  std::size_t S = chain.step_count();
  std::vector<int> outer(S), inner(S), offset(S);
  int entries = 0;
  for (std::size_t i = 0; i < S; ++i) {
    outer[i] = static_cast<int>(chain.step(i).outer.size());
    inner[i] = static_cast<int>(chain.step(i).inner.size());
    offset[i] = entries;
    entries += outer[i];
  }

  CMat V = canonical_frame(n, 1);
  long nb = block_count(samples);
  // per block: per-step (sum ||C||^2, sum of squares), singular count
  std::vector<std::vector<double>> parts(
      nb, std::vector<double>(2 * S + 1, 0.0));
  std::vector<std::vector<std::vector<double>>> bser(
      nb, std::vector<std::vector<double>>(2 * entries));

  run_blocks(nb, workers, [&](long b) {
    StreamRng rng(seed, static_cast<std::uint64_t>(b));
    long quota = block_quota(samples, b);
    for (auto& v : bser[b]) v.reserve(quota);
    for (long s = 0; s < quota; ++s) {
      RandomRep rep = sample_rep(rank, n, rng);
      VerblunskySeq seq = [&]() -> VerblunskySeq {
        try {
          return empirical_verblunsky(rep, V, chain);
        } catch (const std::domain_error&) {
          return {GroundedChain(chain.alphabet()), {}, {}};
        }
      }();
      if (seq.coeffs.size() != S) {
        parts[b][2 * S] += 1.0;
        continue;
      }
      for (std::size_t i = 0; i < S; ++i) {
        const CMat& C = seq.coeffs[i];
        double hs = C.squaredNorm();
        parts[b][2 * i] += hs;
        parts[b][2 * i + 1] += hs * hs;
        for (int r = 0; r < outer[i]; ++r) {
          bser[b][2 * (offset[i] + r)].push_back(C(r, 0).real());
          bser[b][2 * (offset[i] + r) + 1].push_back(C(r, 0).imag());
        }
      }
    }
  });
  std::vector<std::vector<double>> series(2 * entries);
  for (auto& v : series) v.reserve(samples);
  for (long b = 0; b < nb; ++b)
    for (int e = 0; e < 2 * entries; ++e)
      series[e].insert(series[e].end(), bser[b][e].begin(), bser[b][e].end());
  std::vector<double> tot = tree_total_vec(std::move(parts));

  McReport rep;
  rep.experiment = "kn_battery";
  rep.seed = seed;
  rep.samples = samples;
  long sing = static_cast<long>(tot[2 * S]);
  long good = samples - sing;
  {
    McVerdict v;
    v.name = "no singular intermediates";
    v.pass = sing == 0;
    v.detail = strf(static_cast<double>(sing)) + " of " +
               strf(static_cast<double>(samples));
    rep.stats.push_back(
        {"singular intermediates", static_cast<double>(sing), 0.0});
    rep.verdicts.push_back(v);
    rep.pass = rep.pass && v.pass;
  }
  if (good < 2) {
    McVerdict v;
    v.name = "enough nonsingular samples";
    v.pass = false;
    v.detail = "only " + strf(static_cast<double>(good));
    rep.verdicts.push_back(v);
    rep.pass = false;
    return rep;
  }
  double G = static_cast<double>(good);

  // per-step Hilbert-Schmidt moments against the projected-frame law
  for (std::size_t i = 0; i < S; ++i) {
    double mean = tot[2 * i] / G;
    double var = std::max(0.0, tot[2 * i + 1] / G - mean * mean);
    double se = std::sqrt(var / G);
    double expected =
        static_cast<double>(outer[i]) / static_cast<double>(n - inner[i]);
    rep.stats.push_back({"step " + strf(i) + " mean |C|^2", mean, se});
    McVerdict v;
    v.name = "step " + strf(i) + " moment";
    v.pass = std::abs(mean - expected) <= 4.0 * se + 1e-15;
    v.detail = strf(mean) + " vs " + strf(expected) + " (se " + strf(se) + ")";
    rep.verdicts.push_back(v);
    rep.pass = rep.pass && v.pass;
  }

  // exact law of the first coefficient when it is scalar
  if (outer[0] == 1) {
    std::vector<double> u(series[0].size());
    for (std::size_t t = 0; t < u.size(); ++t)
      u[t] = series[0][t] * series[0][t] + series[1][t] * series[1][t];
    double nm1 = static_cast<double>(n - 1);
    double d = ks_statistic(u, [nm1](double x) {
      double c = std::clamp(x, 0.0, 1.0);
      return 1.0 - std::pow(1.0 - c, nm1);
    });
    rep.stats.push_back({"ks first coefficient", d, 0.0});
    McVerdict v;
    v.name = "first coefficient law (ks 1%)";
    v.pass = ks_pass_1pct(d, good);
    v.detail = "d = " + strf(d);
    rep.verdicts.push_back(v);
    rep.pass = rep.pass && v.pass;
  }

  // pairwise correlations across all real entry series
  double maxcorr = 0.0;
  for (std::size_t a = 0; a < series.size(); ++a)
    for (std::size_t c = a + 1; c < series.size(); ++c)
      maxcorr = std::max(maxcorr, std::abs(pearson(series[a], series[c])));
  rep.stats.push_back(
      {"max pairwise correlation", maxcorr, 1.0 / std::sqrt(G)});
  {
    McVerdict v;
    v.name = "pairwise correlations";
    v.pass = maxcorr < 0.05;
    v.detail = "max |corr| = " + strf(maxcorr);
    rep.verdicts.push_back(v);
    rep.pass = rep.pass && v.pass;
  }

  // distance correlation between the first step and the rest, on a subsample
  if (S > 1) {
    std::size_t m = static_cast<std::size_t>(
        std::min<long>(subsample, static_cast<long>(series[0].size())));
    std::vector<std::vector<double>> X(m), Y(m);
    for (std::size_t t = 0; t < m; ++t) {
      for (int r = 0; r < 2 * outer[0]; ++r) X[t].push_back(series[r][t]);
      for (std::size_t r = 2 * outer[0]; r < series.size(); ++r)
        Y[t].push_back(series[r][t]);
    }
    double dc = distance_correlation(X, Y);
    rep.stats.push_back({"distance correlation", dc, 0.0});
    McVerdict v;
    v.name = "distance correlation";
    v.pass = dc < 0.1;
    v.detail = "dcor = " + strf(dc);
    rep.verdicts.push_back(v);
    rep.pass = rep.pass && v.pass;
  }
  return rep;
}

double ks_statistic(std::vector<double> values,
                    const std::function<double(double)>& cdf) {
  if (values.empty())
    throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(values.begin(), values.end());
  double N = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double F = cdf(values[i]);
    d = std::max(d, (static_cast<double>(i) + 1.0) / N - F);
    d = std::max(d, F - static_cast<double>(i) / N);
  }
  return d;
}

bool ks_pass_1pct(double d, long n) {
  if (n < 1) throw std::invalid_argument("ks_pass_1pct: empty sample");
  double rn = std::sqrt(static_cast<double>(n));
  return d * (rn + 0.12 + 0.11 / rn) < 1.628;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson: need two series of equal length");
  double N = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  double mx = sx / N, my = sy / N;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  double den = std::sqrt(sxx * syy);
  return den > 0 ? sxy / den : 0.0;
}

double distance_correlation(const std::vector<std::vector<double>>& x,
                            const std::vector<std::vector<double>>& y) {
  std::size_t m = x.size();
  if (m != y.size() || m < 2)
    throw std::invalid_argument(
        "distance_correlation: need paired samples of equal count");
  auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
      double d = a[t] - b[t];
      s += d * d;
    }
    return std::sqrt(s);
  };
  std::vector<double> arow(m, 0.0), brow(m, 0.0);
  double ag = 0.0, bg = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double da = dist(x[i], x[j]);
      double db = dist(y[i], y[j]);
      arow[i] += da;
      brow[i] += db;
      ag += da;
      bg += db;
    }
  double M = static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    arow[i] /= M;
    brow[i] /= M;
  }
  ag /= M * M;
  bg /= M * M;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double ca = dist(x[i], x[j]) - arow[i] - arow[j] + ag;
      double cb = dist(y[i], y[j]) - brow[i] - brow[j] + bg;
      sab += ca * cb;
      saa += ca * ca;
      sbb += cb * cb;
    }
  double den = std::sqrt(saa * sbb);
  if (!(den > 0)) return 0.0;
  double r2 = sab / den;
  return r2 > 0 ? std::sqrt(r2) : 0.0;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& se) {
  if (x.size() != y.size() || x.size() != se.size() || x.size() < 2)
    throw std::invalid_argument(
        "fit_line: need at least two points with matching errors");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(se[i] > 0))
      throw std::invalid_argument("fit_line: errors must be positive");
    double w = 1.0 / (se[i] * se[i]);
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
  }
  double xb = sx / sw, yb = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double w = 1.0 / (se[i] * se[i]);
    sxx += w * (x[i] - xb) * (x[i] - xb);
    sxy += w * (x[i] - xb) * (y[i] - yb);
  }
  if (!(sxx > 0))
    throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = yb - f.slope * xb;
  f.slope_se = std::sqrt(1.0 / sxx);
  return f;
}

}  // namespace apent
