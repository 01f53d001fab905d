#include "apent/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "apent/ball.hpp"
#include "apent/hermitian.hpp"

namespace apent {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> block_rows(const std::vector<int>& words, int k) {
  std::vector<int> rows;
  rows.reserve(words.size() * k);
  for (int w : words)
    for (int j = 0; j < k; ++j) rows.push_back(w * k + j);
  return rows;
}

double sub_logdet(const CMat& gram, const std::vector<int>& words, int k) {
  if (words.empty()) return 0.0;
  std::vector<int> rows = block_rows(words, k);
  return chol_logdet(submatrix(gram, rows, rows));
}

// log det Q[F] - sum_s log det Q[F cap sF] over the positive generators; the
// inverse letters contribute the same subterms because Q is Hermitian over a
// symmetric construction, so one term per generator pair suffices.
double grounded_value(const CMat& gram, const WordIndex& index, int k,
                      int rank) {
  double full = chol_logdet(gram);
  if (full == -kInf) return -kInf;
  double sum = 0.0;
  for (int i = 0; i < rank; ++i) {
    std::vector<int> cap;
    for (const auto& pr :
         shifted_intersection(index, static_cast<Letter>(2 * i)))
      cap.push_back(pr.first);
    sum += sub_logdet(gram, cap, k);
  }
  return full - sum;
}

void require_radius(const PdFunction& phi, int need, const std::string& who) {
  if (phi.radius() < need)
    throw std::out_of_range(who + " needs values up to radius " +
                            std::to_string(need) + ", the function stops at " +
                            std::to_string(phi.radius()));
}

}  // namespace

double h_grounded(const BlockGram& q) {
  if (q.words.empty())
    throw std::invalid_argument("h_grounded: empty word set");
  if (q.k < 1 ||
      q.gram.rows() != static_cast<Eigen::Index>(q.words.size()) * q.k ||
      q.gram.cols() != q.gram.rows())
    throw std::invalid_argument(
        "h_grounded: Gram size does not match the word list");
  WordIndex index;
  for (const Word& w : q.words) {
    if (index.contains(w))
      throw std::invalid_argument("h_grounded: repeated word " + to_string(w));
    index.push(w);
  }
  // Grounded means closed under dropping the leftmost letter (and containing
  // the identity): the left Cayley graph is a tree, so this is the same as
  // being connected around the identity.
  if (!index.contains(Word()))
    throw std::invalid_argument(
        "h_grounded: word set is not grounded (missing the identity)");
  for (const Word& w : q.words)
    if (!w.empty() && !index.contains(w.drop_leftmost()))
      throw std::invalid_argument("h_grounded: word set is not grounded at " +
                                  to_string(w));
  int rank = 0;
  for (const Word& w : q.words)
    for (Letter l : w.letters())
      rank = std::max(rank, letter_generator(l) + 1);
  return grounded_value(q.gram, index, q.k, rank);
}

double seq1(const PdFunction& phi, int n) {
  if (n < 0) throw std::invalid_argument("seq1: negative radius");
  require_radius(phi, 2 * n, "seq1 at n = " + std::to_string(n));
  Alphabet alpha(phi.rank());
  std::vector<Word> words = ball(alpha, n);
  BlockGram G = block_gram(phi, words);
  return grounded_value(G.gram, WordIndex(std::move(words)), G.k, phi.rank());
}

double seq2(const PdFunction& phi, int n) {
  if (n < 0) throw std::invalid_argument("seq2: negative radius");
  require_radius(phi, 2 * n + 1, "seq2 at n = " + std::to_string(n));
  Alphabet alpha(phi.rank());
  std::vector<Word> base = ball(alpha, n);
  double sum = 0.0;
  for (int i = 0; i < phi.rank(); ++i) {
    Letter s = static_cast<Letter>(2 * i);
    std::vector<Word> cup = base;
    for (const Word& w : base) {
      Word sw = mul(s, w);
      if (sw.length() == static_cast<std::size_t>(n) + 1) cup.push_back(sw);
    }
    double ld = chol_logdet(block_gram(phi, cup).gram);
    if (ld == -kInf) return -kInf;
    sum += ld;
  }
  double ball_ld = chol_logdet(block_gram(phi, base).gram);
  if (ball_ld == -kInf) return -kInf;
  return sum - (2 * phi.rank() - 1) * ball_ld;
}

SewardSum seward_sum(const PdFunction& phi, int N, const GroundedChain& chain) {
  if (N < 0) throw std::invalid_argument("seward_sum: negative radius");
  if (chain.alphabet().rank() != phi.rank())
    throw std::invalid_argument("seward_sum: chain rank does not match phi");
  require_radius(phi, 2 * (N + 1), "seward_sum at N = " + std::to_string(N));
  std::size_t need = ball_size(phi.rank(), N + 1);
  if (chain.size() < need)
    throw std::invalid_argument(
        "seward_sum: chain holds " + std::to_string(chain.size()) +
        " words but the ball of radius " + std::to_string(N + 1) + " has " +
        std::to_string(need));
  std::vector<Word> words = ball(chain.alphabet(), N + 1);
  for (std::size_t i = 0; i < need; ++i)
    if (!(chain.word(i) == words[i]))
      throw std::invalid_argument(
          "seward_sum: chain is not a length-lex ball enumeration (position " +
          std::to_string(i) + " holds " + to_string(chain.word(i)) +
          ", expected " + to_string(words[i]) + ")");

  BlockGram G = block_gram(phi, words);
  int k = G.k;
  std::vector<double> ld = prefix_block_logdets(G.gram, k);
  auto LD = [&](std::size_t m) { return m == 0 ? 0.0 : ld[m - 1]; };
  // Conditional entropy of word i given all earlier words; singular prefixes
  // are monotone, so a finite value here implies finite values at parents.
  auto cond = [&](std::size_t i) {
    double a = LD(i + 1);
    return a == -kInf ? -kInf : 0.5 * (a - LD(i));
  };

  SewardSum out;
  out.terms.reserve(need - 1);
  for (std::size_t i = 1; i < need; ++i) {
    std::size_t parent = static_cast<std::size_t>(
        chain.index().find(words[i].drop_leftmost()));
    double ci = cond(i);
    out.terms.push_back(ci == -kInf ? -kInf : ci - cond(parent));
  }

  out.partials.resize(N + 1);
  std::vector<double> ball_ld(N + 2);
  for (int m = 0; m <= N + 1; ++m) {
    Eigen::Index sz = static_cast<Eigen::Index>(ball_size(phi.rank(), m)) * k;
    ball_ld[m] = chol_logdet(CMat(G.gram.topLeftCorner(sz, sz)));
  }
  for (int n = 0; n <= N; ++n) {
    double a = ball_ld[n + 1];
    out.partials[n] =
        a == -kInf ? -kInf : 0.5 * (a - (2 * phi.rank() - 1) * ball_ld[n]);
  }
  out.value = out.partials[N];
  return out;
}

VerblunskySeries verblunsky_series(const PdFunction& phi,
                                   const GroundedChain& chain, std::size_t N) {
  if (N > chain.step_count())
    throw std::invalid_argument("verblunsky_series: chain has " +
                                std::to_string(chain.step_count()) +
                                " steps, series asked for " +
                                std::to_string(N));
  GroundedChain pre(chain.alphabet());
  for (std::size_t i = 0; i < N; ++i) pre.extend(chain.word(i + 1));
  VerblunskySeq seq = verblunsky_extract(phi, pre);
  int k = phi.block_size();
  VerblunskySeries out;
  out.value = 0.0;
  out.terms.reserve(N);
  for (const CMat& C : seq.coeffs) {
    double t = chol_logdet(CMat::Identity(k, k) - C.adjoint() * C);
    out.terms.push_back(t);
    out.value = (out.value == -kInf || t == -kInf) ? -kInf : out.value + t;
  }
  return out;
}

EntropyReport h_ann(const PdFunction& phi, int max_n, double gap_tol) {
  if (max_n < 0) throw std::invalid_argument("h_ann: negative max_n");
  if (!(gap_tol > 0.0))
    throw std::invalid_argument("h_ann: gap_tol must be positive");
  int n_max = max_n;
  if (phi.radius() != PdFunction::kUnlimitedRadius)
    n_max = std::min(max_n, phi.radius() / 2 - 1);
  if (n_max < 0)
    throw std::out_of_range("h_ann: row 0 needs values up to radius 2, the "
                            "function stops at " +
                            std::to_string(phi.radius()));

  EntropyReport rep;
  rep.rank = phi.rank();
  rep.k = phi.block_size();
  rep.max_n = n_max;
  rep.radius_used = 2 * (n_max + 1);
  rep.gap_tol = gap_tol;

  Alphabet alpha(phi.rank());
  GroundedChain chain = GroundedChain::length_lex_ball(alpha, n_max + 1);
  SewardSum sew = seward_sum(phi, n_max, chain);

  // The coefficient series stays extractable up to the first singular ball
  // prefix; the step reaching it carries a -inf term (non-strict
  // coefficient), which every later partial absorbs.
  BlockGram G = block_gram(phi, chain.words());
  std::vector<double> prefix_ld = prefix_block_logdets(G.gram, G.k);
  std::size_t usable = chain.step_count();
  bool e_singular = prefix_ld[0] == -kInf;
  if (e_singular) {
    usable = 0;
  } else {
    for (std::size_t j = 1; j <= chain.step_count(); ++j)
      if (prefix_ld[j] == -kInf) {
        usable = j;
        break;
      }
  }
  VerblunskySeries vb = verblunsky_series(phi, chain, usable);
  auto vb_partial = [&](int n) {
    if (e_singular) return -kInf;
    std::size_t cover = ball_size(phi.rank(), n + 1) - 1;
    double sum = 0.0;
    for (std::size_t i = 0; i < cover; ++i) {
      double t = i < vb.terms.size() ? vb.terms[i] : -kInf;
      sum = (sum == -kInf || t == -kInf) ? -kInf : sum + t;
    }
    return sum;
  };

  rep.rows.resize(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    EntropyRow& row = rep.rows[n];
    row.n = n;
    row.seq1 = seq1(phi, n + 1);
    row.seq2 = seq2(phi, n);
    row.avg = (row.seq1 == -kInf || row.seq2 == -kInf)
                  ? -kInf
                  : 0.5 * (row.seq1 + row.seq2);
    row.seward_partial = sew.partials[n];
    row.verblunsky_partial = vb_partial(n);
    bool singular = row.seq1 == -kInf || row.seq2 == -kInf ||
                    row.seward_partial == -kInf ||
                    row.verblunsky_partial == -kInf;
    if (singular && rep.first_singular_n < 0) rep.first_singular_n = n;
  }

  const EntropyRow& last = rep.rows.back();
  rep.upper = last.seq1;
  if (last.seq1 == -kInf) {
    rep.converged = true;  // the upper bound already pins the limit
    rep.value = -kInf;
    rep.gap = 0.0;
  } else {
    rep.gap = last.seq2 - last.seq1;
    rep.converged = std::abs(rep.gap) < gap_tol;
    rep.value = rep.converged ? last.avg
                              : std::numeric_limits<double>::quiet_NaN();
  }
  rep.negative_witness = rep.upper < 0.0;
  return rep;
}

MollifiedTrace h_zero_mollified(const PdFunction& phi,
                                const std::vector<double>& schedule,
                                int max_n) {
  if (!phi.unital())
    throw std::invalid_argument("h_zero_mollified: phi must be unital");
  if (schedule.empty())
    throw std::invalid_argument("h_zero_mollified: empty schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0.0) || schedule[i] > 1.0)
      throw std::invalid_argument(
          "h_zero_mollified: schedule values must lie in (0, 1]");
    if (i > 0 && !(schedule[i] < schedule[i - 1]))
      throw std::invalid_argument(
          "h_zero_mollified: schedule must be strictly decreasing");
  }
  MollifiedTrace out;
  out.s = schedule;
  for (double s : schedule) {
    EntropyReport rep = h_ann(mollify(phi, s), max_n);
    out.h.push_back(rep.upper);
    out.converged.push_back(rep.converged);
  }
  out.increasing = true;
  for (std::size_t i = 1; i < out.h.size(); ++i)
    if (out.h[i] < out.h[i - 1] - 1e-12) out.increasing = false;
  out.classification =
      out.h.back() > -kMollifyZeroTol ? "->0" : "bounded below 0";
  return out;
}

double sphere_l2(const PdFunction& phi, int m) {
  if (m < 0) throw std::invalid_argument("sphere_l2: negative radius");
  require_radius(phi, m, "sphere_l2 at m = " + std::to_string(m));
  if (m == 0) return phi.value(Word()).norm();
  const std::string& kind = phi.kind();
  if (kind == "regular") return 0.0;
  if (kind == "haagerup") {
    // Squared norms split over the leftmost letter: a length m+1 word with
    // leftmost letter l continues with any word whose leftmost letter is not
    // l^{-1}, and |phi| is multiplicative along letters.
    const auto& vals = phi.letter_values();
    int letters = 2 * phi.rank();
    std::vector<double> x(letters);
    for (int l = 0; l < letters; ++l) x[l] = std::norm(vals[l >> 1]);
    for (int step = 1; step < m; ++step) {
      double total = 0.0;
      for (double v : x) total += v;
      std::vector<double> next(letters);
      for (int l = 0; l < letters; ++l)
        next[l] = std::norm(vals[l >> 1]) * (total - x[l ^ 1]);
      x = next;
    }
    double total = 0.0;
    for (double v : x) total += v;
    return std::sqrt(total);
  }
  if (kind == "mollified")
    return phi.mollify_s() * sphere_l2(phi.mollify_base(), m);
  Alphabet alpha(phi.rank());
  double sum = 0.0;
  for (const Word& w : sphere(alpha, m)) sum += phi.value(w).squaredNorm();
  return std::sqrt(sum);
}

SphereNorms sphere_norms(const PdFunction& phi, int N) {
  if (N < 1) throw std::invalid_argument("sphere_norms: N must be >= 1");
  require_radius(phi, 2 * N, "sphere_norms at N = " + std::to_string(N));
  SphereNorms out;
  out.w.resize(N);
  for (int n = 1; n <= N; ++n)
    out.w[n - 1] = sphere_l2(phi, 2 * n - 1) + sphere_l2(phi, 2 * n);
  out.W.resize(N);
  for (int n = 1; n <= N; ++n) {
    double acc = 1.0;
    for (int l = 1; l <= n; ++l) {
      double d = n + 1 - l;
      acc += 4.0 * d * d * out.w[l - 1];
    }
    out.W[n - 1] = acc;
  }
  if (phi.kind() == "mollified")
    out.c = 1.0 - phi.mollify_s();
  else if (phi.kind() == "regular")
    out.c = 1.0;
  return out;
}

TemperedReport tempered_test(const PdFunction& phi, int N, double rate_tol) {
  if (N < 2) throw std::invalid_argument("tempered_test: N must be >= 2");
  if (!(rate_tol > 0.0))
    throw std::invalid_argument("tempered_test: rate_tol must be positive");
  require_radius(phi, N, "tempered_test at N = " + std::to_string(N));
  TemperedReport out;
  out.rate_tol = rate_tol;
  out.n_lo = std::max(1, N / 2);
  out.n_hi = N;
  std::vector<double> xs, ys;
  for (int n = out.n_lo; n <= N; ++n) {
    double norm = sphere_l2(phi, n);
    if (norm > 0.0) {
      xs.push_back(n);
      ys.push_back(std::log(norm));
    }
  }
  if (xs.size() < 2) {
    // The restriction to large spheres is (almost) identically zero, which
    // is as subexponential as it gets.
    out.slope = -kInf;
    out.classification = "tempered";
    return out;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  out.slope = sxy / sxx;
  if (out.slope <= rate_tol)
    out.classification = "tempered";
  else if (out.slope >= 3.0 * rate_tol)
    out.classification = "nontempered";
  else
    out.classification = "inconclusive";
  return out;
}

double hann_aux_bound(const PdFunction& phi, double c, int N) {
  if (!(c > 0.0) || c > 1.0)
    throw std::invalid_argument("hann_aux_bound: c must lie in (0, 1]");
  SphereNorms sn = sphere_norms(phi, N);
  double best = 0.0;
  for (int n = 1; n <= N; ++n) {
    double b = c * sn.w[n - 1] * sn.w[n - 1] /
               (8.0 * n * sn.W[n - 1] * sn.W[n - 1]);
    best = std::max(best, b);
  }
  return best;
}

double gronwall_delta(double eps) {
  if (!(eps > 0.0))
    throw std::invalid_argument("gronwall_delta: eps must be positive");
  double em = std::exp(-eps);
  double d = 1.0 - em;
  return 1.0 / (1.0 + 4.0 * std::exp(2.0 * eps) * (1.0 + em) / (d * d * d));
}

GronwallResult gronwall_check(const std::vector<double>& v, double eps,
                              double delta, double A) {
  if (!(eps > 0.0))
    throw std::invalid_argument("gronwall_check: eps must be positive");
  if (!(delta > 0.0))
    throw std::invalid_argument("gronwall_check: delta must be positive");
  if (!(A >= 1.0))
    throw std::invalid_argument("gronwall_check: A must be >= 1");
  for (double x : v)
    if (!(x >= 0.0))
      throw std::invalid_argument("gronwall_check: v must be nonnegative");
  constexpr double kSlack = 1e-12;
  auto leq = [](double a, double b) {
    return a <= b + kSlack * std::max(1.0, std::abs(b));
  };
  GronwallResult out;
  out.hypothesis = true;
  int count = static_cast<int>(v.size());
  for (int n = 1; n <= count; ++n) {
    double V = 1.0;
    for (int l = 1; l < n; ++l) {
      double d = n + 1 - l;
      V += 4.0 * d * d * v[l - 1];
    }
    if (!leq(v[n - 1], A * std::exp(eps * n)) && !leq(v[n - 1], delta * V)) {
      out.hypothesis = false;
      out.first_hypothesis_failure = n;
      return out;
    }
  }
  out.conclusion = true;
  for (int n = 1; n <= count; ++n)
    if (!leq(v[n - 1], A * std::exp(eps * n))) {
      out.conclusion = false;
      out.first_conclusion_failure = n;
      break;
    }
  return out;
}

}  // namespace apent
