#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <vector>

#include "apent/ball.hpp"
#include "apent/entropy.hpp"
#include "apent/io.hpp"
#include "apent/pdf.hpp"

using namespace apent;

namespace {

using C = std::complex<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

CMat ginibre(std::mt19937& rng, int rows, int cols) {
  std::normal_distribution<double> g;
  CMat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = {g(rng), g(rng)};
  return m;
}

// Random strictly positive definite function, as the reconstruction of
// random contractive coefficients along a ball chain.
PdFunction random_pdf(std::mt19937& rng, int rank, int k, int chain_radius) {
  Alphabet alpha(rank);
  GroundedChain chain = GroundedChain::length_lex_ball(alpha, chain_radius);
  VerblunskySeq seq{chain, {}, {}};
  for (std::size_t i = 0; i < chain.step_count(); ++i) {
    int rows = static_cast<int>(chain.step(i).outer.size()) * k;
    CMat c = ginibre(rng, rows, k);
    seq.coeffs.push_back(0.55 * c / std::max(1.0, op_norm(c)));
  }
  return verblunsky_reconstruct(seq, k);
}

PdFunction table_copy(const PdFunction& phi, int radius, double scale = 1.0) {
  PdFunction out(phi.rank(), phi.block_size(), radius);
  for (const Word& g : ball(Alphabet(phi.rank()), radius))
    out.set_value(g, CMat(scale * phi.value(g)));
  return out;
}

// Direct sum of two functions of the same rank: k x k and l x l blocks glued
// into (k+l) x (k+l) block-diagonal values.
PdFunction diag_join(const PdFunction& a, const PdFunction& b, int radius) {
  int ka = a.block_size(), kb = b.block_size();
  PdFunction out(a.rank(), ka + kb, radius);
  for (const Word& g : ball(Alphabet(a.rank()), radius)) {
    CMat m = CMat::Zero(ka + kb, ka + kb);
    m.topLeftCorner(ka, ka) = a.value(g);
    m.bottomRightCorner(kb, kb) = b.value(g);
    out.set_value(g, m);
  }
  return out;
}

}  // namespace

TEST_CASE("grounded formula on explicit Gram matrices") {
  // Identity Gram over any grounded set: every log det vanishes.
  Alphabet a2(2);
  std::vector<Word> B1 = ball(a2, 1);
  BlockGram id{B1, 3,
               CMat::Identity(3 * static_cast<int>(B1.size()),
                              3 * static_cast<int>(B1.size()))};
  CHECK(h_grounded(id) == 0.0);

  // Singleton {e}.
  BlockGram point{{Word()}, 2, CMat::Identity(2, 2)};
  CHECK(h_grounded(point) == 0.0);

  // F = {e, a}, scalar, correlation t: log(1 - t^2), the one-step drop.
  double t = 0.45;
  CMat q(2, 2);
  q << 1.0, t, t, 1.0;
  BlockGram pair{{Word(), parse_word("a", 2)}, 1, q};
  CHECK(h_grounded(pair) == Catch::Approx(std::log(1 - t * t)).epsilon(1e-12));

  // Singular Gram: -inf without evaluating the subtracted terms.
  CMat ones = CMat::Ones(2, 2);
  BlockGram flat{{Word(), parse_word("a", 2)}, 1, ones};
  CHECK(h_grounded(flat) == -kInf);

  // Non-grounded sets are rejected.
  BlockGram no_e{{parse_word("a", 2)}, 1, CMat::Identity(1, 1)};
  CHECK_THROWS_AS(h_grounded(no_e), std::invalid_argument);
  BlockGram gap{{Word(), parse_word("ba", 2)}, 1, CMat::Identity(2, 2)};
  CHECK_THROWS_AS(h_grounded(gap), std::invalid_argument);
  BlockGram dup{{Word(), Word()}, 1, CMat::Identity(2, 2)};
  CHECK_THROWS_AS(h_grounded(dup), std::invalid_argument);
  BlockGram wrong{{Word()}, 1, CMat::Identity(2, 2)};
  CHECK_THROWS_AS(h_grounded(wrong), std::invalid_argument);
}

TEST_CASE("first formula matches known values") {
  // Rank one, phi(n) = t^|n|: the classical one-sided chain gives
  // log(1 - t^2) at every truncation radius n >= 1.
  double t = 0.6;
  PdFunction p1 = haagerup({t}, 1, 12);
  double L = std::log(1 - t * t);
  for (int n = 1; n <= 4; ++n)
    CHECK(seq1(p1, n) == Catch::Approx(L).epsilon(1e-11));
  CHECK(seq1(p1, 0) == 0.0);

  // Rank two, both letters at weight t: constant 2 log(1 - t^2) from n = 1.
  PdFunction p2 = haagerup({0.4, 0.4}, 2, 8);
  double L2 = 2 * std::log(1 - 0.16);
  for (int n = 1; n <= 3; ++n)
    CHECK(seq1(p2, n) == Catch::Approx(L2).epsilon(1e-11));

  // The regular character has entropy zero at every radius.
  PdFunction reg = regular_character(2, 2);
  for (int n = 0; n <= 3; ++n) CHECK(seq1(reg, n) == 0.0);

  // seq1 is the grounded formula evaluated on the ball Gram matrix.
  Alphabet alpha(2);
  PdFunction mixed = haagerup({C(0.3, 0.2), C(0.1, -0.5)}, 2, 6);
  for (int n = 1; n <= 2; ++n)
    CHECK(seq1(mixed, n) == h_grounded(block_gram(mixed, ball(alpha, n))));

  CHECK_THROWS_AS(seq1(haagerup({0.5, 0.5}, 2, 3), 2), std::out_of_range);
  CHECK_THROWS_AS(seq1(p1, -1), std::invalid_argument);
}

TEST_CASE("second formula and the interleaving brackets") {
  double t = 0.6;
  PdFunction p1 = haagerup({t}, 1, 12);
  double L = std::log(1 - t * t);
  for (int n = 0; n <= 4; ++n)
    CHECK(seq2(p1, n) == Catch::Approx(L).epsilon(1e-11));

  PdFunction reg = regular_character(3, 1);
  for (int n = 0; n <= 2; ++n) CHECK(seq2(reg, n) == 0.0);

  PdFunction p2 = haagerup({0.4, 0.4}, 2, 8);
  double L2 = 2 * std::log(1 - 0.16);
  CHECK(seq2(p2, 0) == Catch::Approx(L2).epsilon(1e-11));
  CHECK(seq2(p2, 1) == Catch::Approx(L2).epsilon(1e-11));

  // seq2(n+1) <= seq1(n+1) <= seq2(n) across kinds, up to rounding slack.
  std::mt19937 rng(1201);
  std::vector<PdFunction> inputs;
  inputs.push_back(haagerup({0.2, 0.2}, 2, 8));
  inputs.push_back(haagerup({C(0.5, 0.2), C(-0.3, 0.4)}, 2, 8));
  inputs.push_back(haagerup({0.8, 0.8, 0.8}, 3, 8));
  inputs.push_back(mollify(haagerup({0.9, 0.9}, 2, 8), 0.3));
  inputs.push_back(random_pdf(rng, 2, 1, 2));
  inputs.push_back(random_pdf(rng, 2, 2, 2));
  for (const PdFunction& phi : inputs) {
    int top = phi.radius() >= 8 ? 3 : 1;  // seq2(n+1) needs radius 2n+3
    for (int n = 0; n + 1 <= top; ++n) {
      double lo = seq2(phi, n + 1), mid = seq1(phi, n + 1), hi = seq2(phi, n);
      CHECK(lo <= mid + 1e-9);
      CHECK(mid <= hi + 1e-9);
    }
    // seq1 alone is non-increasing from n = 1.
    for (int n = 1; n + 1 <= top + 1; ++n)
      CHECK(seq1(phi, n + 1) <= seq1(phi, n) + 1e-9);
  }

  CHECK_THROWS_AS(seq2(haagerup({0.5, 0.5}, 2, 4), 2), std::out_of_range);
}

TEST_CASE("telescoped series along ball enumerations") {
  Alphabet a1(1), a2(2);

  // Rank one: value log(1 - t^2) at every N, length-one terms L/2 each,
  // longer words contribute nothing.
  double t = 0.5;
  PdFunction p1 = haagerup({t}, 1, 12);
  double L = std::log(1 - t * t);
  SewardSum s1 = seward_sum(p1, 2, GroundedChain::length_lex_ball(a1, 3));
  CHECK(s1.value == Catch::Approx(L).epsilon(1e-11));
  REQUIRE(s1.terms.size() == 6);
  CHECK(s1.terms[0] == Catch::Approx(L / 2).epsilon(1e-11));
  CHECK(s1.terms[1] == Catch::Approx(L / 2).epsilon(1e-11));
  for (std::size_t i = 2; i < s1.terms.size(); ++i)
    CHECK(std::abs(s1.terms[i]) < 1e-11);
  for (double p : s1.partials) CHECK(p == Catch::Approx(L).epsilon(1e-11));

  // Regular character: all zero.
  SewardSum sreg =
      seward_sum(regular_character(2, 2), 1, GroundedChain::length_lex_ball(a2, 2));
  CHECK(sreg.value == 0.0);
  for (double x : sreg.terms) CHECK(x == 0.0);

  // Consistency: value = (seq1(N+1) + seq2(N))/2, terms telescope to the
  // value, terms are nonpositive, partials decrease.
  std::mt19937 rng(77);
  std::vector<PdFunction> inputs;
  inputs.push_back(haagerup({C(0.35, 0.1), C(0.2, -0.4)}, 2, 6));
  inputs.push_back(mollify(haagerup({0.7, 0.7}, 2, 6), 0.6));
  inputs.push_back(random_pdf(rng, 2, 2, 2));
  for (const PdFunction& phi : inputs) {
    int N = phi.radius() >= 6 ? 2 : 1;
    GroundedChain chain = GroundedChain::length_lex_ball(a2, N + 1);
    SewardSum sum = seward_sum(phi, N, chain);
    CHECK(sum.value ==
          Catch::Approx((seq1(phi, N + 1) + seq2(phi, N)) / 2).margin(1e-9));
    double tele = chol_logdet(phi.value(Word()));  // 2 H(B_0)
    for (double term : sum.terms) {
      CHECK(term <= 1e-12);
      tele += term;
    }
    CHECK(tele == Catch::Approx(sum.value).margin(1e-9));
    for (std::size_t n = 1; n < sum.partials.size(); ++n)
      CHECK(sum.partials[n] <= sum.partials[n - 1] + 1e-9);
  }

  // The enumeration may use any letter order, but must be length-lex in it.
  PdFunction p2 = haagerup({C(0.3, 0.2), C(0.5, -0.1)}, 2, 6);
  SewardSum fwd = seward_sum(p2, 1, GroundedChain::length_lex_ball(a2, 2));
  SewardSum rev =
      seward_sum(p2, 1, GroundedChain::length_lex_ball(a2.reversed(), 2));
  CHECK(fwd.value == Catch::Approx(rev.value).margin(1e-10));

  GroundedChain wrong(a2);
  wrong.extend(parse_word("b", 2));
  wrong.extend(parse_word("a", 2));
  wrong.extend(parse_word("A", 2));
  wrong.extend(parse_word("B", 2));
  CHECK_THROWS_AS(seward_sum(p2, 0, wrong), std::invalid_argument);

  GroundedChain shallow(a2);
  shallow.extend(parse_word("a", 2));
  CHECK_THROWS_AS(seward_sum(p2, 0, shallow), std::invalid_argument);

  CHECK_THROWS_AS(
      seward_sum(haagerup({0.5, 0.5}, 2, 3), 1,
                 GroundedChain::length_lex_ball(a2, 2)),
      std::out_of_range);
}

TEST_CASE("coefficient series") {
  Alphabet a1(1), a2(2);

  // Regular character: identically zero.
  GroundedChain c2 = GroundedChain::length_lex_ball(a2, 2);
  VerblunskySeries vreg =
      verblunsky_series(regular_character(2, 1), c2, c2.step_count());
  CHECK(vreg.value == 0.0);
  for (double x : vreg.terms) CHECK(x == 0.0);

  // Rank one: the single generator step carries log(1 - t^2), every other
  // term vanishes, so partial sums hit seq1 at each covered ball.
  double t = 0.5;
  PdFunction p1 = haagerup({t}, 1, 8);
  GroundedChain b3 = GroundedChain::length_lex_ball(a1, 3);
  VerblunskySeries v1 = verblunsky_series(p1, b3, b3.step_count());
  double L = std::log(1 - t * t);
  CHECK(v1.value == Catch::Approx(L).epsilon(1e-11));
  CHECK(v1.terms[0] == Catch::Approx(L).epsilon(1e-11));
  for (std::size_t i = 1; i < v1.terms.size(); ++i)
    CHECK(std::abs(v1.terms[i]) < 1e-11);

  // Rank two at weight t on both letters: the series over a ball cover
  // equals seq1 there, which is 2 log(1 - t^2).
  PdFunction p2 = haagerup({0.4, 0.4}, 2, 8);
  GroundedChain cover = GroundedChain::length_lex_ball(a2, 2);
  VerblunskySeries v2 = verblunsky_series(p2, cover, cover.step_count());
  CHECK(v2.value == Catch::Approx(2 * std::log(1 - 0.16)).epsilon(1e-10));
  CHECK(v2.value == Catch::Approx(seq1(p2, 2)).margin(1e-9));

  // Truncation to the steps covering B_1 also matches seq1 at radius 1.
  std::size_t b1_steps = ball_size(2, 1) - 1;
  VerblunskySeries head = verblunsky_series(p2, cover, b1_steps);
  CHECK(head.value == Catch::Approx(seq1(p2, 1)).margin(1e-9));
  REQUIRE(head.terms.size() == b1_steps);

  // Ball-cover limits do not depend on the enumeration.
  PdFunction mixed = haagerup({C(0.3, 0.2), C(0.5, -0.1)}, 2, 8);
  GroundedChain rev = GroundedChain::length_lex_ball(a2.reversed(), 2);
  CHECK(verblunsky_series(mixed, cover, cover.step_count()).value ==
        Catch::Approx(verblunsky_series(mixed, rev, rev.step_count()).value)
            .margin(1e-9));

  // Nonpositive terms on generic strictly positive inputs.
  std::mt19937 rng(901);
  PdFunction rnd = random_pdf(rng, 2, 2, 2);
  VerblunskySeries vr = verblunsky_series(rnd, cover, cover.step_count());
  for (double x : vr.terms) CHECK(x <= 1e-12);

  CHECK_THROWS_AS(verblunsky_series(p2, cover, cover.step_count() + 1),
                  std::invalid_argument);

  // A singular intermediate Gram stops the extraction; a singular final set
  // only drives the last term to -inf.
  PdFunction flat = haagerup({1.0}, 1, 8);
  CHECK_THROWS_AS(verblunsky_series(flat, b3, b3.step_count()),
                  std::domain_error);
  VerblunskySeries vflat = verblunsky_series(flat, b3, 1);
  CHECK(vflat.value == -kInf);
  CHECK(vflat.terms[0] == -kInf);
}

TEST_CASE("all formulas agree for multiplicative functions") {
  // Rank two, weight t on both letters: every column equals 2 log(1 - t^2).
  for (double t : {0.2, 0.4, 0.6}) {
    PdFunction phi = haagerup({t, t}, 2, 12);
    EntropyReport rep = h_ann(phi, 2);
    double expect = 2 * std::log(1 - t * t);
    REQUIRE(rep.max_n == 2);
    const EntropyRow& row = rep.rows.back();
    CHECK(std::abs(row.seq1 - expect) < 1e-8);
    CHECK(std::abs(row.seq2 - expect) < 1e-8);
    CHECK(std::abs(row.seward_partial - expect) < 1e-8);
    CHECK(std::abs(row.verblunsky_partial - expect) < 1e-8);
    CHECK(std::abs(row.seq1 - row.seq2) < 1e-8);
    CHECK(rep.converged);
    CHECK(rep.value == Catch::Approx(expect).margin(1e-8));
    CHECK(rep.negative_witness);
  }

  // Rank one at t = 1/2: the classical chain value log(3/4), already exact
  // at every row.
  PdFunction half = haagerup({0.5}, 1, 12);
  EntropyReport rep = h_ann(half, 3);
  double logq = std::log(0.75);
  for (const EntropyRow& row : rep.rows) {
    CHECK(std::abs(row.seq1 - logq) < 1e-10);
    CHECK(std::abs(row.seq2 - logq) < 1e-10);
    CHECK(std::abs(row.avg - logq) < 1e-10);
    CHECK(std::abs(row.seward_partial - logq) < 1e-10);
    CHECK(std::abs(row.verblunsky_partial - logq) < 1e-10);
  }
  CHECK(rep.converged);
  CHECK(rep.value == Catch::Approx(logq).margin(1e-10));
}

TEST_CASE("report mechanics") {
  // Regular character: all columns zero, converged to zero.
  EntropyReport reg = h_ann(regular_character(2, 2), 2);
  for (const EntropyRow& row : reg.rows) {
    CHECK(row.seq1 == 0.0);
    CHECK(row.seq2 == 0.0);
    CHECK(row.seward_partial == 0.0);
    CHECK(row.verblunsky_partial == 0.0);
  }
  CHECK(reg.converged);
  CHECK(reg.value == 0.0);
  CHECK_FALSE(reg.negative_witness);
  CHECK(reg.first_singular_n == -1);

  // Finite tables clamp the row range to what the radius supports.
  PdFunction table4 = table_copy(haagerup({0.4, 0.4}, 2, 4), 4);
  EntropyReport clamped = h_ann(table4, 5);
  CHECK(clamped.max_n == 1);
  CHECK(clamped.radius_used == 4);
  CHECK_THROWS_AS(h_ann(PdFunction(2, 1, 1), 2), std::out_of_range);
  CHECK_THROWS_AS(h_ann(table4, -1), std::invalid_argument);

  // Weight-one letters give a singular ball: every column is -inf from the
  // first row, which settles the value exactly.
  EntropyReport sing = h_ann(haagerup({1.0, 1.0}, 2, 8), 2);
  CHECK(sing.first_singular_n == 0);
  CHECK(sing.converged);
  CHECK(sing.value == -kInf);
  CHECK(sing.upper == -kInf);
  CHECK(sing.negative_witness);
  for (const EntropyRow& row : sing.rows) {
    CHECK(row.seq1 == -kInf);
    CHECK(row.seq2 == -kInf);
    CHECK(row.avg == -kInf);
    CHECK(row.seward_partial == -kInf);
    CHECK(row.verblunsky_partial == -kInf);
  }

  // An unconverged bracket: wide gap at row 0 for a slowly mixing input.
  PdFunction slow = mollify(haagerup({0.9, 0.9}, 2, 8), 0.5);
  EntropyReport open = h_ann(slow, 0);
  CHECK_FALSE(open.converged);
  CHECK(std::isnan(open.value));
  CHECK(open.gap > 0.0);
  CHECK(open.upper == open.rows.back().seq1);

  // Scaling covariance: phi -> c^2 phi shifts the four log-det columns by
  // 2 k log c and leaves the scale-free coefficient column alone.
  double c = 2.0;
  PdFunction base = table_copy(haagerup({0.4, 0.4}, 2, 4), 4);
  PdFunction scaled = table_copy(haagerup({0.4, 0.4}, 2, 4), 4, c * c);
  EntropyReport rb = h_ann(base, 1);
  EntropyReport rs = h_ann(scaled, 1);
  double shift = 2 * std::log(c);
  for (int n = 0; n <= 1; ++n) {
    CHECK(rs.rows[n].seq1 ==
          Catch::Approx(rb.rows[n].seq1 + shift).margin(1e-9));
    CHECK(rs.rows[n].seq2 ==
          Catch::Approx(rb.rows[n].seq2 + shift).margin(1e-9));
    CHECK(rs.rows[n].avg == Catch::Approx(rb.rows[n].avg + shift).margin(1e-9));
    CHECK(rs.rows[n].seward_partial ==
          Catch::Approx(rb.rows[n].seward_partial + shift).margin(1e-9));
    CHECK(rs.rows[n].verblunsky_partial ==
          Catch::Approx(rb.rows[n].verblunsky_partial).margin(1e-9));
  }
  CHECK(rs.upper == Catch::Approx(rb.upper + shift).margin(1e-9));

  // Direct sums add column by column, for scalar+scalar and scalar+matrix.
  PdFunction pa = haagerup({0.3, 0.3}, 2, 4);
  PdFunction pb = haagerup({C(0.5, 0.1), C(0.2, -0.4)}, 2, 4);
  PdFunction join = diag_join(pa, pb, 4);
  PdFunction join3 = diag_join(pb, join, 4);
  EntropyReport ra = h_ann(pa, 1), rbb = h_ann(pb, 1), rj = h_ann(join, 1),
                rj3 = h_ann(join3, 1);
  for (int n = 0; n <= 1; ++n) {
    CHECK(rj.rows[n].seq1 ==
          Catch::Approx(ra.rows[n].seq1 + rbb.rows[n].seq1).margin(1e-9));
    CHECK(rj.rows[n].seq2 ==
          Catch::Approx(ra.rows[n].seq2 + rbb.rows[n].seq2).margin(1e-9));
    CHECK(rj.rows[n].seward_partial ==
          Catch::Approx(ra.rows[n].seward_partial + rbb.rows[n].seward_partial)
              .margin(1e-9));
    CHECK(rj.rows[n].verblunsky_partial ==
          Catch::Approx(ra.rows[n].verblunsky_partial +
                        rbb.rows[n].verblunsky_partial)
              .margin(1e-9));
    CHECK(rj3.rows[n].seq1 ==
          Catch::Approx(rbb.rows[n].seq1 + rj.rows[n].seq1).margin(1e-9));
    CHECK(rj3.rows[n].verblunsky_partial ==
          Catch::Approx(rbb.rows[n].verblunsky_partial +
                        rj.rows[n].verblunsky_partial)
              .margin(1e-9));
  }

  // The ball upper bound never exceeds log det phi(e).
  std::mt19937 rng(4242);
  CHECK(rb.upper <= 1e-9);
  CHECK(rs.upper <= shift + 1e-9);
  CHECK(rj.upper <= 1e-9);
  CHECK(h_ann(random_pdf(rng, 2, 2, 2), 1).upper <= 1e-9);
}

TEST_CASE("mollified trend") {
  // Tempered base: values drift up toward zero along the schedule and end
  // above the closeness threshold.
  PdFunction phi = haagerup({0.5, 0.5}, 2, 16);
  MollifiedTrace trace = h_zero_mollified(phi, {0.5, 0.2, 0.1, 0.05}, 2);
  REQUIRE(trace.h.size() == 4);
  for (double h : trace.h) CHECK(h < 0.0);
  CHECK(trace.increasing);
  CHECK(trace.h.back() > -0.02);
  CHECK(trace.classification == "->0");

  // Coarse schedule on a fast-growing base: still visibly below zero.
  MollifiedTrace stuck =
      h_zero_mollified(haagerup({0.9, 0.9}, 2, 16), {0.9, 0.8}, 2);
  CHECK(stuck.h.back() < -0.02);
  CHECK(stuck.classification == "bounded below 0");

  // The regular character sits at zero for every s.
  MollifiedTrace flat =
      h_zero_mollified(regular_character(2, 1), {0.4, 0.2}, 1);
  for (double h : flat.h) CHECK(h == 0.0);
  CHECK(flat.classification == "->0");

  CHECK_THROWS_AS(h_zero_mollified(phi, {0.2, 0.5}, 2), std::invalid_argument);
  CHECK_THROWS_AS(h_zero_mollified(phi, {}, 2), std::invalid_argument);
  CHECK_THROWS_AS(h_zero_mollified(phi, {0.5, 0.0}, 2),
                  std::invalid_argument);
}

TEST_CASE("sphere norms") {
  // Multiplicative weights: |phi 1_{S_m}|^2 = 2r (2r-1)^{m-1} t^{2m}.
  for (int r : {2, 3}) {
    double t = 0.37;
    std::vector<C> vals(r, C(t, 0.0));
    PdFunction phi = haagerup(vals, r, 12);
    for (int m = 1; m <= 6; ++m) {
      double expect = std::sqrt(2.0 * r * std::pow(2.0 * r - 1, m - 1)) *
                      std::pow(t, m);
      CHECK(sphere_l2(phi, m) == Catch::Approx(expect).epsilon(1e-12));
    }
    CHECK(sphere_l2(phi, 0) == 1.0);
  }

  // Mixed letter weights agree with direct enumeration over the sphere.
  PdFunction mixed = haagerup({C(0.3, 0.2), C(0.5, -0.1)}, 2, 8);
  PdFunction tab = table_copy(mixed, 4);
  for (int m = 1; m <= 4; ++m)
    CHECK(sphere_l2(mixed, m) == Catch::Approx(sphere_l2(tab, m)).epsilon(1e-12));

  // Regular character: everything past the identity sphere vanishes.
  SphereNorms reg = sphere_norms(regular_character(2, 1), 4);
  for (double x : reg.w) CHECK(x == 0.0);
  for (double x : reg.W) CHECK(x == 1.0);
  CHECK(reg.c == 1.0);

  // Mollification scales every sphere norm by s and records c = 1 - s.
  PdFunction base = haagerup({0.6, 0.6}, 2, 12);
  PdFunction moll = mollify(base, 0.25);
  SphereNorms nb = sphere_norms(base, 4);
  SphereNorms nm = sphere_norms(moll, 4);
  for (int n = 1; n <= 4; ++n)
    CHECK(nm.w[n - 1] == Catch::Approx(0.25 * nb.w[n - 1]).epsilon(1e-12));
  CHECK(nm.c == 0.75);
  CHECK(nb.c == 0.0);

  // W accumulates the squared-distance window of w.
  CHECK(nb.W[0] == Catch::Approx(1 + 4 * nb.w[0]).epsilon(1e-13));
  CHECK(nb.W[2] ==
        Catch::Approx(1 + 4 * (9 * nb.w[0] + 4 * nb.w[1] + nb.w[2]))
            .epsilon(1e-13));
  for (int n = 1; n < 4; ++n) CHECK(nb.W[n] >= nb.W[n - 1]);

  CHECK_THROWS_AS(sphere_norms(tab, 3), std::out_of_range);
  CHECK_THROWS_AS(sphere_l2(tab, 5), std::out_of_range);
  CHECK_THROWS_AS(sphere_norms(base, 0), std::invalid_argument);
}

TEST_CASE("temperedness classifier") {
  // Multiplicative at weight t: log sphere norms are exactly linear with
  // slope log(t sqrt(2r-1)).
  PdFunction mid = haagerup({0.5, 0.5}, 2, 24);
  TemperedReport rep = tempered_test(mid, 24);
  CHECK(rep.slope ==
        Catch::Approx(std::log(0.5 * std::sqrt(3.0))).epsilon(1e-10));
  CHECK(rep.classification == "tempered");
  CHECK(rep.n_lo == 12);
  CHECK(rep.n_hi == 24);

  CHECK(tempered_test(haagerup({0.7, 0.7}, 2, 24), 24).classification ==
        "nontempered");
  CHECK(tempered_test(haagerup({0.59, 0.59}, 2, 24), 24).classification ==
        "inconclusive");

  // Rank one: every weight below one is tempered (slope log t < 0).
  TemperedReport one = tempered_test(haagerup({0.9}, 1, 24), 24);
  CHECK(one.classification == "tempered");
  CHECK(one.slope == Catch::Approx(std::log(0.9)).epsilon(1e-10));

  // The regular character is as tempered as possible.
  TemperedReport reg = tempered_test(regular_character(2, 1), 24);
  CHECK(reg.classification == "tempered");
  CHECK(reg.slope == -kInf);

  // Scanning t in steps of 0.01 brackets the growth transition at
  // 1/sqrt(2r-1) to within 0.02 for ranks 2 and 3.
  for (int r : {2, 3}) {
    double target = 1.0 / std::sqrt(2.0 * r - 1);
    double last_tempered = 0.0, first_other = 0.0;
    for (int i = 20; i <= 80; ++i) {
      double t = i * 0.01;
      std::vector<C> vals(r, C(t, 0.0));
      TemperedReport tr = tempered_test(haagerup(vals, r, 24), 24);
      if (tr.classification == "tempered") {
        last_tempered = t;
      } else {
        first_other = t;
        break;
      }
    }
    REQUIRE(last_tempered > 0.0);
    REQUIRE(first_other > last_tempered);
    CHECK(std::abs(0.5 * (last_tempered + first_other) - target) <= 0.02);
  }

  CHECK_THROWS_AS(tempered_test(mid, 1), std::invalid_argument);
  CHECK_THROWS_AS(tempered_test(table_copy(mid, 4), 6), std::out_of_range);
}

TEST_CASE("entropy size lower bound") {
  // Mollified function with structural constant c = 1 - s: the certified
  // size bound stays below the measured entropy magnitude.
  PdFunction psi = mollify(haagerup({0.6, 0.6}, 2, 16), 0.4);
  double bound = hann_aux_bound(psi, 0.6, 6);
  CHECK(bound > 0.0);

  // Matches the direct formula over the computed norms.
  SphereNorms sn = sphere_norms(psi, 6);
  double expect = 0.0;
  for (int n = 1; n <= 6; ++n)
    expect = std::max(expect, 0.6 * sn.w[n - 1] * sn.w[n - 1] /
                                  (8.0 * n * sn.W[n - 1] * sn.W[n - 1]));
  CHECK(bound == Catch::Approx(expect).epsilon(1e-13));

  // More spheres can only improve the certificate.
  CHECK(hann_aux_bound(psi, 0.6, 8) >= bound);

  // Against the ball upper bound: bound <= -h <= -upper.
  EntropyReport rep = h_ann(psi, 3);
  CHECK(bound <= -rep.upper + 1e-9);

  // The regular character certifies nothing.
  CHECK(hann_aux_bound(regular_character(2, 1), 1.0, 4) == 0.0);

  CHECK_THROWS_AS(hann_aux_bound(psi, 0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(hann_aux_bound(psi, 1.5, 4), std::invalid_argument);
}

TEST_CASE("discrete Gronwall lemma") {
  double eps = 0.5;
  double delta = gronwall_delta(eps);
  {
    double em = std::exp(-eps);
    double expect =
        1.0 / (1.0 + 4.0 * std::exp(2 * eps) * (1.0 + em) /
                         ((1.0 - em) * (1.0 - em) * (1.0 - em)));
    CHECK(delta == Catch::Approx(expect).epsilon(1e-15));
    CHECK(delta > 0.0);
    CHECK(delta < 1.0);
  }

  // Sequences below the exponential envelope satisfy everything.
  double A = 2.0;
  std::vector<double> low;
  for (int n = 1; n <= 12; ++n) low.push_back(0.5 * A * std::exp(eps * n));
  GronwallResult easy = gronwall_check(low, eps, delta, A);
  CHECK(easy.ok());

  // A sequence built to ride the delta V(n) branch exactly: the lemma still
  // forces it under the envelope.
  std::vector<double> ride;
  for (int n = 1; n <= 12; ++n) {
    double V = 1.0;
    for (int l = 1; l < n; ++l) {
      double d = n + 1 - l;
      V += 4.0 * d * d * ride[l - 1];
    }
    ride.push_back(delta * V);
  }
  GronwallResult exact = gronwall_check(ride, eps, delta, 1.0);
  CHECK(exact.hypothesis);
  CHECK(exact.conclusion);

  // Violating both branches at some n is reported with its position, and
  // the conclusion is not asserted.
  std::vector<double> bad{10.0 * std::exp(eps)};
  GronwallResult broken = gronwall_check(bad, eps, delta, 1.0);
  CHECK_FALSE(broken.hypothesis);
  CHECK(broken.first_hypothesis_failure == 1);
  CHECK_FALSE(broken.conclusion);
  CHECK(broken.first_conclusion_failure == -1);
  CHECK_FALSE(broken.ok());

  CHECK_THROWS_AS(gronwall_check({-1.0}, eps, delta, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(gronwall_check({0.0}, eps, delta, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(gronwall_delta(0.0), std::invalid_argument);
}

TEST_CASE("report serialization") {
  EntropyReport reg = h_ann(regular_character(2, 1), 1);
  std::string csv = report_to_csv(reg);
  CHECK(csv ==
        "n,seq1,seq2,avg,seward_partial,verblunsky_partial\n"
        "0,0,0,0,0,0\n"
        "1,0,0,0,0,0\n");

  // Full-precision columns and byte-determinism.
  EntropyReport rep = h_ann(haagerup({0.4, 0.4}, 2, 8), 1);
  std::string csv2 = report_to_csv(rep);
  CHECK(csv2 == report_to_csv(rep));
  char expect[64];
  std::snprintf(expect, sizeof expect, "%.17g", rep.rows[0].seq1);
  CHECK(csv2.find(expect) != std::string::npos);

  // Minus infinity renders as "-inf" in both formats; an unsettled value is
  // null in JSON.
  EntropyReport sing = h_ann(haagerup({1.0, 1.0}, 2, 8), 1);
  CHECK(report_to_csv(sing).find("-inf") != std::string::npos);
  std::string js = report_to_json(sing);
  CHECK(js.find("\"-inf\"") != std::string::npos);
  CHECK(js.find("\"converged\":true") != std::string::npos);

  EntropyReport open = h_ann(mollify(haagerup({0.9, 0.9}, 2, 8), 0.5), 0);
  std::string js2 = report_to_json(open);
  CHECK(js2.find("\"value\":null") != std::string::npos);
  CHECK(js2.find("\"converged\":false") != std::string::npos);
  CHECK(js2.find("\"rows\":[{") != std::string::npos);
  CHECK(js2 == report_to_json(open));
}
