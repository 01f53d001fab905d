#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <unordered_set>

#include "apent/ball.hpp"
#include "apent/chain.hpp"
#include "apent/crescent.hpp"
#include "apent/word.hpp"

using namespace apent;

namespace {

std::vector<Word> sorted_words(const Alphabet& alpha, std::vector<Word> ws) {
  std::sort(ws.begin(), ws.end(), [&](const Word& a, const Word& b) {
    return length_lex_less(alpha, a, b);
  });
  return ws;
}

std::vector<std::string> strings(const std::vector<Word>& ws) {
  std::vector<std::string> out;
  for (const Word& w : ws) out.push_back(to_string(w));
  return out;
}

}  // namespace

TEST_CASE("words reduce, multiply and invert") {
  CHECK(to_string(parse_word("e", 2)) == "e");
  CHECK(parse_word("e", 2).empty());
  CHECK(to_string(mul(parse_word("ab", 2), parse_word("BA", 2))) == "e");
  CHECK(to_string(inv(parse_word("ab", 2))) == "BA");
  CHECK(to_string(mul(parse_word("aB", 2), parse_word("ba", 2))) == "aa");
  CHECK(to_string(inv(parse_word("aBab", 2))) == "BAbA");
  CHECK(parse_word("aa", 1).length() == 2);
  CHECK_THROWS_AS(parse_word("aA", 2), std::invalid_argument);
  CHECK_THROWS_AS(parse_word("c", 2), std::invalid_argument);
  CHECK_THROWS_AS(parse_word("ax", 1), std::invalid_argument);

  Word w = Word::from_letters({0, 1, 2, 3, 2});  // aAbBb reduces to b
  CHECK(to_string(w) == "b");
  CHECK(to_string(mul(Letter(0), parse_word("Ab", 2))) == "b");
}

TEST_CASE("ball and sphere sizes match enumeration") {
  for (int rank : {1, 2, 3}) {
    Alphabet alpha(rank);
    for (int n = 0; n <= 4; ++n) {
      auto b = ball(alpha, n);
      CHECK(b.size() == ball_size(rank, n));
      auto s = sphere(alpha, n);
      CHECK(s.size() == sphere_size(rank, n));
      for (const Word& w : s) CHECK(w.length() == static_cast<size_t>(n));
      // Strictly increasing in length-lex order, so all distinct.
      for (size_t i = 1; i < b.size(); ++i)
        CHECK(length_lex_less(alpha, b[i - 1], b[i]));
    }
  }
  CHECK(ball_size(1, 5) == 11);
  CHECK(ball_size(2, 2) == 17);
  CHECK(ball_size(2, 3) == 53);
  CHECK(ball_size(2, 4) == 161);
  CHECK(ball_size(3, 2) == 37);
  CHECK(sphere_size(2, 3) == 36);
}

TEST_CASE("ball enumeration order is length-lex") {
  Alphabet alpha(2);
  auto b = ball(alpha, 2);
  CHECK(strings(b) == std::vector<std::string>{
                          "e", "a", "A", "b", "B", "aa", "ab", "aB", "AA",
                          "Ab", "AB", "ba", "bA", "bb", "Ba", "BA", "BB"});
}

TEST_CASE("reversed alphabet reverses the enumeration order") {
  Alphabet alpha = Alphabet(2).reversed();
  auto b = ball(alpha, 1);
  CHECK(strings(b) == std::vector<std::string>{"e", "B", "b", "A", "a"});
}

TEST_CASE("ball cap is enforced with a specific message") {
  Alphabet alpha(3);
  CHECK_THROWS_WITH(ball(alpha, 6),
                    Catch::Matchers::ContainsSubstring("23437") &&
                        Catch::Matchers::ContainsSubstring("radius 6"));
  CHECK_NOTHROW(ball(alpha, 6, 30000));
}

TEST_CASE("cup-cap: B_{n+1} ∩ sB_{n+1} = B_n ∪ sB_n") {
  for (int rank : {1, 2, 3}) {
    Alphabet alpha(rank);
    for (int n = 0; n <= 3; ++n) {
      WordIndex big(ball(alpha, n + 1, 40000));
      auto small = ball(alpha, n, 40000);
      for (Letter s : alpha.ordered_letters()) {
        std::vector<Word> lhs;
        for (auto [i, j] : shifted_intersection(big, s)) lhs.push_back(big[i]);
        std::unordered_set<Word, WordHash> rhs_set;
        for (const Word& w : small) {
          rhs_set.insert(w);
          rhs_set.insert(mul(s, w));
        }
        std::vector<Word> rhs(rhs_set.begin(), rhs_set.end());
        CHECK(sorted_words(alpha, lhs) == sorted_words(alpha, rhs));
      }
    }
  }
}

TEST_CASE("counting identity: |B_n| - sum_s |B_n ∩ sB_n| = 1") {
  for (int rank : {1, 2, 3}) {
    Alphabet alpha(rank);
    for (int n = 0; n <= 4; ++n) {
      WordIndex F(ball(alpha, n, 40000));
      long total = static_cast<long>(F.size());
      for (int g = 0; g < rank; ++g) {
        Letter s = static_cast<Letter>(2 * g);
        total -= static_cast<long>(shifted_intersection(F, s).size());
      }
      CHECK(total == 1);
    }
  }
}

TEST_CASE("enlargement shifts intersections by exactly the new element") {
  for (int rank : {1, 2, 3}) {
    Alphabet alpha(rank);
    auto chain = GroundedChain::length_lex_ball(alpha, 3);
    WordIndex before;  // rebuilt incrementally
    before.push(Word());
    for (size_t i = 0; i < chain.step_count(); ++i) {
      const ChainStep& st = chain.step(i);
      std::vector<Word> grown = chain.set_before(i);
      grown.push_back(st.g);
      WordIndex after(std::move(grown));

      for (Letter t = 0; t < alpha.letter_count(); ++t) {
        std::set<std::string> got;
        for (auto [a, b] : shifted_intersection(after, t))
          got.insert(to_string(after[a]));
        std::set<std::string> want;
        for (auto [a, b] : shifted_intersection(before, t))
          want.insert(to_string(before[a]));
        if (t == st.dir) {
          want.insert(to_string(st.g));
        } else if (t == letter_inverse(st.dir)) {
          want.insert(to_string(mul(letter_inverse(st.dir), st.g)));
        }
        INFO("rank " << rank << " step " << i << " letter "
                     << letter_to_char(t));
        CHECK(got == want);
      }
      before.push(st.g);
    }
  }
}

TEST_CASE("length-lex chain reaches whole balls at ball-size prefixes") {
  Alphabet alpha(2);
  auto chain = GroundedChain::length_lex(alpha, ball_size(2, 3));
  for (int n = 0; n <= 3; ++n) {
    size_t N = ball_size(2, n);
    std::vector<Word> prefix(chain.words().begin(),
                             chain.words().begin() + N);
    CHECK(sorted_words(alpha, prefix) == ball(alpha, n));
  }
  // Outer/inner split the prior set; inner_shifted matches the translate.
  for (size_t i = 0; i < chain.step_count(); ++i) {
    const ChainStep& st = chain.step(i);
    CHECK(st.outer.size() + st.inner.size() == i + 1);
    CHECK(chain.word(st.parent) ==
          mul(letter_inverse(st.dir), st.g));
    for (size_t j = 0; j < st.inner.size(); ++j)
      CHECK(chain.word(st.inner_shifted[j]) ==
            mul(letter_inverse(st.dir), chain.word(st.inner[j])));
  }
}

TEST_CASE("chain extension rejects duplicates and non-adjacent words") {
  Alphabet alpha(2);
  GroundedChain chain(alpha);
  CHECK_THROWS_AS(chain.extend(parse_word("ab", 2)), std::invalid_argument);
  CHECK_THROWS_AS(chain.extend(Word()), std::invalid_argument);
  chain.extend(parse_word("a", 2));
  CHECK_THROWS_AS(chain.extend(parse_word("a", 2)), std::invalid_argument);
  // ab is adjacent to b (ab = a*b), not to a: left neighbours only.
  CHECK_THROWS_AS(chain.extend(parse_word("ab", 2)), std::invalid_argument);
  chain.extend(parse_word("b", 2));
  chain.extend(parse_word("ab", 2));
  CHECK(chain.step(2).dir == parse_word("a", 2).leftmost());
  CHECK(chain.word(chain.step(2).parent) == parse_word("b", 2));
}

TEST_CASE("crescents match the brute-force Q-set difference") {
  for (bool reversed : {false, true}) {
    for (int rank : {1, 2}) {
      Alphabet alpha =
          reversed ? Alphabet(rank).reversed() : Alphabet(rank);
      for (const Word& g : ball(alpha, 3)) {
        if (g.empty()) continue;
        auto q = q_set(alpha, g);
        std::unordered_set<Word, WordHash> parent_q;
        if (g.length() > 1) {
          for (const Word& w : q_set(alpha, g.drop_leftmost()))
            parent_q.insert(w);
        }
        std::vector<Word> brute;
        for (const Word& w : q) {
          if (!parent_q.count(w)) brute.push_back(w);
        }
        INFO("rank " << rank << (reversed ? " reversed" : "") << " g = "
                     << to_string(g));
        CHECK(sorted_words(alpha, crescent(alpha, g)) ==
              sorted_words(alpha, brute));
      }
    }
  }
}

TEST_CASE("Q-sets are nested along the leftmost-letter chain") {
  Alphabet alpha(2);
  for (const Word& g : ball(alpha, 3)) {
    if (g.length() < 2) continue;
    std::unordered_set<Word, WordHash> qg;
    for (const Word& w : q_set(alpha, g)) qg.insert(w);
    for (const Word& w : q_set(alpha, g.drop_leftmost()))
      CHECK(qg.count(w) == 1);
  }
}

TEST_CASE("crescents partition the punctured ball") {
  for (int rank : {1, 2, 3}) {
    Alphabet alpha(rank);
    auto candidates = ball(alpha, 4, 40000);
    auto words = ball(alpha, 6, 40000);
    bool exhaustive = rank <= 2;
    for (const Word& w : words) {
      if (w.empty()) continue;
      Word owner = crescent_owner(alpha, w);
      CHECK(crescent_contains(alpha, owner, w));
      size_t m = w.length();
      CHECK((2 * owner.length() == m || 2 * owner.length() == m + 1 ||
             2 * owner.length() == m + 2));
      if (exhaustive) {
        int hits = 0;
        for (const Word& g : candidates) {
          if (!g.empty() && crescent_contains(alpha, g, w)) ++hits;
        }
        CHECK(hits == 1);
      } else {
        // Membership forces g = inv(prefix(|g|)), so the only candidates
        // besides the owner are the inverted prefixes of admissible lengths.
        for (size_t n = (m + 1) / 2; n <= m / 2 + 1; ++n) {
          if (n < 1 || n > m) continue;
          Word g = inv(w.prefix(n));
          if (g == owner) continue;
          CHECK_FALSE(crescent_contains(alpha, g, w));
        }
      }
    }
  }
}

TEST_CASE("crescent owner respects a custom letter order") {
  Alphabet alpha = Alphabet(2).reversed();
  // Owners of words of length <= 4 have length <= 3, so B_3 sees them all.
  for (const Word& w : ball(alpha, 4)) {
    if (w.empty()) continue;
    Word owner = crescent_owner(alpha, w);
    CHECK(crescent_contains(alpha, owner, w));
    int hits = 0;
    for (const Word& g : ball(alpha, 3)) {
      if (!g.empty() && crescent_contains(alpha, g, w)) ++hits;
    }
    CHECK(hits == 1);
  }
}
