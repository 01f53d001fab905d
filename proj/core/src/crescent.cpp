#include "apent/crescent.hpp"

#include <stdexcept>

namespace apent {

std::vector<Word> predecessors(const Alphabet& alpha, const Word& g,
                               std::size_t cap) {
  auto all = ball(alpha, static_cast<int>(g.length()), cap);
  std::vector<Word> out;
  for (const Word& w : all) {
    if (length_lex_less(alpha, w, g)) out.push_back(w);
  }
  return out;
}

std::vector<Word> q_set(const Alphabet& alpha, const Word& g,
                        std::size_t cap) {
  Word ginv = inv(g);
  std::vector<Word> out;
  for (const Word& p : predecessors(alpha, g, cap)) out.push_back(mul(ginv, p));
  return out;
}

namespace {

// w carries s_1^{-1}...s_n^{-1} as its leftmost n letters, where
// g = s_n...s_1.
bool has_inverse_prefix(const Word& g, const Word& w) {
  std::size_t n = g.length();
  if (w.length() < n) return false;
  for (std::size_t j = 0; j < n; ++j) {
    if (w.at(j) != letter_inverse(g.at(n - 1 - j))) return false;
  }
  return true;
}

}  // namespace

bool crescent_contains(const Alphabet& alpha, const Word& g, const Word& w) {
  std::size_t n = g.length();
  if (n == 0)
    throw std::invalid_argument("the empty word has no crescent");
  std::size_t m = w.length();
  if (m == 2 * n - 1) return has_inverse_prefix(g, w);
  if (m == 2 * n) {
    // t_n < s_n: the letter after the forced prefix precedes the leftmost
    // letter of g.
    return has_inverse_prefix(g, w) && alpha.less(w.at(n), g.at(0));
  }
  if (n >= 2 && m == 2 * n - 2) {
    // Nonempty only when s_{n-1} < s_n^{-1}.
    if (!alpha.less(g.at(1), letter_inverse(g.at(0)))) return false;
    return has_inverse_prefix(g, w);
  }
  return false;
}

Word crescent_owner(const Alphabet& alpha, const Word& w) {
  std::size_t m = w.length();
  if (m == 0)
    throw std::invalid_argument("the identity lies in no crescent");
  if (m % 2 == 1) return inv(w.prefix((m + 1) / 2));
  std::size_t p = m / 2;
  // t_p vs t_{p+1}^{-1} decides whether the owner has p or p+1 letters.
  if (alpha.less(w.at(p), letter_inverse(w.at(p - 1)))) return inv(w.prefix(p));
  return inv(w.prefix(p + 1));
}

std::vector<Word> crescent(const Alphabet& alpha, const Word& g,
                           std::size_t cap) {
  std::size_t n = g.length();
  if (n == 0)
    throw std::invalid_argument("the empty word has no crescent");
  std::vector<Word> out;
  for (int m = static_cast<int>(2 * n) - 2; m <= static_cast<int>(2 * n);
       ++m) {
    if (m < 1) continue;
    for (const Word& w : sphere(alpha, m, cap)) {
      if (crescent_contains(alpha, g, w)) out.push_back(w);
    }
  }
  return out;
}

}  // namespace apent
