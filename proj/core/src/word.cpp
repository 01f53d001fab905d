#include "apent/word.hpp"

#include <algorithm>
#include <stdexcept>

namespace apent {

char letter_to_char(Letter l) {
  int g = letter_generator(l);
  return static_cast<char>((letter_is_inverse(l) ? 'A' : 'a') + g);
}

Letter letter_from_char(char c, int rank) {
  if (c >= 'a' && c < 'a' + rank) return static_cast<Letter>(2 * (c - 'a'));
  if (c >= 'A' && c < 'A' + rank)
    return static_cast<Letter>(2 * (c - 'A') + 1);
  throw std::invalid_argument(std::string("not a letter of F_") +
                              std::to_string(rank) + ": '" + c + "'");
}

Alphabet::Alphabet(int rank) : rank_(rank) {
  if (rank < 1 || rank > 26)
    throw std::invalid_argument("rank must be between 1 and 26, got " +
                                std::to_string(rank));
  order_.resize(2 * rank);
  rank_of_.resize(2 * rank);
  for (int i = 0; i < 2 * rank; ++i) {
    order_[i] = static_cast<Letter>(i);
    rank_of_[i] = static_cast<std::uint8_t>(i);
  }
}

Alphabet::Alphabet(int rank, const std::vector<Letter>& order)
    : Alphabet(rank) {
  if (order.size() != static_cast<std::size_t>(2 * rank))
    throw std::invalid_argument("letter order must list all " +
                                std::to_string(2 * rank) + " letters");
  std::vector<bool> seen(2 * rank, false);
  for (std::size_t i = 0; i < order.size(); ++i) {
    Letter l = order[i];
    if (l >= 2 * rank || seen[l])
      throw std::invalid_argument("letter order is not a permutation");
    seen[l] = true;
    rank_of_[l] = static_cast<std::uint8_t>(i);
  }
  order_ = order;
}

Alphabet Alphabet::reversed() const {
  std::vector<Letter> rev(order_.rbegin(), order_.rend());
  return Alphabet(rank_, rev);
}

Word Word::from_letters(const std::vector<Letter>& letters) {
  Word w;
  w.ls_.reserve(letters.size());
  for (Letter l : letters) {
    if (!w.ls_.empty() && w.ls_.back() == letter_inverse(l))
      w.ls_.pop_back();
    else
      w.ls_.push_back(l);
  }
  return w;
}

Word Word::drop_leftmost() const {
  if (ls_.empty()) throw std::logic_error("empty word has no leftmost letter");
  Word w;
  w.ls_.assign(ls_.begin() + 1, ls_.end());
  return w;
}

Word Word::prefix(std::size_t n) const {
  if (n > ls_.size())
    throw std::out_of_range("prefix length " + std::to_string(n) +
                            " exceeds word length " +
                            std::to_string(ls_.size()));
  Word w;
  w.ls_.assign(ls_.begin(), ls_.begin() + n);
  return w;
}

Word mul(const Word& a, const Word& b) {
  std::vector<Letter> cat(a.letters());
  cat.insert(cat.end(), b.letters().begin(), b.letters().end());
  return Word::from_letters(cat);
}

Word mul(Letter s, const Word& g) {
  std::vector<Letter> cat;
  cat.reserve(g.length() + 1);
  cat.push_back(s);
  cat.insert(cat.end(), g.letters().begin(), g.letters().end());
  return Word::from_letters(cat);
}

Word inv(const Word& a) {
  std::vector<Letter> rev(a.letters().rbegin(), a.letters().rend());
  for (Letter& l : rev) l = letter_inverse(l);
  return Word::from_letters(rev);
}

std::string to_string(const Word& w) {
  if (w.empty()) return "e";
  std::string s;
  s.reserve(w.length());
  for (Letter l : w.letters()) s.push_back(letter_to_char(l));
  return s;
}

Word parse_word(const std::string& s, int rank) {
  if (s == "e" || s.empty()) return Word();
  std::vector<Letter> ls;
  ls.reserve(s.size());
  for (char c : s) ls.push_back(letter_from_char(c, rank));
  Word w = Word::from_letters(ls);
  if (w.length() != s.size())
    throw std::invalid_argument("word is not reduced: \"" + s + "\"");
  return w;
}

std::size_t WordHash::operator()(const Word& w) const {
  // FNV-1a over the letter bytes.
  std::size_t h = 1469598103934665603ull;
  for (Letter l : w.letters()) {
    h ^= l;
    h *= 1099511628211ull;
  }
  return h;
}

bool length_lex_less(const Alphabet& alpha, const Word& a, const Word& b) {
  if (a.length() != b.length()) return a.length() < b.length();
  for (std::size_t i = 0; i < a.length(); ++i) {
    if (a.at(i) != b.at(i)) return alpha.less(a.at(i), b.at(i));
  }
  return false;
}

}  // namespace apent
