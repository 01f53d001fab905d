#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace apent {

// Letters of the free group F_r: 2*i is the i-th generator, 2*i+1 its
// inverse. Printed form: generator i is 'a'+i, its inverse 'A'+i; the empty
// word prints as "e".
using Letter = std::uint8_t;

inline Letter letter_inverse(Letter l) { return l ^ 1u; }
inline int letter_generator(Letter l) { return l >> 1; }
inline bool letter_is_inverse(Letter l) { return (l & 1u) != 0; }

char letter_to_char(Letter l);
Letter letter_from_char(char c, int rank);

// Generating set of F_r together with a strict total order on the 2r
// letters. The default order is a < A < b < B < ...; any permutation is
// accepted (several combinatorial statements are order-sensitive and some
// uses need the reversed order).
class Alphabet {
 public:
  explicit Alphabet(int rank);
  Alphabet(int rank, const std::vector<Letter>& order);

  int rank() const { return rank_; }
  int letter_count() const { return 2 * rank_; }
  int order_rank(Letter l) const { return rank_of_[l]; }
  bool less(Letter a, Letter b) const { return rank_of_[a] < rank_of_[b]; }
  // Letters listed in order, smallest first.
  const std::vector<Letter>& ordered_letters() const { return order_; }
  Alphabet reversed() const;

 private:
  int rank_;
  std::vector<Letter> order_;
  std::vector<std::uint8_t> rank_of_;
};

// A reduced word, letters stored leftmost first. All operations keep words
// reduced; from_letters cancels adjacent inverse pairs.
class Word {
 public:
  Word() = default;
  static Word from_letters(const std::vector<Letter>& letters);

  std::size_t length() const { return ls_.size(); }
  bool empty() const { return ls_.empty(); }
  Letter at(std::size_t i) const { return ls_[i]; }
  Letter leftmost() const { return ls_.front(); }
  Letter rightmost() const { return ls_.back(); }
  const std::vector<Letter>& letters() const { return ls_; }

  // Drops the leftmost letter (the word shortened by its outermost letter).
  Word drop_leftmost() const;
  // Leftmost n letters as a word (n <= length; already reduced).
  Word prefix(std::size_t n) const;

  bool operator==(const Word&) const = default;

 private:
  std::vector<Letter> ls_;
};

Word mul(const Word& a, const Word& b);
Word mul(Letter s, const Word& g);
Word inv(const Word& a);

std::string to_string(const Word& w);
// Parses the printed form; "e" (or "") is the identity.
Word parse_word(const std::string& s, int rank);

struct WordHash {
  std::size_t operator()(const Word& w) const;
};

// Length first, then lexicographic in the alphabet order, leftmost letter
// most significant. This is the enumeration order used everywhere.
bool length_lex_less(const Alphabet& alpha, const Word& a, const Word& b);

}  // namespace apent
