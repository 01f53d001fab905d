#pragma once

#include <cstddef>
#include <unordered_map>
#include <utility>
#include <vector>

#include "apent/word.hpp"

namespace apent {

// Enumerating a ball materializes every word in it; this guards against
// requests that would silently eat memory. Callers may raise it explicitly.
inline constexpr std::size_t kDefaultBallCap = 20000;

// |B_n| and |S_n| in F_r, exact; throws std::overflow_error when the count
// does not fit in 64 bits.
std::size_t ball_size(int rank, int radius);
std::size_t sphere_size(int rank, int radius);

// Words of length <= radius (resp. == radius) in length-lex order. Throws
// std::length_error naming radius and size when the ball exceeds cap.
std::vector<Word> ball(const Alphabet& alpha, int radius,
                       std::size_t cap = kDefaultBallCap);
std::vector<Word> sphere(const Alphabet& alpha, int radius,
                         std::size_t cap = kDefaultBallCap);

// Position lookup over a fixed word list.
class WordIndex {
 public:
  WordIndex() = default;
  explicit WordIndex(std::vector<Word> words);

  // -1 if absent.
  int find(const Word& w) const;
  bool contains(const Word& w) const { return find(w) >= 0; }
  // Appends a word not yet present.
  int push(const Word& w);

  std::size_t size() const { return words_.size(); }
  const Word& operator[](std::size_t i) const { return words_[i]; }
  const std::vector<Word>& words() const { return words_; }

 private:
  std::vector<Word> words_;
  std::unordered_map<Word, int, WordHash> pos_;
};

// F ∩ sF = {h in F : s^{-1}h in F}, returned as pairs
// (index of h, index of s^{-1}h), in increasing index-of-h order.
std::vector<std::pair<int, int>> shifted_intersection(const WordIndex& F,
                                                      Letter s);

}  // namespace apent
