#pragma once

#include <cstddef>
#include <vector>

#include "apent/ball.hpp"
#include "apent/word.hpp"

namespace apent {

// One enlargement F -> F ∪ {g}. The direction letter s (the unique one with
// s^{-1}g in F; unique because the Cayley graph is a tree) splits F into
// F \ sF ("outer") and F ∩ sF ("inner"); together with g this is the block
// order used by the coefficient codec. Indices refer to the chain's word
// list; inner_shifted[j] is the index of s^{-1} * (inner[j]-th word), and
// parent is the index of s^{-1}g.
struct ChainStep {
  Word g;
  Letter dir;
  int parent;
  std::vector<int> outer;
  std::vector<int> inner;
  std::vector<int> inner_shifted;
};

// A growing connected word set starting at {e}: each added word is adjacent
// (in the left Cayley graph) to the set built so far and not yet present.
class GroundedChain {
 public:
  explicit GroundedChain(const Alphabet& alpha);

  // Throws std::invalid_argument when g is already present or not adjacent.
  void extend(const Word& g);

  // The chain e, then words in length-lex order: count words in total.
  static GroundedChain length_lex(const Alphabet& alpha, std::size_t count,
                                  std::size_t cap = kDefaultBallCap);
  // Length-lex chain covering exactly B_radius.
  static GroundedChain length_lex_ball(const Alphabet& alpha, int radius,
                                       std::size_t cap = kDefaultBallCap);

  const Alphabet& alphabet() const { return alpha_; }
  std::size_t size() const { return index_.size(); }
  std::size_t step_count() const { return steps_.size(); }
  const Word& word(std::size_t i) const { return index_[i]; }
  const std::vector<Word>& words() const { return index_.words(); }
  const WordIndex& index() const { return index_; }
  const ChainStep& step(std::size_t i) const { return steps_[i]; }
  // Words present before step i was applied (the first i+1 of the list).
  std::vector<Word> set_before(std::size_t step) const;

 private:
  Alphabet alpha_;
  WordIndex index_;
  std::vector<ChainStep> steps_;
};

}  // namespace apent
