#include "apent/chain.hpp"

#include <stdexcept>

namespace apent {

GroundedChain::GroundedChain(const Alphabet& alpha) : alpha_(alpha) {
  index_.push(Word());
}

void GroundedChain::extend(const Word& g) {
  if (g.empty() || index_.contains(g))
    throw std::invalid_argument("chain already contains " + to_string(g));

  // Unique direction s with s^{-1}g already present.
  int dir = -1;
  int parent = -1;
  for (Letter s : alpha_.ordered_letters()) {
    int p = index_.find(mul(letter_inverse(s), g));
    if (p >= 0) {
      if (dir >= 0)
        throw std::logic_error("two enlargement directions for " +
                               to_string(g));
      dir = s;
      parent = p;
    }
  }
  if (dir < 0)
    throw std::invalid_argument(to_string(g) +
                                " is not adjacent to the chain set");

  ChainStep step;
  step.g = g;
  step.dir = static_cast<Letter>(dir);
  step.parent = parent;
  Letter sinv = letter_inverse(step.dir);
  for (std::size_t i = 0; i < index_.size(); ++i) {
    int j = index_.find(mul(sinv, index_[i]));
    if (j >= 0) {
      step.inner.push_back(static_cast<int>(i));
      step.inner_shifted.push_back(j);
    } else {
      step.outer.push_back(static_cast<int>(i));
    }
  }
  index_.push(g);
  steps_.push_back(std::move(step));
}

GroundedChain GroundedChain::length_lex(const Alphabet& alpha,
                                        std::size_t count, std::size_t cap) {
  if (count == 0) throw std::invalid_argument("chain needs at least {e}");
  if (count > cap)
    throw std::length_error("chain of " + std::to_string(count) +
                            " words is over the cap of " + std::to_string(cap));
  int radius = 0;
  while (ball_size(alpha.rank(), radius) < count) ++radius;
  auto words = ball(alpha, radius, cap);
  GroundedChain chain(alpha);
  for (std::size_t i = 1; i < count; ++i) chain.extend(words[i]);
  return chain;
}

GroundedChain GroundedChain::length_lex_ball(const Alphabet& alpha, int radius,
                                             std::size_t cap) {
  return length_lex(alpha, ball_size(alpha.rank(), radius), cap);
}

std::vector<Word> GroundedChain::set_before(std::size_t step) const {
  if (step >= steps_.size())
    throw std::out_of_range("step " + std::to_string(step) + " of " +
                            std::to_string(steps_.size()));
  return std::vector<Word>(index_.words().begin(),
                           index_.words().begin() + step + 1);
}

}  // namespace apent
