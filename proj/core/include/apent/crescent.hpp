#pragma once

#include <vector>

#include "apent/ball.hpp"
#include "apent/word.hpp"

namespace apent {

// P(g): the strict length-lex predecessors of g. Q(g) = g^{-1} P(g).
// The crescent of g = s_n...s_1 is C(g) = Q(g) \ Q(s_{n-1}...s_1); the
// crescents of all nonempty words partition the group minus the identity.
std::vector<Word> predecessors(const Alphabet& alpha, const Word& g,
                               std::size_t cap = kDefaultBallCap);
std::vector<Word> q_set(const Alphabet& alpha, const Word& g,
                        std::size_t cap = kDefaultBallCap);

// Structural membership test, O(|w|): C(g) meets only the spheres of radius
// 2|g|-2, 2|g|-1, 2|g|, with explicit prefix conditions on w there.
bool crescent_contains(const Alphabet& alpha, const Word& g, const Word& w);

// The unique g with w in C(g); w must be nonempty.
Word crescent_owner(const Alphabet& alpha, const Word& w);

// C(g) materialized (filters the three spheres; sizes grow fast with |g|).
std::vector<Word> crescent(const Alphabet& alpha, const Word& g,
                           std::size_t cap = kDefaultBallCap);

}  // namespace apent
