#include "apent/ball.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace apent {

namespace {

std::size_t checked_add(std::size_t a, std::size_t b) {
  if (a > std::numeric_limits<std::size_t>::max() - b)
    throw std::overflow_error("ball size overflows 64 bits");
  return a + b;
}

std::size_t checked_mul(std::size_t a, std::size_t b) {
  if (b != 0 && a > std::numeric_limits<std::size_t>::max() / b)
    throw std::overflow_error("ball size overflows 64 bits");
  return a * b;
}

}  // namespace

std::size_t sphere_size(int rank, int radius) {
  if (rank < 1) throw std::invalid_argument("rank must be positive");
  if (radius < 0) throw std::invalid_argument("radius must be nonnegative");
  if (radius == 0) return 1;
  // 2r (2r-1)^{n-1}
  std::size_t s = static_cast<std::size_t>(2 * rank);
  for (int i = 1; i < radius; ++i)
    s = checked_mul(s, static_cast<std::size_t>(2 * rank - 1));
  return s;
}

std::size_t ball_size(int rank, int radius) {
  std::size_t total = 0;
  for (int n = 0; n <= radius; ++n)
    total = checked_add(total, sphere_size(rank, n));
  return total;
}

namespace {

void check_cap(const char* what, int rank, int radius, std::size_t cap) {
  std::size_t size = ball_size(rank, radius);
  if (size > cap)
    throw std::length_error(std::string(what) + " of radius " +
                            std::to_string(radius) + " in F_" +
                            std::to_string(rank) + " has " +
                            std::to_string(size) +
                            " words, over the cap of " + std::to_string(cap));
}

// Spheres in length-lex order: prepend letters (in alphabet order) to the
// previous sphere; the outer loop over the new leftmost letter keeps the
// output sorted.
std::vector<std::vector<Word>> spheres_up_to(const Alphabet& alpha,
                                             int radius) {
  std::vector<std::vector<Word>> out(radius + 1);
  out[0] = {Word()};
  for (int n = 1; n <= radius; ++n) {
    out[n].reserve(sphere_size(alpha.rank(), n));
    for (Letter s : alpha.ordered_letters()) {
      for (const Word& w : out[n - 1]) {
        if (!w.empty() && w.leftmost() == letter_inverse(s)) continue;
        out[n].push_back(mul(s, w));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<Word> ball(const Alphabet& alpha, int radius, std::size_t cap) {
  check_cap("ball", alpha.rank(), radius, cap);
  auto spheres = spheres_up_to(alpha, radius);
  std::vector<Word> out;
  out.reserve(ball_size(alpha.rank(), radius));
  for (auto& sp : spheres)
    out.insert(out.end(), sp.begin(), sp.end());
  return out;
}

std::vector<Word> sphere(const Alphabet& alpha, int radius, std::size_t cap) {
  check_cap("enclosing ball", alpha.rank(), radius, cap);
  return spheres_up_to(alpha, radius)[radius];
}

WordIndex::WordIndex(std::vector<Word> words) : words_(std::move(words)) {
  pos_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    auto [it, fresh] = pos_.emplace(words_[i], static_cast<int>(i));
    if (!fresh)
      throw std::invalid_argument("duplicate word in index: " +
                                  to_string(words_[i]));
  }
}

int WordIndex::find(const Word& w) const {
  auto it = pos_.find(w);
  return it == pos_.end() ? -1 : it->second;
}

int WordIndex::push(const Word& w) {
  auto [it, fresh] = pos_.emplace(w, static_cast<int>(words_.size()));
  if (!fresh)
    throw std::invalid_argument("word already in index: " + to_string(w));
  words_.push_back(w);
  return it->second;
}

std::vector<std::pair<int, int>> shifted_intersection(const WordIndex& F,
                                                      Letter s) {
  std::vector<std::pair<int, int>> out;
  Letter sinv = letter_inverse(s);
  for (std::size_t i = 0; i < F.size(); ++i) {
    int j = F.find(mul(sinv, F[i]));
    if (j >= 0) out.emplace_back(static_cast<int>(i), j);
  }
  return out;
}

}  // namespace apent
