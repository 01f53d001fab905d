#pragma once

#include <complex>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "apent/chain.hpp"
#include "apent/hermitian.hpp"
#include "apent/word.hpp"

namespace apent {

// Matrix-valued positive definite function on a free group, held either as an
// explicit table of k x k blocks on a ball or through a closed form (regular
// character, letter-multiplicative scalar functions, mollifications). Values
// satisfy phi(g^{-1}) = phi(g)* by construction; positivity on balls is
// checked separately by check_positive.
class PdFunction {
 public:
  static constexpr int kUnlimitedRadius = std::numeric_limits<int>::max();

  // An empty table of k x k blocks meant to cover all words up to radius.
  PdFunction(int rank, int k, int radius);

  int rank() const { return rank_; }
  int block_size() const { return k_; }
  int radius() const { return radius_; }
  // "table", "regular", "haagerup" or "mollified".
  const std::string& kind() const { return kind_; }

  bool unital() const;  // phi(e) = I
  bool has_value(const Word& g) const;
  // Throws std::out_of_range past the radius or for an undetermined word.
  CMat value(const Word& g) const;

  // Table writes; also stores the adjoint at g^{-1} and rejects writes that
  // contradict an existing entry.
  void set_value(const Word& g, const CMat& v);
  // Stored words, for serialization and coverage scans. Table kind only.
  std::vector<Word> stored_words() const;

  // Closed-form payloads, used by the serializer.
  const std::vector<std::complex<double>>& letter_values() const;
  double mollify_s() const { return moll_s_; }
  const PdFunction& mollify_base() const;

  friend PdFunction regular_character(int r, int k);
  friend PdFunction haagerup(const std::vector<std::complex<double>>& values,
                             int r, int radius);
  friend PdFunction mollify(const PdFunction& phi, double s);

 private:
  int rank_;
  int k_;
  int radius_;
  std::string kind_;
  std::unordered_map<Word, CMat, WordHash> table_;
  std::vector<std::complex<double>> letter_values_;
  double moll_s_ = 1.0;
  std::shared_ptr<const PdFunction> moll_base_;
};

// The Gram matrix [phi(g^{-1} h)]_{g,h in F} of k x k blocks, with the word
// list it was assembled over.
struct BlockGram {
  std::vector<Word> words;
  int k;
  CMat gram;
};

// Assembles the block Gram matrix over F. Throws std::out_of_range naming
// the required radius when some g^{-1} h falls outside phi's radius.
BlockGram block_gram(const PdFunction& phi, const std::vector<Word>& F);

// phi(e) = I_k, zero elsewhere; positive definite at every radius.
PdFunction regular_character(int r, int k);

// Scalar function multiplicative along letters: phi(s_n...s_1) is the product
// of the per-letter values, with phi(s^{-1}) the conjugate of phi(s). Each
// value must lie in the closed unit disk.
PdFunction haagerup(const std::vector<std::complex<double>>& values, int r,
                    int radius);

// psi(e) = phi(e), psi(g) = s phi(g) otherwise, for unital phi and s in
// [0, 1]: the convex combination of phi with the regular character.
PdFunction mollify(const PdFunction& phi, double s);

// True iff phi[B_n] is positive semidefinite within tolerance. Needs
// radius >= 2n.
bool check_positive(const PdFunction& phi, int n);

// Contraction coefficients along a grounded chain: coeffs[i] parametrizes the
// enlargement made by chain step i, with rows indexed by F_i \ s F_i blocks
// and columns by the appended word's block. strict[i] records whether the
// enlarged Gram matrix stayed nonsingular.
struct VerblunskySeq {
  GroundedChain chain;
  std::vector<CMat> coeffs;
  std::vector<bool> strict;
};

// Reads the coefficients of phi along the chain. Throws std::domain_error
// naming the first chain index whose Gram matrix goes singular before the
// final set (the final one may be singular, giving a non-strict last
// coefficient).
VerblunskySeq verblunsky_extract(const PdFunction& phi,
                                 const GroundedChain& chain);

// Rebuilds the unital function the coefficients encode, as a table on the
// words reachable from the chain's final set. With require_strict, a
// coefficient of norm one is rejected instead of producing a singular Gram.
PdFunction verblunsky_reconstruct(const VerblunskySeq& seq, int k,
                                  bool require_strict = false);

}  // namespace apent
