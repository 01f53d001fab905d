#include "apent/pdf.hpp"

#include <cmath>
#include <stdexcept>

#include "apent/ball.hpp"
#include "apent/completion.hpp"

namespace apent {

namespace {

constexpr double kValueMatchTol = 1e-8;

CMat gather(const CMat& G, const std::vector<int>& rows,
            const std::vector<int>& cols, int k) {
  CMat out(rows.size() * k, cols.size() * k);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out.block(i * k, j * k, k, k) = G.block(rows[i] * k, cols[j] * k, k, k);
  return out;
}

bool values_match(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() <= kValueMatchTol * scale;
}

}  // namespace

PdFunction::PdFunction(int rank, int k, int radius)
    : rank_(rank), k_(k), radius_(radius), kind_("table") {
  if (rank < 1 || rank > 26)
    throw std::invalid_argument("PdFunction: rank " + std::to_string(rank) +
                                " out of range");
  if (k < 1)
    throw std::invalid_argument("PdFunction: block size " + std::to_string(k) +
                                " out of range");
  if (radius < 0)
    throw std::invalid_argument("PdFunction: negative radius");
}

bool PdFunction::unital() const {
  if (!has_value(Word())) return false;
  CMat e = value(Word());
  return (e - CMat::Identity(k_, k_)).cwiseAbs().maxCoeff() <= 1e-12;
}

bool PdFunction::has_value(const Word& g) const {
  if (kind_ == "table") return table_.count(g) > 0;
  return static_cast<int>(g.length()) <= radius_;
}

CMat PdFunction::value(const Word& g) const {
  const int len = static_cast<int>(g.length());
  if (kind_ == "regular") {
    if (len == 0) return CMat::Identity(k_, k_);
    return CMat::Zero(k_, k_);
  }
  if (kind_ == "haagerup") {
    if (len > radius_)
      throw std::out_of_range("value: word length " + std::to_string(len) +
                              " exceeds radius " + std::to_string(radius_));
    std::complex<double> p = 1.0;
    for (int i = 0; i < len; ++i) {
      int gen = letter_generator(g.at(i));
      if (gen >= rank_)
        throw std::invalid_argument("value: word " + to_string(g) +
                                    " uses letters beyond rank " +
                                    std::to_string(rank_));
      std::complex<double> v = letter_values_[gen];
      p *= letter_is_inverse(g.at(i)) ? std::conj(v) : v;
    }
    CMat out(1, 1);
    out(0, 0) = p;
    return out;
  }
  if (kind_ == "mollified") {
    if (len > radius_)
      throw std::out_of_range("value: word length " + std::to_string(len) +
                              " exceeds radius " + std::to_string(radius_));
    CMat base = moll_base_->value(g);
    return len == 0 ? base : CMat(moll_s_ * base);
  }
  auto it = table_.find(g);
  if (it != table_.end()) return it->second;
  if (len > radius_)
    throw std::out_of_range("value: word length " + std::to_string(len) +
                            " exceeds radius " + std::to_string(radius_));
  throw std::out_of_range("value: no stored value for word " + to_string(g));
}

void PdFunction::set_value(const Word& g, const CMat& v) {
  if (kind_ != "table")
    throw std::logic_error("set_value: function kind is " + kind_);
  if (v.rows() != k_ || v.cols() != k_)
    throw std::invalid_argument("set_value: block is " +
                                std::to_string(v.rows()) + "x" +
                                std::to_string(v.cols()) + ", expected " +
                                std::to_string(k_) + "x" + std::to_string(k_));
  for (Letter l : g.letters())
    if (letter_generator(l) >= rank_)
      throw std::invalid_argument("set_value: word " + to_string(g) +
                                  " uses letters beyond rank " +
                                  std::to_string(rank_));
  CMat adj = v.adjoint();
  if (g.length() == 0 && !values_match(v, adj))
    throw std::invalid_argument("set_value: value at e is not Hermitian");
  auto put = [this](const Word& w, const CMat& m) {
    auto it = table_.find(w);
    if (it == table_.end()) {
      table_.emplace(w, m);
    } else if (!values_match(it->second, m)) {
      throw std::invalid_argument("set_value: inconsistent value at word " +
                                  to_string(w));
    }
  };
  put(g, v);
  put(inv(g), adj);
}

std::vector<Word> PdFunction::stored_words() const {
  if (kind_ != "table")
    throw std::logic_error("stored_words: function kind is " + kind_);
  std::vector<Word> out;
  out.reserve(table_.size());
  for (const auto& kv : table_) out.push_back(kv.first);
  return out;
}

const std::vector<std::complex<double>>& PdFunction::letter_values() const {
  if (kind_ != "haagerup")
    throw std::logic_error("letter_values: function kind is " + kind_);
  return letter_values_;
}

const PdFunction& PdFunction::mollify_base() const {
  if (!moll_base_)
    throw std::logic_error("mollify_base: function kind is " + kind_);
  return *moll_base_;
}

BlockGram block_gram(const PdFunction& phi, const std::vector<Word>& F) {
  const int n = static_cast<int>(F.size());
  const int k = phi.block_size();
  // All quotients first, so a radius shortfall is reported with the needed
  // radius before any value is read.
  std::vector<Word> quot(static_cast<std::size_t>(n) * n);
  int required = 0;
  for (int i = 0; i < n; ++i) {
    Word gi = inv(F[i]);
    for (int j = i; j < n; ++j) {
      Word w = mul(gi, F[j]);
      required = std::max(required, static_cast<int>(w.length()));
      quot[static_cast<std::size_t>(i) * n + j] = std::move(w);
    }
  }
  if (required > phi.radius())
    throw std::out_of_range("block_gram requires radius " +
                            std::to_string(required) +
                            " but the function has radius " +
                            std::to_string(phi.radius()));
  // Each distinct quotient word is evaluated once and its inverse stored as
  // the exact adjoint, so equal quotients give bitwise equal blocks.
  std::unordered_map<Word, CMat, WordHash> cache;
  BlockGram out{F, k, CMat(n * k, n * k)};
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Word& w = quot[static_cast<std::size_t>(i) * n + j];
      auto it = cache.find(w);
      if (it == cache.end()) {
        CMat v = phi.value(w);
        it = cache.emplace(w, std::move(v)).first;
        cache.emplace(inv(w), it->second.adjoint());
      }
      out.gram.block(i * k, j * k, k, k) = it->second;
      if (i != j) out.gram.block(j * k, i * k, k, k) = it->second.adjoint();
    }
  return out;
}

PdFunction regular_character(int r, int k) {
  PdFunction out(r, k, PdFunction::kUnlimitedRadius);
  out.kind_ = "regular";
  return out;
}

PdFunction haagerup(const std::vector<std::complex<double>>& values, int r,
                    int radius) {
  if (static_cast<int>(values.size()) != r)
    throw std::invalid_argument("haagerup: " + std::to_string(values.size()) +
                                " letter values for rank " + std::to_string(r));
  for (const auto& v : values)
    if (std::abs(v) > 1.0 + 1e-12)
      throw std::invalid_argument("haagerup: letter value has modulus " +
                                  std::to_string(std::abs(v)) + " > 1");
  PdFunction out(r, 1, radius);
  out.kind_ = "haagerup";
  out.letter_values_ = values;
  return out;
}

PdFunction mollify(const PdFunction& phi, double s) {
  if (!(s >= 0.0 && s <= 1.0))
    throw std::invalid_argument("mollify: s = " + std::to_string(s) +
                                " outside [0, 1]");
  if (!phi.unital())
    throw std::invalid_argument("mollify: function is not unital");
  PdFunction out(phi.rank(), phi.block_size(), phi.radius());
  out.kind_ = "mollified";
  out.moll_s_ = s;
  out.moll_base_ = std::make_shared<PdFunction>(phi);
  return out;
}

bool check_positive(const PdFunction& phi, int n) {
  if (n < 0) throw std::invalid_argument("check_positive: negative radius");
  if (2LL * n > phi.radius())
    throw std::out_of_range("check_positive at n = " + std::to_string(n) +
                            " requires radius " + std::to_string(2 * n) +
                            " but the function has radius " +
                            std::to_string(phi.radius()));
  Alphabet alpha(phi.rank());
  BlockGram G = block_gram(phi, ball(alpha, n));
  if (G.gram.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<CMat> es(G.gram, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  return lo >= -kPsdTol * std::max(1.0, hi);
}

VerblunskySeq verblunsky_extract(const PdFunction& phi,
                                 const GroundedChain& chain) {
  const int k = phi.block_size();
  const std::size_t steps = chain.step_count();
  BlockGram G = block_gram(phi, chain.words());
  std::vector<double> ld = prefix_block_logdets(G.gram, k);
  for (std::size_t j = 0; j + 1 < ld.size(); ++j)
    if (std::isinf(ld[j]))
      throw std::domain_error(
          "verblunsky_extract: singular intermediate Gram matrix at chain "
          "index " +
          std::to_string(j));

  VerblunskySeq out{chain, {}, {}};
  out.coeffs.reserve(steps);
  out.strict.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const ChainStep& st = chain.step(i);
    const int g_idx = static_cast<int>(i) + 1;
    std::vector<int> g_col{g_idx};
    PartialPsd3 p{gather(G.gram, st.outer, st.outer, k),
                  gather(G.gram, st.outer, st.inner, k),
                  gather(G.gram, st.inner, st.inner, k),
                  gather(G.gram, st.inner, g_col, k),
                  gather(G.gram, g_col, g_col, k)};
    CMat corner = gather(G.gram, st.outer, g_col, k);
    out.coeffs.push_back(three_block_extract(p, corner));
    out.strict.push_back(std::isfinite(ld[i + 1]));
  }
  return out;
}

PdFunction verblunsky_reconstruct(const VerblunskySeq& seq, int k,
                                  bool require_strict) {
  const GroundedChain& ch = seq.chain;
  const std::size_t steps = ch.step_count();
  if (seq.coeffs.size() != steps)
    throw std::invalid_argument("verblunsky_reconstruct: " +
                                std::to_string(seq.coeffs.size()) +
                                " coefficients for " + std::to_string(steps) +
                                " chain steps");
  const int n = static_cast<int>(ch.size());
  CMat G = CMat::Zero(n * k, n * k);
  G.block(0, 0, k, k) = CMat::Identity(k, k);

  std::unordered_map<Word, CMat, WordHash> vals;
  auto put = [&vals](const Word& w, const CMat& v) {
    auto it = vals.find(w);
    if (it == vals.end()) {
      vals.emplace(w, v);
    } else if (!values_match(it->second, v)) {
      throw std::logic_error(
          "verblunsky_reconstruct: inconsistent value at word " +
          to_string(w));
    }
  };
  put(Word(), CMat::Identity(k, k));

  for (std::size_t i = 0; i < steps; ++i) {
    const ChainStep& st = ch.step(i);
    const CMat& C = seq.coeffs[i];
    if (require_strict && op_norm(C) >= 1.0 - 1e-12)
      throw std::domain_error("verblunsky_reconstruct: coefficient " +
                              std::to_string(i) +
                              " is not a strict contraction");
    const int new_idx = static_cast<int>(i) + 1;
    PartialPsd3 p{gather(G, st.outer, st.outer, k),
                  gather(G, st.outer, st.inner, k),
                  gather(G, st.inner, st.inner, k),
                  CMat(st.inner.size() * k, k),
                  G.block(st.parent * k, st.parent * k, k, k)};
    for (std::size_t j = 0; j < st.inner.size(); ++j)
      p.q23.block(j * k, 0, k, k) =
          G.block(st.inner_shifted[j] * k, st.parent * k, k, k);
    CMat corner = three_block_corner(p, C);

    G.block(new_idx * k, new_idx * k, k, k) = p.q33;
    for (std::size_t j = 0; j < st.outer.size(); ++j)
      G.block(st.outer[j] * k, new_idx * k, k, k) =
          corner.block(j * k, 0, k, k);
    for (std::size_t j = 0; j < st.inner.size(); ++j)
      G.block(st.inner[j] * k, new_idx * k, k, k) = p.q23.block(j * k, 0, k, k);
    for (int h = 0; h < new_idx; ++h)
      G.block(new_idx * k, h * k, k, k) =
          G.block(h * k, new_idx * k, k, k).adjoint();

    for (int h = 0; h <= new_idx; ++h) {
      Word w = mul(inv(ch.word(h)), st.g);
      CMat v = G.block(h * k, new_idx * k, k, k);
      put(w, v);
      put(inv(w), v.adjoint());
    }
  }

  // The largest ball the recorded words cover completely.
  const Alphabet& alpha = ch.alphabet();
  int radius = 0;
  for (int m = 1;; ++m) {
    if (sphere_size(alpha.rank(), m) > vals.size()) break;
    bool full = true;
    for (const Word& w : sphere(alpha, m))
      if (!vals.count(w)) {
        full = false;
        break;
      }
    if (!full) break;
    radius = m;
  }

  PdFunction out(alpha.rank(), k, radius);
  for (const auto& kv : vals) out.set_value(kv.first, kv.second);
  return out;
}

}  // namespace apent
