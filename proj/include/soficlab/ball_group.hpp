#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <map>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "soficlab/core_groups.hpp"

namespace soficlab {

// Signed generator: symbol index plus an inversion bit.
struct Letter {
  std::uint32_t code = 0;

  static Letter make(std::uint32_t symbol, bool inverse) { return Letter{(symbol << 1) | (inverse ? 1u : 0u)}; }
  std::uint32_t symbol() const { return code >> 1; }
  bool inverse() const { return (code & 1u) != 0; }
  Letter inverted() const { return Letter{code ^ 1u}; }

  friend bool operator==(Letter, Letter) = default;
  friend auto operator<=>(Letter, Letter) = default;
};

class ReducedWord {
 public:
  using Storage = boost::container::small_vector<Letter, 8>;

  ReducedWord() = default;

  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  const Storage& letters() const { return letters_; }
  Letter operator[](std::size_t i) const { return letters_[i]; }
  Letter back() const { return letters_.back(); }

  // Appends with free reduction; returns true when the letter cancelled.
  bool push(Letter x) {
    if (!letters_.empty() && letters_.back() == x.inverted()) {
      letters_.pop_back();
      return true;
    }
    letters_.push_back(x);
    return false;
  }
  void pop() { letters_.pop_back(); }
  void set_back(Letter x) { letters_.back() = x; }
  void append(const ReducedWord& w) {
    for (Letter x : w.letters_) push(x);
  }
  ReducedWord inverse() const {
    ReducedWord r;
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) r.letters_.push_back(it->inverted());
    return r;
  }

  friend bool operator==(const ReducedWord& a, const ReducedWord& b) { return a.letters_ == b.letters_; }
  friend auto operator<=>(const ReducedWord& a, const ReducedWord& b) {
    return std::lexicographical_compare_three_way(a.letters_.begin(), a.letters_.end(), b.letters_.begin(),
                                                  b.letters_.end());
  }

 private:
  Storage letters_;
};

ReducedWord reduce(std::span<const Letter> word);
std::size_t hash_value(const ReducedWord& w);

// Equality of u and v in a group whose relators all exceed length R. Throws
// RadiusExceeded when |u| + |v| > R, where the answer would not be certified.
bool words_equal_bounded(const ReducedWord& u, const ReducedWord& v, std::size_t R);

// 1 + 2s((2s-1)^R - 1)/(2s-2); saturates at SIZE_MAX.
std::size_t ball_size(std::size_t s, std::size_t R);

// Left multiplication on the radius-R ball of the free group on s symbols,
// completed to permutations by a seeded affine bijection between the words
// pushed out of the ball and the words not reached. Works without building
// the ball, so it also serves radii whose ball is far too large to store.
class BallAction {
 public:
  BallAction(std::size_t s, std::size_t R, std::uint64_t seed);

  std::size_t gen_count() const { return s_; }
  std::size_t radius() const { return R_; }
  std::uint64_t seed() const { return seed_; }

  ReducedWord apply(Letter g, const ReducedWord& w) const;
  // Applies the letters right to left, so that the empty word is sent to the
  // free reduction of the word.
  ReducedWord apply_word(std::span<const Letter> word, const ReducedWord& w) const;

 private:
  // rank among length-R words whose first letter differs from `avoid`
  std::uint64_t rank(const ReducedWord& w, Letter avoid) const;
  ReducedWord unrank(std::uint64_t r, Letter avoid) const;
  void check(Letter g) const;

  std::size_t s_, R_;
  std::uint64_t seed_;
  std::uint64_t M_;  // (2s-1)^R
  std::vector<std::uint64_t> a_, a_inv_, b_;
};

class BallGroupRep {
 public:
  std::size_t gen_count() const { return action_.gen_count(); }
  std::size_t radius() const { return action_.radius(); }
  std::uint64_t seed() const { return action_.seed(); }
  std::size_t carrier_size() const { return words_.size(); }

  const Permutation& sigma(Letter g) const;
  const ReducedWord& word_at(Point p) const { return words_[p]; }
  Point index_of(const ReducedWord& w) const;
  const BallAction& action() const { return action_; }

 private:
  friend BallGroupRep build_ball_group(std::size_t, std::size_t, std::uint64_t, std::size_t);
  explicit BallGroupRep(BallAction action) : action_(std::move(action)) {}

  BallAction action_;
  std::vector<ReducedWord> words_;  // by length, then lexicographically
  std::map<ReducedWord, Point> index_;
  std::vector<Permutation> sigma_;  // indexed by letter code
};

BallGroupRep build_ball_group(std::size_t s, std::size_t R, std::uint64_t seed,
                              std::size_t carrier_budget = 10'000'000);

// sigma[g_1] o sigma[g_2] o ... o sigma[g_r] as a function composition, so
// the basepoint goes to the free reduction of g_1 ... g_r.
Permutation eval_word(const BallGroupRep& V, std::span<const Letter> word);

std::string to_string(const ReducedWord& w);

}  // namespace soficlab
