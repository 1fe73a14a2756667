#include "soficlab/ball_group.hpp"

#include <numeric>

#include <boost/container_hash/hash.hpp>
#include <boost/integer/mod_inverse.hpp>

#include "soficlab/errors.hpp"
#include "soficlab/rng.hpp"

namespace soficlab {

ReducedWord reduce(std::span<const Letter> word) {
  ReducedWord w;
  for (Letter x : word) w.push(x);
  return w;
}

std::size_t hash_value(const ReducedWord& w) {
  std::size_t seed = w.size();
  for (Letter x : w.letters()) boost::hash_combine(seed, x.code);
  return seed;
}

bool words_equal_bounded(const ReducedWord& u, const ReducedWord& v, std::size_t R) {
  if (u.size() + v.size() > R)
    fail(ErrorCode::RadiusExceeded, "comparing words of lengths " + std::to_string(u.size()) + " and " +
                                        std::to_string(v.size()) + " exceeds radius " + std::to_string(R));
  return u == v;
}

std::size_t ball_size(std::size_t s, std::size_t R) {
  if (s == 0) return 1;
  unsigned __int128 total = 1, layer = 2 * s;
  const unsigned __int128 cap = SIZE_MAX;
  for (std::size_t l = 1; l <= R; ++l) {
    total += layer;
    if (total > cap) return SIZE_MAX;
    layer *= 2 * s - 1;
    if (layer > cap) layer = cap;
  }
  return static_cast<std::size_t>(total);
}

BallAction::BallAction(std::size_t s, std::size_t R, std::uint64_t seed) : s_(s), R_(R), seed_(seed), M_(1) {
  if (s == 0 || R == 0) fail(ErrorCode::InvalidArgument, "ball group needs s >= 1 and R >= 1");
  for (std::size_t i = 0; i < R; ++i) {
    if (M_ > (std::uint64_t{1} << 62) / (2 * s - 1))
      fail(ErrorCode::CarrierBudgetExceeded, "sphere of radius " + std::to_string(R) + " is too large to rank");
    M_ *= 2 * s - 1;
  }
  for (std::size_t g = 0; g < s; ++g) {
    Rng rng(derive_seed(seed, g));
    // a one-word sphere (s = 1) needs no mixing
    std::uint64_t a = 1, a_inv = 1, b = 0;
    if (M_ > 1) {
      do a = 1 + rng.below(M_ - 1);
      while (std::gcd(a, M_) != 1);
      b = rng.below(M_);
      a_inv = static_cast<std::uint64_t>(
          boost::integer::mod_inverse(static_cast<std::int64_t>(a), static_cast<std::int64_t>(M_)));
    }
    a_.push_back(a);
    a_inv_.push_back(a_inv);
    b_.push_back(b);
  }
}

void BallAction::check(Letter g) const {
  if (g.symbol() >= s_)
    fail(ErrorCode::BadGeneratorIndex, "generator " + std::to_string(g.symbol()) + " with only " +
                                           std::to_string(s_) + " generators");
}

std::uint64_t BallAction::rank(const ReducedWord& w, Letter avoid) const {
  std::uint64_t r = 0;
  std::uint32_t excluded = avoid.code;
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::uint32_t c = w[i].code;
    r = r * (2 * s_ - 1) + (c - (c > excluded ? 1 : 0));
    excluded = w[i].inverted().code;
  }
  return r;
}

ReducedWord BallAction::unrank(std::uint64_t r, Letter avoid) const {
  std::vector<std::uint32_t> digits(R_);
  for (std::size_t i = R_; i-- > 0;) {
    digits[i] = static_cast<std::uint32_t>(r % (2 * s_ - 1));
    r /= 2 * s_ - 1;
  }
  ReducedWord w;
  std::uint32_t excluded = avoid.code;
  for (std::size_t i = 0; i < R_; ++i) {
    Letter x{digits[i] + (digits[i] >= excluded ? 1 : 0)};
    w.push(x);
    excluded = x.inverted().code;
  }
  return w;
}

ReducedWord BallAction::apply(Letter g, const ReducedWord& w) const {
  check(g);
  if (!w.empty() && w[0] == g.inverted()) {
    ReducedWord out;
    for (std::size_t i = 1; i < w.size(); ++i) out.push(w[i]);
    return out;
  }
  if (w.size() < R_) {
    ReducedWord out;
    out.push(g);
    out.append(w);
    return out;
  }
  const std::size_t s = g.symbol();
  const unsigned __int128 r = rank(w, g.inverted());
  std::uint64_t image;
  if (!g.inverse())
    image = static_cast<std::uint64_t>((a_[s] * r + b_[s]) % M_);
  else
    image = static_cast<std::uint64_t>((a_inv_[s] * ((r + M_ - b_[s]) % M_)) % M_);
  return unrank(image, g);
}

ReducedWord BallAction::apply_word(std::span<const Letter> word, const ReducedWord& w) const {
  ReducedWord cur = w;
  for (std::size_t i = word.size(); i-- > 0;) cur = apply(word[i], cur);
  return cur;
}

const Permutation& BallGroupRep::sigma(Letter g) const {
  if (g.symbol() >= gen_count())
    fail(ErrorCode::BadGeneratorIndex, "generator " + std::to_string(g.symbol()) + " out of range");
  return sigma_[g.code];
}

Point BallGroupRep::index_of(const ReducedWord& w) const {
  auto it = index_.find(w);
  if (it == index_.end()) fail(ErrorCode::InvalidArgument, "word " + to_string(w) + " is outside the ball");
  return it->second;
}

BallGroupRep build_ball_group(std::size_t s, std::size_t R, std::uint64_t seed, std::size_t carrier_budget) {
  std::size_t size = ball_size(s, R);
  if (size > carrier_budget)
    fail(ErrorCode::CarrierBudgetExceeded, "ball of " + std::to_string(size) + " words exceeds the budget " +
                                               std::to_string(carrier_budget));
  BallGroupRep V{BallAction(s, R, seed)};
  V.words_.reserve(size);
  V.words_.emplace_back();
  std::size_t begin = 0;
  for (std::size_t l = 1; l <= R; ++l) {
    std::size_t end = V.words_.size();
    for (std::size_t i = begin; i < end; ++i)
      for (std::uint32_t c = 0; c < 2 * s; ++c) {
        const ReducedWord& w = V.words_[i];
        if (!w.empty() && w.back().inverted().code == c) continue;
        ReducedWord next = w;
        next.push(Letter{c});
        V.words_.push_back(std::move(next));
      }
    begin = end;
  }
  for (Point p = 0; p < V.words_.size(); ++p) V.index_.emplace(V.words_[p], p);
  for (std::uint32_t c = 0; c < 2 * s; ++c) {
    std::vector<Point> image(V.words_.size());
    for (Point p = 0; p < V.words_.size(); ++p) image[p] = V.index_of(V.action_.apply(Letter{c}, V.words_[p]));
    V.sigma_.emplace_back(std::move(image));
  }
  return V;
}

Permutation eval_word(const BallGroupRep& V, std::span<const Letter> word) {
  Permutation P = Permutation::identity(V.carrier_size());
  for (std::size_t i = word.size(); i-- > 0;) P = P.then(V.sigma(word[i]));
  return P;
}

std::string to_string(const ReducedWord& w) {
  if (w.empty()) return "e";
  std::string out;
  for (Letter x : w.letters()) {
    if (!out.empty()) out += ' ';
    out += "g" + std::to_string(x.symbol()) + (x.inverse() ? "^-1" : "");
  }
  return out;
}

}  // namespace soficlab
