#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "soficlab/core_groups.hpp"
#include "soficlab/errors.hpp"
#include "soficlab/graph_products.hpp"
#include "soficlab/rational.hpp"
#include "soficlab/rng.hpp"

namespace soficlab {

template <class Ops, class Key>
concept KeyAlgebra = requires(const Ops& ops, const Key& a, const Key& b) {
  { ops.identity() } -> std::convertible_to<Key>;
  { ops.multiply(a, b) } -> std::convertible_to<Key>;
  { ops.inverse(a) } -> std::convertible_to<Key>;
};

// Keys are vertex-group elements (finite-group indices or integers).
struct VertexGroupOps {
  const VertexGroup* group;
  Elt identity() const { return 0; }
  Elt multiply(Elt a, Elt b) const { return group->multiply(a, b); }
  Elt inverse(Elt a) const { return group->inverse(a); }
};

struct GraphProductOps {
  const GraphProduct* ctx;
  GPElement identity() const { return ctx->identity(); }
  GPElement multiply(const GPElement& a, const GPElement& b) const { return ctx->multiply(a, b); }
  GPElement inverse(const GPElement& a) const { return ctx->inverse(a); }
};

inline std::string key_string(Elt k) { return std::to_string(k); }
inline std::string key_string(const GPElement& g) { return to_string(g); }

template <class Key>
class QuasiActionTable {
 public:
  QuasiActionTable() = default;
  QuasiActionTable(std::size_t carrier, std::map<Key, Permutation> entries)
      : carrier_(carrier), entries_(std::move(entries)) {
    for (const auto& [k, p] : entries_)
      if (p.size() != carrier_)
        fail(ErrorCode::SizeMismatch, "entry " + key_string(k) + " acts on " + std::to_string(p.size()) +
                                          " points, carrier has " + std::to_string(carrier_));
  }

  std::size_t carrier_size() const { return carrier_; }
  const std::map<Key, Permutation>& entries() const { return entries_; }
  bool contains(const Key& k) const { return entries_.count(k) != 0; }
  const Permutation* find(const Key& k) const {
    auto it = entries_.find(k);
    return it == entries_.end() ? nullptr : &it->second;
  }
  const Permutation& at(const Key& k) const {
    if (auto* p = find(k)) return *p;
    fail(ErrorCode::MissingProductKey, "no entry for key " + key_string(k));
  }
  void set(const Key& k, Permutation p) {
    if (p.size() != carrier_) fail(ErrorCode::SizeMismatch, "entry size differs from the carrier");
    entries_[k] = std::move(p);
  }
  std::vector<Key> keys() const {
    std::vector<Key> out;
    for (const auto& kv : entries_) out.push_back(kv.first);
    return out;
  }

  friend bool operator==(const QuasiActionTable&, const QuasiActionTable&) = default;

 private:
  std::size_t carrier_ = 0;
  std::map<Key, Permutation> entries_;
};

template <class Key>
struct ConditionReport {
  bool cond_a = true;
  bool cond_b = true;
  std::vector<Key> cond_c;
  Rational cond_d_max_defect = 0;
  std::optional<std::pair<Key, Key>> cond_d_worst_pair;
  Rational epsilon = 0;
  // disagreement counts over F x F, row-major, out of carrier points
  std::vector<std::size_t> pair_disagreements;
  std::size_t carrier = 0;

  bool special() const { return cond_a && cond_b && cond_c.empty() && cond_d_max_defect <= epsilon; }
};

template <class Key, class Ops>
  requires KeyAlgebra<Ops, Key>
ConditionReport<Key> verify_special(const QuasiActionTable<Key>& phi, std::span<const Key> F, const Rational& eps,
                                    const Ops& ops) {
  ConditionReport<Key> r;
  r.epsilon = eps;
  r.carrier = phi.carrier_size();
  const Key one = ops.identity();
  const Permutation* id = phi.find(one);
  r.cond_a = id != nullptr && id->is_identity();
  for (const Key& g : F) {
    const Permutation& pg = phi.at(g);
    const Permutation* pinv = phi.find(ops.inverse(g));
    if (pinv == nullptr) fail(ErrorCode::MissingInverseKey, "no entry for the inverse of " + key_string(g));
    if (*pinv != pg.inverse()) r.cond_b = false;
    if (!(g == one) && pg.has_fixed_point()) r.cond_c.push_back(g);
  }
  std::size_t worst = 0;
  r.pair_disagreements.reserve(F.size() * F.size());
  for (const Key& g1 : F) {
    const Permutation& p1 = phi.at(g1);
    for (const Key& g2 : F) {
      const Permutation& p2 = phi.at(g2);
      const Permutation* p12 = phi.find(ops.multiply(g1, g2));
      if (p12 == nullptr)
        fail(ErrorCode::MissingProductKey, "no entry for the product of " + key_string(g1) + " and " + key_string(g2));
      std::size_t count = 0;
      for (Point x = 0; x < r.carrier; ++x) count += (*p12)(x) != p2(p1(x));
      r.pair_disagreements.push_back(count);
      if (!r.cond_d_worst_pair || count > worst) {
        worst = count;
        r.cond_d_worst_pair = std::make_pair(g1, g2);
      }
    }
  }
  if (r.carrier > 0)
    r.cond_d_max_defect = ratio(static_cast<std::int64_t>(worst), static_cast<std::int64_t>(r.carrier));
  return r;
}

template <class Key, class Ops>
  requires KeyAlgebra<Ops, Key>
Rational defect(const QuasiActionTable<Key>& phi, std::span<const Key> F, const Ops& ops) {
  return verify_special(phi, F, Rational(0), ops).cond_d_max_defect;
}

inline constexpr std::size_t kDefaultCarrierCap = 10'000'000;

// Coordinatewise action on the product carrier; coordinate 0 is the most
// significant digit of the mixed-radix point index.
template <class Key>
QuasiActionTable<Key> product_quasi_action(std::span<const QuasiActionTable<Key>> phis,
                                           std::size_t carrier_cap = kDefaultCarrierCap) {
  if (phis.empty()) fail(ErrorCode::InvalidArgument, "product of no tables");
  std::size_t carrier = 1;
  for (const auto& t : phis) {
    if (t.keys() != phis.front().keys()) fail(ErrorCode::KeyDomainMismatch, "tables have different key sets");
    if (t.carrier_size() == 0 || carrier > carrier_cap / t.carrier_size())
      fail(ErrorCode::CarrierBudgetExceeded, "product carrier exceeds " + std::to_string(carrier_cap) + " points");
    carrier *= t.carrier_size();
  }
  std::map<Key, Permutation> entries;
  std::vector<std::size_t> digits(phis.size());
  for (const Key& k : phis.front().keys()) {
    std::vector<Point> image(carrier);
    for (std::size_t x = 0; x < carrier; ++x) {
      std::size_t rest = x;
      for (std::size_t i = phis.size(); i-- > 0;) {
        digits[i] = rest % phis[i].carrier_size();
        rest /= phis[i].carrier_size();
      }
      std::size_t y = 0;
      for (std::size_t i = 0; i < phis.size(); ++i)
        y = y * phis[i].carrier_size() + phis[i].at(k)(static_cast<Point>(digits[i]));
      image[x] = static_cast<Point>(y);
    }
    entries.emplace(k, Permutation(std::move(image)));
  }
  return QuasiActionTable<Key>(carrier, std::move(entries));
}

// Whether the permutations commuting with every entry act transitively on the
// carrier. Decided for tables whose entries already act transitively: the
// commuting map sending 0 to b is then forced along a spanning tree of the
// orbit, and only needs checking.
template <class Key>
bool has_transitive_centralizer(const QuasiActionTable<Key>& phi) {
  const std::size_t n = phi.carrier_size();
  if (n == 0) return false;
  std::vector<const Permutation*> gens;
  for (const auto& [k, p] : phi.entries()) gens.push_back(&p);
  // parent[x] = (predecessor, generator) on a BFS tree from 0
  std::vector<std::pair<Point, std::size_t>> parent(n, {0, SIZE_MAX});
  std::vector<Point> order{0};
  std::vector<bool> seen(n, false);
  seen[0] = true;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t g = 0; g < gens.size(); ++g) {
      const Point y = (*gens[g])(order[i]);
      if (!seen[y]) {
        seen[y] = true;
        parent[y] = {order[i], g};
        order.push_back(y);
      }
    }
  if (order.size() != n) return false;
  std::vector<Point> sigma(n);
  for (Point b = 0; b < n; ++b) {
    sigma[0] = b;
    for (std::size_t i = 1; i < n; ++i) {
      const Point x = order[i];
      sigma[x] = (*gens[parent[x].second])(sigma[parent[x].first]);
    }
    for (const Permutation* g : gens)
      for (Point x = 0; x < n; ++x)
        if (sigma[(*g)(x)] != (*g)(sigma[x])) return false;
  }
  return true;
}

// Number of points moved by each degradation: ceil(delta * carrier), at least
// two (a single point cannot be moved alone), at most the carrier.
std::size_t degradation_support(const Rational& delta, std::size_t carrier);

// Post-composes a seeded random selection of non-involution pairs {g, g^-1}
// with a cycle on degradation_support points; retries with derived seeds while
// a perturbed entry acquires a fixed point.
template <class Key, class Ops>
  requires KeyAlgebra<Ops, Key>
QuasiActionTable<Key> degrade(const QuasiActionTable<Key>& phi, const Rational& delta, std::uint64_t seed,
                              const Ops& ops) {
  if (delta < 0 || delta >= 1) fail(ErrorCode::InvalidArgument, "delta must lie in [0,1)");
  if (delta == 0) return phi;
  const std::size_t n = phi.carrier_size();
  const std::size_t support = degradation_support(delta, n);
  const Key one = ops.identity();
  std::vector<Key> pair_keys;  // the smaller key of each pair
  for (const auto& [g, p] : phi.entries()) {
    if (g == one) continue;
    Key gi = ops.inverse(g);
    if (gi == g || !phi.contains(gi)) continue;
    if (g < gi) pair_keys.push_back(g);
  }
  if (pair_keys.empty() || support < 2) return phi;
  for (std::uint64_t attempt = 0; attempt < 32; ++attempt) {
    Rng rng(derive_seed(seed, attempt));
    std::vector<Key> chosen;
    for (const Key& g : pair_keys)
      if (rng.coin()) chosen.push_back(g);
    if (chosen.empty()) chosen.push_back(pair_keys[rng.below(pair_keys.size())]);
    QuasiActionTable<Key> out = phi;
    bool ok = true;
    for (const Key& g : chosen) {
      std::vector<Point> pts(n);
      for (Point x = 0; x < n; ++x) pts[x] = x;
      std::shuffle(pts.begin(), pts.end(), rng.engine());
      std::vector<Point> cycle(n);
      for (Point x = 0; x < n; ++x) cycle[x] = x;
      for (std::size_t i = 0; i < support; ++i) cycle[pts[i]] = pts[(i + 1) % support];
      Permutation perturbed = phi.at(g).then(Permutation(std::move(cycle)));
      ok = ok && !perturbed.has_fixed_point();
      out.set(ops.inverse(g), perturbed.inverse());
      out.set(g, std::move(perturbed));
    }
    if (ok) return out;
  }
  fail(ErrorCode::CannotPreserveFixedpointFreeness, "every one of 32 attempts created a fixed point");
}

// Regular right action of a finite vertex group, keyed by element index.
QuasiActionTable<Elt> regular_table(const FiniteGroup& g);

// Integer keys -max_abs..max_abs acting on Z/carrier by x -> x + key.
QuasiActionTable<Elt> shift_table(std::size_t carrier, Elt max_abs);

}  // namespace soficlab
