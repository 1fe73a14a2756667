#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "soficlab/core_groups.hpp"

namespace soficlab {

// Subset of {0..31}.
class VertexSet {
 public:
  constexpr VertexSet() = default;
  constexpr explicit VertexSet(std::uint32_t bits) : bits_(bits) {}
  static VertexSet all(std::size_t n) { return VertexSet(n >= 32 ? ~0u : ((1u << n) - 1u)); }
  static VertexSet single(int v) { return VertexSet(1u << v); }
  static VertexSet of(std::initializer_list<int> vs);

  std::uint32_t bits() const { return bits_; }
  bool contains(int v) const { return (bits_ >> v) & 1u; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  bool subset_of(VertexSet other) const { return (bits_ & ~other.bits_) == 0; }
  VertexSet with(int v) const { return VertexSet(bits_ | (1u << v)); }
  VertexSet without(int v) const { return VertexSet(bits_ & ~(1u << v)); }
  std::vector<int> members() const;

  friend VertexSet operator|(VertexSet a, VertexSet b) { return VertexSet(a.bits_ | b.bits_); }
  friend VertexSet operator&(VertexSet a, VertexSet b) { return VertexSet(a.bits_ & b.bits_); }
  friend bool operator==(VertexSet, VertexSet) = default;
  friend auto operator<=>(VertexSet, VertexSet) = default;

 private:
  std::uint32_t bits_ = 0;
};

std::string to_string(VertexSet s);

class SimpleGraph {
 public:
  SimpleGraph() = default;
  // Throws BadGraph on loops, duplicate edges, out-of-range vertices, or n > 32.
  SimpleGraph(std::size_t n, const std::vector<std::pair<int, int>>& edges);

  std::size_t size() const { return adjacency_.size(); }
  bool adjacent(int u, int v) const { return adjacency_[u].contains(v); }
  VertexSet link(int v) const { return adjacency_[v]; }
  std::vector<std::pair<int, int>> edges() const;

  friend bool operator==(const SimpleGraph&, const SimpleGraph&) = default;

 private:
  std::vector<VertexSet> adjacency_;
};

using Elt = std::int64_t;

// A vertex group: a finite group on element indices, or the integers under
// addition. The identity is 0 in both cases.
class VertexGroup {
 public:
  static VertexGroup finite(FiniteGroup g);
  static VertexGroup integers();

  bool is_finite() const { return finite_.has_value(); }
  const FiniteGroup& finite_group() const { return *finite_; }
  // 0 for the integers.
  std::size_t order() const { return finite_ ? finite_->order() : 0; }
  bool contains(Elt a) const { return finite_ ? finite_->contains(a) : true; }
  Elt multiply(Elt a, Elt b) const;
  Elt inverse(Elt a) const;

  friend bool operator==(const VertexGroup&, const VertexGroup&) = default;

 private:
  std::optional<FiniteGroup> finite_;
};

struct Syllable {
  std::int32_t vertex = 0;
  Elt elt = 0;

  friend bool operator==(const Syllable&, const Syllable&) = default;
  friend auto operator<=>(const Syllable&, const Syllable&) = default;
};

class GraphProduct;

// Element of a graph product in canonical form: minimal syllable length, and
// among minimal expressions the one whose vertex sequence is lexicographically
// least.
class GPElement {
 public:
  GPElement() = default;

  const GraphProduct* context() const { return ctx_; }
  const std::vector<Syllable>& syllables() const { return syllables_; }
  std::size_t length() const { return syllables_.size(); }
  bool is_identity() const { return syllables_.empty(); }
  VertexSet support() const;

  friend bool operator==(const GPElement& a, const GPElement& b) { return a.syllables_ == b.syllables_; }
  friend auto operator<=>(const GPElement& a, const GPElement& b) { return a.syllables_ <=> b.syllables_; }

 private:
  friend class GraphProduct;
  GPElement(const GraphProduct* ctx, std::vector<Syllable> s) : ctx_(ctx), syllables_(std::move(s)) {}

  const GraphProduct* ctx_ = nullptr;
  std::vector<Syllable> syllables_;
};

std::size_t hash_value(const GPElement& g);

// Context handle: graph plus vertex groups. Elements keep a pointer to it, so
// it must outlive them; it is immutable after construction.
class GraphProduct {
 public:
  GraphProduct(SimpleGraph graph, std::vector<VertexGroup> groups);

  const SimpleGraph& graph() const { return graph_; }
  std::size_t vertex_count() const { return groups_.size(); }
  const VertexGroup& group(int v) const { return groups_[v]; }
  const std::vector<VertexGroup>& groups() const { return groups_; }
  VertexSet vertices() const { return VertexSet::all(groups_.size()); }
  // Distinct adjacent vertices commute.
  bool commute(int u, int v) const { return u != v && graph_.adjacent(u, v); }

  GPElement identity() const { return GPElement(this, {}); }
  GPElement syllable(int vertex, Elt elt) const;
  // Throws BadVertex / BadElement on invalid input; identity syllables are dropped.
  GPElement normalize(std::span<const Syllable> word) const;
  GPElement multiply(const GPElement& g, const GPElement& h) const;
  GPElement inverse(const GPElement& g) const;

  // Lexicographically least ordering of an already reduced syllable sequence.
  std::vector<Syllable> canonical_order(std::vector<Syllable> reduced) const;

  void check_same(const GPElement& g) const;

 private:
  void absorb(std::vector<Syllable>& out, Syllable s) const;

  SimpleGraph graph_;
  std::vector<VertexGroup> groups_;
};

std::size_t syllable_length(const GPElement& g);
VertexSet support(const GPElement& g);
bool is_in_GJ(const GPElement& g, VertexSet J);

// g = left * right with lengths adding up.
struct Division {
  GPElement left;
  GPElement right;
};

// left is the maximal left divisor of g lying in G_L.
Division max_left_divisor_in(const GPElement& g, VertexSet L);
// right is the maximal right divisor of g lying in G_L.
Division max_right_divisor_in(const GPElement& g, VertexSet L);

struct KBlock {
  GPElement x;  // in H_k
  Elt y = 0;    // in G_k

  friend bool operator==(const KBlock&, const KBlock&) = default;
};

// g = x_1 y_1 ... x_m y_m relative to vertex k.
struct KNormalForm {
  int k = 0;
  std::vector<KBlock> blocks;

  friend bool operator==(const KNormalForm&, const KNormalForm&) = default;
};

KNormalForm k_normal_form(const GPElement& g, int k);
GPElement reassemble(const GraphProduct& ctx, const KNormalForm& nf);
// Checks the block invariants; returns an empty string when they hold.
std::string k_normal_form_violation(const GraphProduct& ctx, const KNormalForm& nf);

struct RewriteResult {
  KNormalForm product;
  int h_reducing = 0;
  int g_reducing = 0;
  // Mergers of mutually inverse blocks. They are not counted as reducing: the
  // composite permutation is unchanged by inverse compatibility.
  int h_cancellations = 0;
  int g_cancellations = 0;
};

// Concatenates two k-normal forms following the three-case merger split and
// counts reducing mergers of H_k-blocks and of G_k-blocks, i.e. mergers with
// a non-trivial product shorter than the sum of its parts (always, for G_k).
RewriteResult rewrite_concat_counting(const GraphProduct& ctx, const KNormalForm& g1, const KNormalForm& g2);

std::string to_string(const GPElement& g);

}  // namespace soficlab

template <>
struct std::hash<soficlab::GPElement> {
  std::size_t operator()(const soficlab::GPElement& g) const { return soficlab::hash_value(g); }
};
