#include "soficlab/graph_products.hpp"

#include <algorithm>
#include <set>

#include <boost/container_hash/hash.hpp>

#include "soficlab/errors.hpp"

namespace soficlab {

VertexSet VertexSet::of(std::initializer_list<int> vs) {
  VertexSet s;
  for (int v : vs) s = s.with(v);
  return s;
}

std::vector<int> VertexSet::members() const {
  std::vector<int> out;
  for (std::uint32_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
  return out;
}

std::string to_string(VertexSet s) {
  std::string out = "{";
  bool first = true;
  for (int v : s.members()) {
    if (!first) out += ",";
    out += std::to_string(v);
    first = false;
  }
  return out + "}";
}

SimpleGraph::SimpleGraph(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
  if (n > 32) fail(ErrorCode::BadGraph, "at most 32 vertices are supported");
  adjacency_.assign(n, VertexSet());
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n)
      fail(ErrorCode::BadGraph, "edge [" + std::to_string(u) + "," + std::to_string(v) + "] leaves the vertex range");
    if (u == v)
      fail(ErrorCode::BadGraph, "edge [" + std::to_string(u) + "," + std::to_string(v) +
                                    "] is a loop; simple graphs have no loops");
    if (adjacency_[u].contains(v))
      fail(ErrorCode::BadGraph, "edge [" + std::to_string(u) + "," + std::to_string(v) + "] is duplicated");
    adjacency_[u] = adjacency_[u].with(v);
    adjacency_[v] = adjacency_[v].with(u);
  }
}

std::vector<std::pair<int, int>> SimpleGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < static_cast<int>(size()); ++u)
    for (int v : adjacency_[u].members())
      if (u < v) out.emplace_back(u, v);
  return out;
}

VertexGroup VertexGroup::finite(FiniteGroup g) {
  VertexGroup vg;
  vg.finite_ = std::move(g);
  return vg;
}

VertexGroup VertexGroup::integers() { return VertexGroup(); }

Elt VertexGroup::multiply(Elt a, Elt b) const {
  if (finite_) return finite_->mult(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
  return a + b;
}

Elt VertexGroup::inverse(Elt a) const {
  if (finite_) return finite_->inv(static_cast<std::uint32_t>(a));
  return -a;
}

VertexSet GPElement::support() const {
  VertexSet s;
  for (const auto& syl : syllables_) s = s.with(syl.vertex);
  return s;
}

std::size_t hash_value(const GPElement& g) {
  std::size_t seed = g.length();
  for (const auto& s : g.syllables()) {
    boost::hash_combine(seed, s.vertex);
    boost::hash_combine(seed, s.elt);
  }
  return seed;
}

GraphProduct::GraphProduct(SimpleGraph graph, std::vector<VertexGroup> groups)
    : graph_(std::move(graph)), groups_(std::move(groups)) {
  if (graph_.size() != groups_.size())
    fail(ErrorCode::SizeMismatch, "graph has " + std::to_string(graph_.size()) + " vertices but " +
                                      std::to_string(groups_.size()) + " groups were given");
}

GPElement GraphProduct::syllable(int vertex, Elt elt) const {
  Syllable s{vertex, elt};
  return normalize(std::span<const Syllable>(&s, 1));
}

void GraphProduct::absorb(std::vector<Syllable>& out, Syllable s) const {
  for (std::size_t i = out.size(); i-- > 0;) {
    if (out[i].vertex == s.vertex) {
      Elt prod = groups_[s.vertex].multiply(out[i].elt, s.elt);
      if (prod == 0)
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
      else
        out[i].elt = prod;
      return;
    }
    if (!graph_.adjacent(out[i].vertex, s.vertex)) break;
  }
  out.push_back(s);
}

std::vector<Syllable> GraphProduct::canonical_order(std::vector<Syllable> reduced) const {
  const std::size_t l = reduced.size();
  std::vector<Syllable> out;
  out.reserve(l);
  std::vector<bool> used(l, false);
  for (std::size_t step = 0; step < l; ++step) {
    std::size_t best = l;
    for (std::size_t p = 0; p < l; ++p) {
      if (used[p]) continue;
      bool available = true;
      for (std::size_t q = 0; q < p && available; ++q)
        available = used[q] || commute(reduced[q].vertex, reduced[p].vertex);
      if (available && (best == l || reduced[p].vertex < reduced[best].vertex)) best = p;
    }
    used[best] = true;
    out.push_back(reduced[best]);
  }
  return out;
}

GPElement GraphProduct::normalize(std::span<const Syllable> word) const {
  std::vector<Syllable> out;
  out.reserve(word.size());
  for (const auto& s : word) {
    if (s.vertex < 0 || static_cast<std::size_t>(s.vertex) >= groups_.size())
      fail(ErrorCode::BadVertex, "vertex " + std::to_string(s.vertex) + " is not in the graph");
    if (!groups_[s.vertex].contains(s.elt))
      fail(ErrorCode::BadElement, "element " + std::to_string(s.elt) + " is not in the group at vertex " +
                                      std::to_string(s.vertex));
    if (s.elt == 0) continue;
    absorb(out, s);
  }
  return GPElement(this, canonical_order(std::move(out)));
}

void GraphProduct::check_same(const GPElement& g) const {
  if (g.context() != nullptr && g.context() != this)
    fail(ErrorCode::ContextMismatch, "element belongs to a different graph product");
}

GPElement GraphProduct::multiply(const GPElement& g, const GPElement& h) const {
  check_same(g);
  check_same(h);
  if (g.is_identity()) return GPElement(this, h.syllables());
  if (h.is_identity()) return GPElement(this, g.syllables());
  std::vector<Syllable> out = g.syllables();
  out.reserve(g.length() + h.length());
  for (const auto& s : h.syllables()) absorb(out, s);
  return GPElement(this, canonical_order(std::move(out)));
}

GPElement GraphProduct::inverse(const GPElement& g) const {
  check_same(g);
  std::vector<Syllable> out(g.syllables().rbegin(), g.syllables().rend());
  for (auto& s : out) s.elt = groups_[s.vertex].inverse(s.elt);
  return GPElement(this, canonical_order(std::move(out)));
}

std::size_t syllable_length(const GPElement& g) { return g.length(); }

VertexSet support(const GPElement& g) { return g.support(); }

bool is_in_GJ(const GPElement& g, VertexSet J) { return g.support().subset_of(J); }

namespace {

const GraphProduct& context_of(const GPElement& g) {
  if (g.context() == nullptr) fail(ErrorCode::ContextMismatch, "element has no context");
  return *g.context();
}

Division split(const GraphProduct& ctx, const std::vector<Syllable>& s, const std::vector<bool>& take,
               bool take_is_left) {
  std::vector<Syllable> taken, rest;
  for (std::size_t i = 0; i < s.size(); ++i) (take[i] ? taken : rest).push_back(s[i]);
  GPElement a = ctx.normalize(taken);
  GPElement b = ctx.normalize(rest);
  if (take_is_left) return {std::move(a), std::move(b)};
  return {std::move(b), std::move(a)};
}

}  // namespace

Division max_left_divisor_in(const GPElement& g, VertexSet L) {
  if (g.is_identity()) return {g, g};
  const GraphProduct& ctx = context_of(g);
  const auto& s = g.syllables();
  std::vector<bool> take(s.size(), false);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!L.contains(s[i].vertex)) continue;
    bool free = true;
    for (std::size_t j = 0; j < i && free; ++j) free = take[j] || ctx.commute(s[j].vertex, s[i].vertex);
    take[i] = free;
  }
  return split(ctx, s, take, true);
}

Division max_right_divisor_in(const GPElement& g, VertexSet L) {
  if (g.is_identity()) return {g, g};
  const GraphProduct& ctx = context_of(g);
  const auto& s = g.syllables();
  std::vector<bool> take(s.size(), false);
  for (std::size_t i = s.size(); i-- > 0;) {
    if (!L.contains(s[i].vertex)) continue;
    bool free = true;
    for (std::size_t j = i + 1; j < s.size() && free; ++j) free = take[j] || ctx.commute(s[j].vertex, s[i].vertex);
    take[i] = free;
  }
  return split(ctx, s, take, false);
}

KNormalForm k_normal_form(const GPElement& g, int k) {
  const GraphProduct& ctx = g.context() ? *g.context() : throw Error(ErrorCode::ContextMismatch, "no context");
  if (k < 0 || static_cast<std::size_t>(k) >= ctx.vertex_count())
    fail(ErrorCode::BadVertex, "k = " + std::to_string(k) + " is not a vertex");
  const auto& s = g.syllables();
  // level of a k-syllable is its y index; a non-k syllable sits in the block
  // right after the last y it cannot be shuffled across
  std::vector<int> level(s.size(), 0);
  std::vector<Elt> ys;
  for (std::size_t p = 0; p < s.size(); ++p) {
    if (s[p].vertex == k) {
      ys.push_back(s[p].elt);
      level[p] = static_cast<int>(ys.size());
      continue;
    }
    int lv = 0;
    for (std::size_t q = 0; q < p; ++q)
      if (!ctx.commute(s[q].vertex, s[p].vertex)) lv = std::max(lv, level[q]);
    level[p] = lv;
  }
  std::vector<std::vector<Syllable>> xs(ys.size() + 1);
  for (std::size_t p = 0; p < s.size(); ++p)
    if (s[p].vertex != k) xs[level[p]].push_back(s[p]);

  KNormalForm nf;
  nf.k = k;
  for (std::size_t i = 0; i < ys.size(); ++i) nf.blocks.push_back({ctx.normalize(xs[i]), ys[i]});
  if (ys.empty() || !xs.back().empty()) nf.blocks.push_back({ctx.normalize(xs.back()), 0});
  return nf;
}

GPElement reassemble(const GraphProduct& ctx, const KNormalForm& nf) {
  std::vector<Syllable> word;
  for (const auto& b : nf.blocks) {
    ctx.check_same(b.x);
    word.insert(word.end(), b.x.syllables().begin(), b.x.syllables().end());
    if (b.y != 0) word.push_back({nf.k, b.y});
  }
  return ctx.normalize(word);
}

std::string k_normal_form_violation(const GraphProduct& ctx, const KNormalForm& nf) {
  if (nf.blocks.empty()) return "no blocks";
  VertexSet L = ctx.graph().link(nf.k);
  for (std::size_t i = 0; i < nf.blocks.size(); ++i) {
    const auto& b = nf.blocks[i];
    std::string where = "block " + std::to_string(i + 1) + ": ";
    if (b.x.support().contains(nf.k)) return where + "x contains a k-syllable";
    if (i + 1 < nf.blocks.size() && b.y == 0) return where + "y is trivial before the last block";
    if (i > 0 && b.x.is_identity()) return where + "x is trivial after the first block";
    if (i > 0 && !max_left_divisor_in(b.x, L).left.is_identity()) return where + "x has a left divisor in G_L";
  }
  return {};
}

namespace {

using Blocks = std::vector<KBlock>;

class Rewriter {
 public:
  Rewriter(const GraphProduct& ctx, int k) : ctx_(ctx), k_(k), L_(ctx.graph().link(k)) {}

  Blocks combine(const Blocks& P, const Blocks& Q) {
    if (is_identity(P)) return Q;
    if (is_identity(Q)) return P;
    if (P.back().y == 0) return case2(P, Q);
    if (!is_in_GJ(Q.front().x, L_)) return case1(P, Q);
    return case3(P, Q);
  }

  int h_reducing = 0;
  int g_reducing = 0;
  int h_cancellations = 0;
  int g_cancellations = 0;

 private:
  static bool is_identity(const Blocks& b) { return b.size() == 1 && b[0].x.is_identity() && b[0].y == 0; }

  static Blocks prefix(const Blocks& P) { return Blocks(P.begin(), P.end() - 1); }

  GPElement h_merge(const GPElement& a, const GPElement& b) {
    GPElement r = ctx_.multiply(a, b);
    if (a.is_identity() || b.is_identity()) return r;
    if (r.is_identity())
      ++h_cancellations;
    else if (r.length() < a.length() + b.length())
      ++h_reducing;
    return r;
  }

  // y_m != 1 and x'_1 not in G_L.
  Blocks case1(const Blocks& P, const Blocks& Q) {
    Division d = max_left_divisor_in(Q.front().x, L_);
    const GPElement& z1 = d.left;
    const GPElement& z2 = d.right;
    if (z1.is_identity()) {
      Blocks out = P;
      out.insert(out.end(), Q.begin(), Q.end());
      return out;
    }
    Blocks tail;
    tail.push_back({z2, Q.front().y});
    tail.insert(tail.end(), Q.begin() + 1, Q.end());
    const std::size_t m = P.size();
    if (m == 1) {
      Blocks out;
      out.push_back({h_merge(P[0].x, z1), P[0].y});
      out.insert(out.end(), tail.begin(), tail.end());
      return out;
    }
    // z1 commutes with y_m; split it by what also commutes with x_m
    const GPElement& xm = P[m - 1].x;
    VertexSet Lpp;
    for (int v : L_.members()) {
      bool all = true;
      for (const auto& s : xm.syllables()) all = all && ctx_.commute(v, s.vertex);
      if (all) Lpp = Lpp.with(v);
    }
    Division e = max_left_divisor_in(z1, Lpp);
    GPElement first;
    if (e.right.is_identity())
      first = ctx_.multiply(z1, xm);
    else
      first = ctx_.multiply(e.left, h_merge(xm, e.right));
    Blocks nextQ;
    nextQ.push_back({first, P[m - 1].y});
    nextQ.insert(nextQ.end(), tail.begin(), tail.end());
    return case1(prefix(P), nextQ);
  }

  // y_m = 1.
  Blocks case2(const Blocks& P, const Blocks& Q) {
    const std::size_t m = P.size();
    if (m == 1) {
      Blocks out;
      out.push_back({h_merge(P[0].x, Q[0].x), Q[0].y});
      out.insert(out.end(), Q.begin() + 1, Q.end());
      return out;
    }
    const GPElement& xm = P[m - 1].x;
    GPElement prod = ctx_.multiply(xm, Q[0].x);
    if (!is_in_GJ(prod, L_)) {
      prod = h_merge(xm, Q[0].x);
      Blocks nextQ;
      nextQ.push_back({prod, Q[0].y});
      nextQ.insert(nextQ.end(), Q.begin() + 1, Q.end());
      return case1(prefix(P), nextQ);
    }
    // x_m x'_1 lands in G_L: commuting and cancellation only
    Blocks nextQ;
    nextQ.push_back({prod, Q[0].y});
    nextQ.insert(nextQ.end(), Q.begin() + 1, Q.end());
    return case3(prefix(P), nextQ);
  }

  // y_m != 1 and x'_1 in G_L.
  Blocks case3(const Blocks& P, const Blocks& Q) {
    const std::size_t m = P.size();
    const VertexGroup& Gk = ctx_.group(k_);
    Elt y = Gk.multiply(P[m - 1].y, Q[0].y);
    if (y == 0)
      ++g_cancellations;
    else if (Q[0].y != 0)
      ++g_reducing;
    if (y != 0) {
      Blocks nextQ;
      nextQ.push_back({h_merge(P[m - 1].x, Q[0].x), y});
      nextQ.insert(nextQ.end(), Q.begin() + 1, Q.end());
      if (m == 1) return nextQ;
      return case1(prefix(P), nextQ);
    }
    if (Q.size() == 1) {
      Blocks nextQ{{h_merge(P[m - 1].x, Q[0].x), 0}};
      if (m == 1) return nextQ;
      return case1(prefix(P), nextQ);
    }
    Blocks Pp = P;
    Pp.back().y = 0;
    Blocks nextQ;
    nextQ.push_back({h_merge(Q[0].x, Q[1].x), Q[1].y});
    nextQ.insert(nextQ.end(), Q.begin() + 2, Q.end());
    return case2(Pp, nextQ);
  }

  const GraphProduct& ctx_;
  int k_;
  VertexSet L_;
};

}  // namespace

RewriteResult rewrite_concat_counting(const GraphProduct& ctx, const KNormalForm& g1, const KNormalForm& g2) {
  if (g1.k != g2.k) fail(ErrorCode::KMismatch, "normal forms relative to different vertices");
  if (g1.blocks.empty() || g2.blocks.empty()) fail(ErrorCode::InvalidArgument, "empty normal form");
  Rewriter rw(ctx, g1.k);
  RewriteResult r;
  r.product.k = g1.k;
  r.product.blocks = rw.combine(g1.blocks, g2.blocks);
  r.h_reducing = rw.h_reducing;
  r.g_reducing = rw.g_reducing;
  r.h_cancellations = rw.h_cancellations;
  r.g_cancellations = rw.g_cancellations;
  return r;
}

std::string to_string(const GPElement& g) {
  if (g.is_identity()) return "1";
  std::string out;
  for (const auto& s : g.syllables()) {
    if (!out.empty()) out += ' ';
    out += std::to_string(s.vertex) + ":" + std::to_string(s.elt);
  }
  return out;
}

}  // namespace soficlab
