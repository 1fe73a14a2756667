#pragma once

// Independent brute-force oracles shared by the unit tests and the acceptance
// suite. Nothing here calls the library's normal-form code; elements are
// treated as plain syllable sequences.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "soficlab/errors.hpp"
#include "soficlab/graph_products.hpp"
#include "soficlab/rng.hpp"

namespace oracle {

using soficlab::Elt;
using soficlab::Syllable;
using Word = std::vector<Syllable>;

template <class F>
std::optional<soficlab::ErrorCode> error_of(F&& f) {
  try {
    f();
  } catch (const soficlab::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Cayley tables built from first principles.
inline std::vector<std::vector<std::int64_t>> cyclic_table(int m) {
  std::vector<std::vector<std::int64_t>> t(m, std::vector<std::int64_t>(m));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) t[a][b] = (a + b) % m;
  return t;
}

// Dihedral group of order 2m: (r, f) ~ x -> (-1)^f x + r on Z/m, index f*m + r.
inline std::vector<std::vector<std::int64_t>> dihedral_table(int m) {
  const int n = 2 * m;
  std::vector<std::vector<std::int64_t>> t(n, std::vector<std::int64_t>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int ra = a % m, fa = a / m, rb = b % m, fb = b / m;
      // apply a then b: x -> s_b(s_a(x)), s(x) = (-1)^f x + r
      const int f = fa ^ fb;
      const int r = ((fb ? -ra : ra) + rb + 2 * m) % m;
      t[a][b] = f * m + r;
    }
  return t;
}

inline std::vector<std::vector<std::int64_t>> direct_table(const std::vector<std::vector<std::int64_t>>& x,
                                                           const std::vector<std::vector<std::int64_t>>& y) {
  const std::size_t p = x.size(), q = y.size();
  std::vector<std::vector<std::int64_t>> t(p * q, std::vector<std::int64_t>(p * q));
  for (std::size_t a = 0; a < p * q; ++a)
    for (std::size_t b = 0; b < p * q; ++b)
      t[a][b] = x[a / q][b / q] * static_cast<std::int64_t>(q) + y[a % q][b % q];
  return t;
}

// Quaternions {±1, ±i, ±j, ±k}: index 2*u + s, u in {1,i,j,k}, s the sign.
inline std::vector<std::vector<std::int64_t>> quaternion_table() {
  // unit products: u*v = sign * w
  const int w[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
  const int s[4][4] = {{0, 0, 0, 0}, {0, 1, 0, 1}, {0, 1, 1, 0}, {0, 0, 1, 1}};
  std::vector<std::vector<std::int64_t>> t(8, std::vector<std::int64_t>(8));
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) t[a][b] = 2 * w[a / 2][b / 2] + ((a % 2) ^ (b % 2) ^ s[a / 2][b / 2]);
  return t;
}

inline bool associative(const std::vector<std::vector<std::int64_t>>& t) {
  const std::size_t n = t.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        if (t[t[a][b]][c] != t[a][t[b][c]]) return false;
  return true;
}

// Graph-product words over vertex groups given by multiplication callbacks.
struct Setting {
  int n = 0;
  std::vector<std::vector<bool>> adj;
  std::vector<int> order;  // finite orders; elements 0..order-1, identity 0, cyclic addition

  Elt mult(int v, Elt a, Elt b) const { return (a + b) % order[v]; }
  bool commute(int u, int v) const { return u != v && adj[u][v]; }
};

inline Setting cyclic_setting(int n, const std::vector<std::pair<int, int>>& edges, int order) {
  Setting s;
  s.n = n;
  s.adj.assign(n, std::vector<bool>(n, false));
  for (auto [u, v] : edges) s.adj[u][v] = s.adj[v][u] = true;
  s.order.assign(n, order);
  return s;
}

// Every word reachable by swapping adjacent commuting syllables or merging
// adjacent syllables at the same vertex (dropping identities).
inline std::set<Word> rewrite_closure(const Setting& s, const Word& start) {
  std::set<Word> seen{start};
  std::deque<Word> queue{start};
  while (!queue.empty()) {
    Word w = queue.front();
    queue.pop_front();
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      Word next;
      if (s.commute(w[i].vertex, w[i + 1].vertex)) {
        next = w;
        std::swap(next[i], next[i + 1]);
      } else if (w[i].vertex == w[i + 1].vertex) {
        next.assign(w.begin(), w.begin() + i);
        const Elt e = s.mult(w[i].vertex, w[i].elt, w[i + 1].elt);
        if (e != 0) next.push_back(Syllable{w[i].vertex, e});
        next.insert(next.end(), w.begin() + i + 2, w.end());
      } else {
        continue;
      }
      if (seen.insert(next).second) queue.push_back(next);
    }
  }
  return seen;
}

// Shortest word in the closure, lexicographically least among those.
inline Word shortest_shuffle(const Setting& s, Word w) {
  std::erase_if(w, [](const Syllable& x) { return x.elt == 0; });
  const auto all = rewrite_closure(s, w);
  std::size_t best = SIZE_MAX;
  for (const auto& x : all) best = std::min(best, x.size());
  for (const auto& x : all)
    if (x.size() == best) return x;  // std::set iterates in lexicographic order
  return {};
}

// All orderings of a reduced word reachable by commuting swaps alone.
inline std::set<Word> shuffles(const Setting& s, const Word& w) {
  std::set<Word> seen{w};
  std::deque<Word> queue{w};
  while (!queue.empty()) {
    Word x = queue.front();
    queue.pop_front();
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
      if (s.commute(x[i].vertex, x[i + 1].vertex)) {
        Word y = x;
        std::swap(y[i], y[i + 1]);
        if (seen.insert(y).second) queue.push_back(y);
      }
  }
  return seen;
}

// All words of length <= len with non-identity syllables.
inline std::vector<Word> all_words(const Setting& s, std::size_t len) {
  std::vector<Word> out{{}};
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].size() == len) continue;
    for (int v = 0; v < s.n; ++v)
      for (Elt e = 1; e < s.order[v]; ++e) {
        Word w = out[i];
        w.push_back(Syllable{v, e});
        out.push_back(std::move(w));
      }
  }
  return out;
}

inline Word random_word(const Setting& s, soficlab::Rng& rng, std::size_t len) {
  Word w;
  for (std::size_t i = 0; i < len; ++i) {
    const int v = static_cast<int>(rng.below(s.n));
    w.push_back(Syllable{v, 1 + static_cast<Elt>(rng.below(s.order[v] - 1))});
  }
  return w;
}

inline soficlab::GraphProduct context_of(const Setting& s) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < s.n; ++u)
    for (int v = u + 1; v < s.n; ++v)
      if (s.adj[u][v]) edges.push_back({u, v});
  std::vector<soficlab::VertexGroup> groups;
  for (int v = 0; v < s.n; ++v)
    groups.push_back(soficlab::VertexGroup::finite(soficlab::cyclic_group(s.order[v])));
  return soficlab::GraphProduct(soficlab::SimpleGraph(s.n, edges), groups);
}

}  // namespace oracle
