#include "soficlab/bass_serre.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <boost/pending/disjoint_sets.hpp>

#include "soficlab/errors.hpp"

namespace soficlab {

PWord inverse(const PWord& w) {
  PWord out(w.rbegin(), w.rend());
  for (PLetter& x : out) x.inverse = !x.inverse;
  return out;
}

PWord concat(const PWord& a, const PWord& b) {
  PWord out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Presentation::Presentation(std::vector<std::string> generators, std::vector<Relation> relations)
    : generators_(std::move(generators)), relations_(std::move(relations)) {
  std::set<std::string> seen;
  for (const auto& g : generators_) {
    if (g.empty()) fail(ErrorCode::InvalidArgument, "empty generator name");
    if (!seen.insert(g).second) fail(ErrorCode::InvalidArgument, "generator " + g + " declared twice");
  }
  for (const Relation& r : relations_)
    for (const PWord* w : {&r.lhs, &r.rhs})
      for (const PLetter& x : *w)
        if (x.gen >= generators_.size())
          fail(ErrorCode::InvalidArgument, "relation uses undeclared generator " + std::to_string(x.gen));
}

std::vector<PWord> Presentation::relators() const {
  std::vector<PWord> out;
  for (const Relation& r : relations_) out.push_back(concat(r.lhs, inverse(r.rhs)));
  return out;
}

std::optional<std::size_t> Presentation::generator_index(const std::string& name) const {
  auto it = std::find(generators_.begin(), generators_.end(), name);
  if (it == generators_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - generators_.begin());
}

namespace {

std::string superscript(std::size_t n, bool negative) {
  static const char* digits[] = {"⁰", "¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹"};
  std::string s;
  for (char c : std::to_string(n)) s += digits[c - '0'];
  return negative ? "⁻" + s : s;
}

}  // namespace

std::string format_word(const std::vector<std::string>& names, const PWord& w) {
  if (w.empty()) return "1";
  std::string out;
  for (std::size_t i = 0; i < w.size();) {
    std::size_t j = i;
    while (j < w.size() && w[j] == w[i]) ++j;
    const std::size_t run = j - i;
    out += names.at(w[i].gen);
    if (run > 1 || w[i].inverse) out += superscript(run, w[i].inverse);
    i = j;
  }
  return out;
}

std::string format_word(const Presentation& p, const PWord& w) { return format_word(p.generators(), w); }

std::string to_string(const Presentation& p) {
  std::string out = "⟨";
  for (std::size_t i = 0; i < p.generators().size(); ++i) out += (i ? "," : "") + p.generators()[i];
  if (!p.relations().empty()) {
    out += " ∣ ";
    for (std::size_t i = 0; i < p.relations().size(); ++i) {
      const Relation& r = p.relations()[i];
      out += (i ? "," : "") + format_word(p, r.lhs) + "=" + format_word(p, r.rhs);
    }
  }
  return out + "⟩";
}

Presentation presentation_of(const FiniteGroup& g, const std::string& prefix) {
  const std::size_t m = g.order();
  std::vector<std::string> gens;
  for (std::size_t i = 1; i < m; ++i) gens.push_back(prefix + std::to_string(i));
  auto word_of = [](std::uint32_t e) { return e == 0 ? PWord{} : PWord{PLetter{e - 1u, false}}; };
  std::vector<Relation> rels;
  for (std::uint32_t a = 1; a < m; ++a)
    for (std::uint32_t b = 1; b < m; ++b) rels.push_back(Relation{concat(word_of(a), word_of(b)), word_of(g.mult(a, b))});
  return Presentation(std::move(gens), std::move(rels));
}

GroupSpec GroupSpec::presented(Presentation p) { return GroupSpec{std::move(p), std::nullopt}; }

GroupSpec GroupSpec::from_finite(FiniteGroup g, const std::string& prefix) {
  Presentation p = presentation_of(g, prefix);
  return GroupSpec{std::move(p), std::move(g)};
}

namespace {

std::uint32_t evaluate(const FiniteGroup& g, const PWord& w) {
  std::uint32_t x = 0;
  for (const PLetter& l : w) {
    const auto e = static_cast<std::uint32_t>(l.gen + 1);
    x = g.mult(x, l.inverse ? g.inv(e) : e);
  }
  return x;
}

void check_map(std::size_t e, int side, const GroupSpec& edge, const GroupSpec& vertex, const std::vector<PWord>& theta,
               bool& trusted) {
  const std::string where = "edge " + std::to_string(e) + " map " + std::to_string(side);
  if (theta.size() != edge.presentation.generators().size())
    fail(ErrorCode::InvalidArgument, where + ": expected " + std::to_string(edge.presentation.generators().size()) +
                                         " generator images, got " + std::to_string(theta.size()));
  for (const PWord& w : theta)
    for (const PLetter& x : w)
      if (x.gen >= vertex.presentation.generators().size())
        fail(ErrorCode::InvalidArgument, where + ": image uses an undeclared generator");
  if (!vertex.finite) {
    trusted = true;
    return;
  }
  const FiniteGroup& V = *vertex.finite;
  if (edge.finite) {
    const FiniteGroup& E = *edge.finite;
    std::vector<std::uint32_t> phi(E.order(), 0);
    for (std::size_t i = 1; i < E.order(); ++i) phi[i] = evaluate(V, theta[i - 1]);
    for (std::uint32_t a = 0; a < E.order(); ++a)
      for (std::uint32_t b = 0; b < E.order(); ++b)
        if (phi[E.mult(a, b)] != V.mult(phi[a], phi[b]))
          fail(ErrorCode::InputAxiomViolation, where + " is not a homomorphism");
    std::set<std::uint32_t> image(phi.begin(), phi.end());
    if (image.size() != phi.size()) fail(ErrorCode::InputAxiomViolation, where + " is not injective");
    return;
  }
  // Relators of the edge group must die in the finite vertex group;
  // injectivity stays unchecked.
  for (const PWord& r : edge.presentation.relators()) {
    PWord image;
    for (const PLetter& x : r) image = concat(image, x.inverse ? inverse(theta[x.gen]) : theta[x.gen]);
    if (evaluate(V, image) != 0) fail(ErrorCode::InputAxiomViolation, where + " does not respect a relator");
  }
  trusted = true;
}

}  // namespace

GraphOfGroups::GraphOfGroups(std::vector<GroupSpec> vertex_groups, std::vector<GoGEdge> edges)
    : vertices_(std::move(vertex_groups)), edges_(std::move(edges)) {
  if (vertices_.empty()) fail(ErrorCode::BadGraph, "a graph of groups needs a vertex");
  std::set<std::pair<int, int>> seen;
  const int n = static_cast<int>(vertices_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    GoGEdge& edge = edges_[e];
    if (edge.v1 < 0 || edge.v2 < 0 || edge.v1 >= n || edge.v2 >= n)
      fail(ErrorCode::BadGraph, "edge " + std::to_string(e) + " has a vertex out of range");
    if (!seen.insert(std::minmax(edge.v1, edge.v2)).second)
      fail(ErrorCode::BadGraph, "edge " + std::to_string(e) + " repeats {" + std::to_string(edge.v1) + "," +
                                    std::to_string(edge.v2) + "}; multiple edges are not allowed");
    edge.trusted = false;
    check_map(e, 1, edge.group, vertices_[edge.v1], edge.theta1, edge.trusted);
    check_map(e, 2, edge.group, vertices_[edge.v2], edge.theta2, edge.trusted);
  }
}

std::vector<std::size_t> spanning_tree(const GraphOfGroups& g) {
  const std::size_t n = g.vertex_count();
  std::vector<std::vector<std::pair<int, std::size_t>>> adj(n);
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const GoGEdge& edge = g.edges()[e];
    if (edge.v1 == edge.v2) continue;
    adj[edge.v1].push_back({edge.v2, e});
    adj[edge.v2].push_back({edge.v1, e});
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  std::vector<bool> seen(n, false);
  std::vector<int> queue{0};
  seen[0] = true;
  std::vector<std::size_t> tree;
  for (std::size_t i = 0; i < queue.size(); ++i)
    for (auto [w, e] : adj[queue[i]])
      if (!seen[w]) {
        seen[w] = true;
        tree.push_back(e);
        queue.push_back(w);
      }
  if (queue.size() != n)
    fail(ErrorCode::Disconnected, "only " + std::to_string(queue.size()) + " of " + std::to_string(n) +
                                      " vertices are reachable from vertex 0");
  return tree;
}

void check_spanning_tree(const GraphOfGroups& g, const std::vector<std::size_t>& tree) {
  const std::size_t n = g.vertex_count();
  if (tree.size() + 1 != n)
    fail(ErrorCode::BadTree, "a spanning tree of " + std::to_string(n) + " vertices has " + std::to_string(n - 1) +
                                 " edges, not " + std::to_string(tree.size()));
  std::vector<std::size_t> rank(n), parent(n);
  boost::disjoint_sets<std::size_t*, std::size_t*> sets(rank.data(), parent.data());
  for (std::size_t v = 0; v < n; ++v) sets.make_set(v);
  for (std::size_t e : tree) {
    if (e >= g.edges().size()) fail(ErrorCode::BadTree, "edge index " + std::to_string(e) + " out of range");
    const GoGEdge& edge = g.edges()[e];
    if (edge.v1 == edge.v2) fail(ErrorCode::BadTree, "edge " + std::to_string(e) + " is a loop");
    const std::size_t a = sets.find_set(edge.v1), b = sets.find_set(edge.v2);
    if (a == b) fail(ErrorCode::BadTree, "edge " + std::to_string(e) + " closes a cycle");
    sets.link(a, b);
  }
}

namespace {

struct Layout {
  std::vector<std::string> names;
  std::vector<std::size_t> offset;  // first generator of each vertex group
  std::map<std::size_t, std::size_t> stable;  // edge -> generator
};

Layout layout(const GraphOfGroups& g, const std::vector<std::size_t>& tree) {
  Layout L;
  std::map<std::string, int> uses;
  for (const GroupSpec& G : g.vertex_groups())
    for (const auto& name : G.presentation.generators()) ++uses[name];
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    L.offset.push_back(L.names.size());
    for (const auto& name : g.vertex_groups()[v].presentation.generators())
      L.names.push_back(uses[name] > 1 ? name + "_" + std::to_string(v) : name);
  }
  const std::set<std::size_t> in_tree(tree.begin(), tree.end());
  std::vector<std::size_t> outside;
  for (std::size_t e = 0; e < g.edges().size(); ++e)
    if (!in_tree.count(e)) outside.push_back(e);
  std::set<std::string> taken(L.names.begin(), L.names.end());
  for (std::size_t e : outside) {
    std::string name = outside.size() == 1 ? "t" : "t" + std::to_string(e);
    while (taken.count(name)) name += "'";
    taken.insert(name);
    L.stable[e] = L.names.size();
    L.names.push_back(name);
  }
  return L;
}

PWord shifted(const PWord& w, std::size_t by) {
  PWord out = w;
  for (PLetter& x : out) x.gen += by;
  return out;
}

}  // namespace

Presentation fundamental_presentation(const GraphOfGroups& g, const std::vector<std::size_t>& tree) {
  check_spanning_tree(g, tree);
  const Layout L = layout(g, tree);
  std::vector<Relation> rels;
  for (std::size_t v = 0; v < g.vertex_count(); ++v)
    for (const Relation& r : g.vertex_groups()[v].presentation.relations())
      rels.push_back(Relation{shifted(r.lhs, L.offset[v]), shifted(r.rhs, L.offset[v])});
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const GoGEdge& edge = g.edges()[e];
    auto t = L.stable.find(e);
    for (std::size_t x = 0; x < edge.theta1.size(); ++x) {
      PWord lhs = shifted(edge.theta1[x], L.offset[edge.v1]);
      if (t != L.stable.end()) {
        lhs.insert(lhs.begin(), PLetter{t->second, true});
        lhs.push_back(PLetter{t->second, false});
      }
      rels.push_back(Relation{std::move(lhs), shifted(edge.theta2[x], L.offset[edge.v2])});
    }
  }
  return Presentation(L.names, std::move(rels));
}

HnnDecomposition hnn_amalgam_decomposition(const GraphOfGroups& g, const std::vector<std::size_t>& tree) {
  check_spanning_tree(g, tree);
  const Layout L = layout(g, tree);
  HnnDecomposition d;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) d.base_vertices.push_back(static_cast<int>(v));
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const GoGEdge& edge = g.edges()[e];
    auto t = L.stable.find(e);
    if (t == L.stable.end()) {
      Identification id{e, edge.v1, edge.v2, {}};
      for (std::size_t x = 0; x < edge.theta1.size(); ++x)
        id.identified.push_back({shifted(edge.theta1[x], L.offset[edge.v1]), shifted(edge.theta2[x], L.offset[edge.v2])});
      d.base.push_back(std::move(id));
    } else {
      StableLetter s{e, L.names[t->second], edge.v1, edge.v2, {}, {}};
      for (std::size_t x = 0; x < edge.theta1.size(); ++x) {
        s.into_v1.push_back(shifted(edge.theta1[x], L.offset[edge.v1]));
        s.into_v2.push_back(shifted(edge.theta2[x], L.offset[edge.v2]));
      }
      d.stable_letters.push_back(std::move(s));
    }
  }
  return d;
}

std::string to_string(const GraphOfGroups& g, const HnnDecomposition& d) {
  const std::vector<std::size_t> tree = [&] {
    std::vector<std::size_t> t;
    for (const auto& id : d.base) t.push_back(id.edge);
    return t;
  }();
  const Layout L = layout(g, tree);
  std::string out = "base: amalgam of G_0";
  for (std::size_t v = 1; v < d.base_vertices.size(); ++v) out += ", G_" + std::to_string(v);
  for (const auto& id : d.base) {
    out += "\n  edge " + std::to_string(id.edge) + " {" + std::to_string(id.v1) + "," + std::to_string(id.v2) + "}:";
    for (const auto& [a, b] : id.identified) out += " " + format_word(L.names, a) + "=" + format_word(L.names, b);
  }
  out += "\nstable letters: " + std::to_string(d.stable_letters.size());
  for (const auto& s : d.stable_letters) {
    out += "\n  " + s.name + " (edge " + std::to_string(s.edge) + " {" + std::to_string(s.v1) + "," +
           std::to_string(s.v2) + "}):";
    for (std::size_t x = 0; x < s.into_v1.size(); ++x)
      out += " " + s.name + "⁻¹" + format_word(L.names, s.into_v1[x]) + s.name + "=" +
             format_word(L.names, s.into_v2[x]);
  }
  return out;
}

namespace {

std::string subscript(const std::string& symbol, std::int64_t i) {
  const std::string idx = std::to_string(i);
  return symbol + "_" + (idx.size() == 1 ? idx : "{" + idx + "}");
}

}  // namespace

IntegerLineChain integer_line_chain(const std::string& H, const std::string& K, std::int64_t lo, std::int64_t hi,
                                    const std::string& L) {
  if (lo > hi) fail(ErrorCode::BadRange, "empty range [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
  if (hi - lo > 10'000) fail(ErrorCode::BadRange, "window wider than 10000");
  IntegerLineChain c;
  for (std::int64_t i = lo; i <= hi; ++i) c.vertices.push_back(subscript(H, i));
  for (std::int64_t i = lo; i < hi; ++i) c.edges.push_back(ChainEdge{i, subscript(L, i), subscript(K, i + 1)});
  c.amalgam = c.vertices.front();
  for (std::size_t e = 0; e < c.edges.size(); ++e)
    c.amalgam += " *_{" + c.edges[e].left_image + "=" + c.edges[e].right_image + "} " + c.vertices[e + 1];
  return c;
}

}  // namespace soficlab
