#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "soficlab/core_groups.hpp"

namespace soficlab {

struct PLetter {
  std::size_t gen = 0;
  bool inverse = false;

  friend bool operator==(const PLetter&, const PLetter&) = default;
  friend auto operator<=>(const PLetter&, const PLetter&) = default;
};

using PWord = std::vector<PLetter>;

PWord inverse(const PWord& w);
PWord concat(const PWord& a, const PWord& b);

// lhs = rhs; an ordinary relator r is stored as r = 1 (empty rhs).
struct Relation {
  PWord lhs, rhs;

  friend bool operator==(const Relation&, const Relation&) = default;
};

class Presentation {
 public:
  Presentation() = default;
  Presentation(std::vector<std::string> generators, std::vector<Relation> relations);

  const std::vector<std::string>& generators() const { return generators_; }
  const std::vector<Relation>& relations() const { return relations_; }
  // lhs rhs^-1 for every relation
  std::vector<PWord> relators() const;
  std::optional<std::size_t> generator_index(const std::string& name) const;

  friend bool operator==(const Presentation&, const Presentation&) = default;

 private:
  std::vector<std::string> generators_;
  std::vector<Relation> relations_;
};

// Runs of a letter print as powers: a², t⁻¹.
std::string format_word(const Presentation& p, const PWord& w);
std::string format_word(const std::vector<std::string>& names, const PWord& w);
// ⟨a,b ∣ a²=b³⟩
std::string to_string(const Presentation& p);

// Non-identity elements g1..g(m-1) as generators, one relation per product.
Presentation presentation_of(const FiniteGroup& g, const std::string& prefix);

// A group given by a presentation, a finite multiplication table, or both
// (the presentation then being the one derived from the table).
struct GroupSpec {
  Presentation presentation;
  std::optional<FiniteGroup> finite;

  static GroupSpec presented(Presentation p);
  static GroupSpec from_finite(FiniteGroup g, const std::string& prefix);
};

struct GoGEdge {
  int v1 = 0, v2 = 0;  // equal for a loop
  GroupSpec group;
  // Images of the edge group's generators, as words in the generators of
  // G_{v1} and G_{v2}.
  std::vector<PWord> theta1, theta2;
  bool amenable = false;  // recorded, never verified
  bool trusted = false;   // set when the maps could not be checked
};

class GraphOfGroups {
 public:
  // Validates vertices, the no-multi-edge rule and the edge maps: exhaustively
  // for finite edge and vertex groups (homomorphism and injectivity), by
  // evaluating edge relators into finite vertex groups, and otherwise marks
  // the edge as trusted.
  GraphOfGroups(std::vector<GroupSpec> vertex_groups, std::vector<GoGEdge> edges);

  std::size_t vertex_count() const { return vertices_.size(); }
  const std::vector<GroupSpec>& vertex_groups() const { return vertices_; }
  const std::vector<GoGEdge>& edges() const { return edges_; }

 private:
  std::vector<GroupSpec> vertices_;
  std::vector<GoGEdge> edges_;
};

// Indices into edges(): breadth-first from vertex 0, neighbours in increasing
// order, loops ignored.
std::vector<std::size_t> spanning_tree(const GraphOfGroups& g);

void check_spanning_tree(const GraphOfGroups& g, const std::vector<std::size_t>& tree);

// Generators: every vertex group's generators (renamed name_v on clashes),
// then one stable letter per edge outside the tree, "t" when there is only
// one and "t<edge index>" otherwise.
Presentation fundamental_presentation(const GraphOfGroups& g, const std::vector<std::size_t>& tree);

struct Identification {
  std::size_t edge = 0;
  int v1 = 0, v2 = 0;
  std::vector<std::pair<PWord, PWord>> identified;  // theta1(x) = theta2(x)
};

struct StableLetter {
  std::size_t edge = 0;
  std::string name;
  int v1 = 0, v2 = 0;
  std::vector<PWord> into_v1, into_v2;  // t^-1 theta1(x) t = theta2(x)
};

struct HnnDecomposition {
  std::vector<int> base_vertices;
  std::vector<Identification> base;
  std::vector<StableLetter> stable_letters;
};

HnnDecomposition hnn_amalgam_decomposition(const GraphOfGroups& g, const std::vector<std::size_t>& tree);
std::string to_string(const GraphOfGroups& g, const HnnDecomposition& d);

struct ChainEdge {
  std::int64_t i = 0;  // joins i and i+1
  std::string left_image;   // L_i in H_i
  std::string right_image;  // K_{i+1} in H_{i+1}
};

struct IntegerLineChain {
  std::vector<std::string> vertices;
  std::vector<ChainEdge> edges;
  std::string amalgam;  // H_0 *_{L_0=K_1} H_1
};

// The window lo..hi of the line of conjugates H_i = t^-i H t^i, with L the
// conjugate t^-1 K t.
IntegerLineChain integer_line_chain(const std::string& H, const std::string& K, std::int64_t lo, std::int64_t hi,
                                    const std::string& L = "L");

}  // namespace soficlab
