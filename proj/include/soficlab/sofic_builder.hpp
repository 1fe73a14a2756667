#pragma once

#include <atomic>
#include <compare>
#include <deque>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "soficlab/ball_group.hpp"
#include "soficlab/graph_products.hpp"
#include "soficlab/quasi_actions.hpp"
#include "soficlab/rational.hpp"
#include "soficlab/rng.hpp"

namespace soficlab {

// f(1) = 1, f(n) = n(n f(n-1) + 1).
std::uint64_t f_bound(std::size_t n);

enum class LabelMode {
  // Inputs must be genuine actions; every class label is additionally
  // cross-checked against the coset of the provenance element.
  Exact,
  // Any inputs; class labels come from the canonical-representative decision
  // procedure alone.
  General,
};

struct VertexInput {
  QuasiActionTable<Elt> psi;
  std::vector<Elt> F;  // F_i, closed under inversion; the identity may be omitted
};

struct BuildConfig {
  std::size_t N = 2;
  std::optional<std::size_t> radius_override;
  LabelMode mode = LabelMode::Exact;
  // Above this |F| is not materialised; edgeless graphs then fall back to a
  // streaming scan and sampled pairs, other graphs fail with BudgetExceeded.
  std::size_t max_F = 2'000'000;
  std::uint64_t point_cap = 1'000'000;  // effective points per coordinate
  std::uint64_t samples = 100'000;      // used above point_cap
  std::uint64_t seed = 0;
};

// Provenance of a point of an inner space: it equals basepoint `base` moved by
// the element h. Tracked in exact mode only.
struct Provenance {
  std::int64_t base = -1;
  GPElement h;
};

struct Coord;

// A point of a space: a leaf index, or one (d, a, w) triple per coordinate.
struct VirtualPoint {
  Point leaf = 0;
  std::vector<Coord> coords;
  Provenance prov;  // not part of the point's identity
};

struct Coord {
  VirtualPoint d;
  Point a = 0;
  ReducedWord w;
};

bool operator==(const VirtualPoint& p, const VirtualPoint& q);
bool operator==(const Coord& p, const Coord& q);
std::strong_ordering operator<=>(const VirtualPoint& p, const VirtualPoint& q);
std::strong_ordering operator<=>(const Coord& p, const Coord& q);

using ClassLabel = std::uint32_t;

struct ExactLabel {
  ClassLabel seed;  // class of the basepoint
  GPElement coset;  // canonical representative of h G_L
  friend bool operator==(const ExactLabel&, const ExactLabel&) = default;
};

class SpaceNode;

struct Program;

struct Step {
  const Program* x = nullptr;  // action on D_k, null when x is trivial
  GPElement x_elt;
  Elt y = 0;
};

// How one element acts on the points of one space.
struct Program {
  Elt leaf_key = 0;
  std::vector<std::vector<Step>> coords;
};

struct LabelRegistry {
  std::mutex mutex;
  std::map<VirtualPoint, ClassLabel> ids;  // canonical representative -> label
  std::deque<VirtualPoint> reps;
  std::map<std::int64_t, ClassLabel> seeds;  // basepoint -> label of its class
  std::map<std::pair<std::int64_t, GPElement>, ClassLabel> by_coset;
  std::map<std::pair<std::int64_t, ClassLabel>, GPElement> by_label;
};

struct CoordinateSpace {
  int k = 0;
  VertexSet link;              // L_k inside the node's vertex set
  const SpaceNode* inner = nullptr;  // D_k
  std::size_t a_size = 0;      // |A_k|
  const QuasiActionTable<Elt>* psi = nullptr;
  std::unique_ptr<LabelRegistry> labels;
};

class SpaceNode {
 public:
  VertexSet vertices;
  int leaf_vertex = -1;
  std::size_t leaf_size = 0;
  const QuasiActionTable<Elt>* leaf_psi = nullptr;
  std::vector<CoordinateSpace> coords;
  std::uint64_t basepoints = 0;

  bool is_leaf() const { return leaf_vertex >= 0; }
  std::size_t coord_index(int k) const;

  mutable std::mutex program_mutex;
  mutable std::unordered_map<GPElement, std::unique_ptr<Program>> programs;
};

struct EvalStats {
  std::uint64_t u_cancellations = 0;
  std::uint64_t label_route_mismatches = 0;
};

class Construction {
 public:
  // Validates the inputs, enumerates F and lays out the recursive carrier.
  static std::unique_ptr<Construction> build(const SimpleGraph& graph, const std::vector<VertexGroup>& groups,
                                             std::vector<VertexInput> inputs, const BuildConfig& config);

  Construction(const Construction&) = delete;
  Construction& operator=(const Construction&) = delete;

  const GraphProduct& context() const { return *ctx_; }
  std::size_t n() const { return ctx_->vertex_count(); }
  std::size_t N() const { return config_.N; }
  std::size_t radius() const { return radius_; }
  LabelMode mode() const { return config_.mode; }
  const BuildConfig& config() const { return config_; }
  const std::vector<VertexInput>& inputs() const { return inputs_; }
  // Empty unless F_explicit().
  const std::vector<GPElement>& F() const { return F_; }
  bool F_explicit() const { return F_explicit_; }
  std::uint64_t F_size() const { return F_size_; }
  // Uniform draw from F, materialised or not.
  GPElement sample_F(Rng& rng) const;
  // Every input's centraliser acts transitively on its carrier, so all
  // effective points of a coordinate are conjugate under automorphisms that
  // commute with phi.
  bool symmetric() const { return symmetric_; }
  std::optional<std::size_t> index_in_F(const GPElement& g) const;
  const std::vector<Rational>& input_defects() const { return input_defects_; }
  const Rational& eps_in() const { return eps_in_; }
  Rational bound() const;
  Rational per_coordinate_bound() const;
  const SpaceNode& space() const { return *top_; }

  // Effective points of the top-level coordinate with index ci: basepoint of
  // D_k, any a, empty word.
  std::uint64_t effective_count(std::size_t ci) const;
  Coord effective_point(std::size_t ci, std::uint64_t index) const;
  VirtualPoint basepoint(const SpaceNode& node, std::uint64_t index) const;

  const Program& program(const SpaceNode& node, const GPElement& g) const;
  // phi(g) on a point of C, coordinatewise.
  VirtualPoint apply(const GPElement& g, const VirtualPoint& p) const;
  // phi_k(g) on the top-level coordinate with index ci.
  Coord apply_phi_k(std::size_t ci, const GPElement& g, const Coord& c) const;
  void run(const SpaceNode& node, const Program& prog, VirtualPoint& p) const;
  void run_coord(const SpaceNode& node, std::size_t ci, const std::vector<Step>& steps, Coord& c) const;

  ClassLabel pi_label(const SpaceNode& node, std::size_t ci, const VirtualPoint& d) const;
  ExactLabel pi_label_exact(const SpaceNode& node, std::size_t ci, const VirtualPoint& d) const;
  const VirtualPoint& label_representative(const SpaceNode& node, std::size_t ci, ClassLabel label) const;

  // Canonical representative of p's class under the join of ~_j, j in J.
  VirtualPoint canonical(const SpaceNode& node, const VirtualPoint& p, VertexSet J) const;
  Coord canonical_coord(const SpaceNode& node, std::size_t ci, const Coord& c, VertexSet J) const;
  // Whether the J1-class of p1 and the J2-class of p2 intersect.
  bool meets(const SpaceNode& node, const VirtualPoint& p1, VertexSet J1, const VirtualPoint& p2,
             VertexSet J2) const;

  // p ~_J q on C.
  bool related(const VirtualPoint& p, const VirtualPoint& q, VertexSet J) const;
  bool related_coord(std::size_t ci, const Coord& p, const Coord& q, VertexSet J) const;
  // The single relation ~^k_j between points of the top-level coordinate k.
  bool equivalence_check(int k, int j, const Coord& p, const Coord& q) const;

  // Appends one syllable to the element acting on p. Matches the program of
  // g s applied to p whenever g s is reduced and the graph has no edges.
  void step_syllable(const SpaceNode& node, VirtualPoint& p, Syllable s) const;
  void step_syllable_coord(const SpaceNode& node, std::size_t ci, Coord& c, Syllable s) const;

  bool same_point(const VirtualPoint& p, const VirtualPoint& q) const;
  bool same_coord(const Coord& p, const Coord& q) const;

  Letter letter(const CoordinateSpace& cs, ClassLabel label, Point a, bool inverse) const;

  // Counters accumulated by every evaluation since the last reset.
  EvalStats stats() const;
  void reset_stats() const;

 private:
  Construction() = default;

  const SpaceNode* make_node(VertexSet vertices);
  Program compile(const SpaceNode& node, const GPElement& g) const;
  bool meets_coord(const SpaceNode& node, std::size_t ci, const Coord& c1, VertexSet J1, const Coord& c2,
                   VertexSet J2) const;
  bool path_word(const CoordinateSpace& cs, const ReducedWord& z, Point from, Point to,
                 const std::function<bool(ClassLabel)>& first, const std::function<bool(ClassLabel)>& second) const;
  ClassLabel intern(const CoordinateSpace& cs, VirtualPoint rep) const;

  std::unique_ptr<GraphProduct> ctx_;
  std::vector<VertexInput> inputs_;
  BuildConfig config_;
  std::size_t radius_ = 0;
  void y_step(const SpaceNode& node, std::size_t ci, Coord& c, Elt y, std::size_t& floor) const;

  std::vector<GPElement> F_;
  std::unordered_map<GPElement, std::size_t> F_index_;
  bool F_explicit_ = true;
  std::uint64_t F_size_ = 0;
  // words_by_length_[l][v]: reduced words of l syllables ending at vertex v (edgeless graphs)
  std::vector<std::vector<std::uint64_t>> words_by_length_;
  bool symmetric_ = false;
  std::vector<Rational> input_defects_;
  Rational eps_in_ = 0;
  std::map<std::uint32_t, std::unique_ptr<SpaceNode>> nodes_;
  const SpaceNode* top_ = nullptr;
  mutable std::atomic<std::uint64_t> u_cancellations_{0};
  mutable std::atomic<std::uint64_t> label_mismatches_{0};
};

struct CoordinateBreakdown {
  int k = 0;
  std::uint64_t effective_points = 0;
  std::uint64_t evaluated_points = 0;
  bool sampled = false;
  bool symmetry_reduced = false;
  Rational max_defect = 0;
};

struct Condition1Entry {
  GPElement x, y;
  bool adjacent = false;
  bool product_ok = true;   // phi(xy) = phi(x) phi(y)
  bool commute_ok = true;   // phi(x) phi(y) = phi(y) phi(x), adjacent pairs only
};

struct Condition2Entry {
  GPElement g;
  VertexSet J;
  bool in_GJ = false;
  bool holds = true;
};

struct MeasureOptions {
  bool condition1 = true;
  bool condition2 = true;
  bool keep_pairs = true;
  // Evaluate one effective point per coordinate when the construction is
  // symmetric(); exact, not an estimate.
  bool use_symmetry = false;
  unsigned threads = 1;
  // Above pair_cap pairs of F x F, condition (d) is estimated on
  // sampled_pairs uniform pairs; sampled_elements is used when F is not
  // materialised.
  std::uint64_t pair_cap = 1'000'000;
  std::uint64_t sampled_pairs = 10'000;
  std::uint64_t sampled_elements = 2'000;
};

struct MeasureReport {
  bool cond_a = true;
  bool cond_b = true;
  std::vector<GPElement> cond_c;  // witnesses, at most 64 listed
  std::uint64_t cond_c_count = 0;  // non-identity elements of F with a fixed point
  Rational max_defect = 0;
  std::optional<std::pair<GPElement, GPElement>> worst_pair;
  std::vector<Rational> pair_defects;  // |F| x |F| row-major, explicit F only
  std::uint64_t elements_scanned = 0;   // condition (c)
  std::uint64_t pairs_evaluated = 0;    // condition (d)
  bool cond_c_estimated = false;
  bool cond_d_estimated = false;
  std::vector<CoordinateBreakdown> coordinates;
  std::vector<Condition1Entry> condition1;
  std::vector<Condition2Entry> condition2;
  bool estimated = false;
  std::uint64_t u_cancellations = 0;
  std::uint64_t label_route_mismatches = 0;
  bool within_bound = true;
  bool within_per_coordinate_bound = true;

  bool condition1_holds() const;
  bool condition2_holds() const;
  bool special(const Rational& eps) const { return cond_a && cond_b && cond_c_count == 0 && max_defect <= eps; }
};

MeasureReport measure_conditions(const Construction& out, const MeasureOptions& options = {});

// Condition (2) for one element and one vertex set, over all effective points.
bool check_condition2(const Construction& out, const GPElement& g, VertexSet J);

}  // namespace soficlab
