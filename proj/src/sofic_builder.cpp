#include "soficlab/sofic_builder.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "soficlab/errors.hpp"
#include "soficlab/rng.hpp"

namespace soficlab {

std::uint64_t f_bound(std::size_t n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "f is defined for n >= 1");
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) {
    std::uint64_t inner = 0;
    if (__builtin_mul_overflow(static_cast<std::uint64_t>(i), f, &inner) || inner == UINT64_MAX ||
        __builtin_mul_overflow(static_cast<std::uint64_t>(i), inner + 1, &f))
      fail(ErrorCode::BudgetExceeded, "f(" + std::to_string(n) + ") does not fit in 64 bits");
  }
  return f;
}

// ---- point comparisons ----

std::strong_ordering operator<=>(const Coord& p, const Coord& q) {
  if (auto c = p.d <=> q.d; c != 0) return c;
  if (auto c = p.a <=> q.a; c != 0) return c;
  return p.w <=> q.w;
}

std::strong_ordering operator<=>(const VirtualPoint& p, const VirtualPoint& q) {
  if (auto c = p.leaf <=> q.leaf; c != 0) return c;
  if (auto c = p.coords.size() <=> q.coords.size(); c != 0) return c;
  for (std::size_t i = 0; i < p.coords.size(); ++i)
    if (auto c = p.coords[i] <=> q.coords[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

bool operator==(const Coord& p, const Coord& q) { return p.a == q.a && p.w == q.w && p.d == q.d; }

bool operator==(const VirtualPoint& p, const VirtualPoint& q) { return p.leaf == q.leaf && p.coords == q.coords; }

std::size_t SpaceNode::coord_index(int k) const {
  for (std::size_t i = 0; i < coords.size(); ++i)
    if (coords[i].k == k) return i;
  fail(ErrorCode::BadVertex, "vertex " + std::to_string(k) + " is not a coordinate of this space");
}

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r) || r > (std::uint64_t{1} << 62)) return UINT64_MAX;
  return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) return UINT64_MAX;
  return r;
}

std::string describe_violation(int i, const ConditionReport<Elt>& r) {
  std::ostringstream os;
  os << "input " << i << " is not a special quasi-action:";
  if (!r.cond_a) os << " psi(1) is not the identity;";
  if (!r.cond_b) os << " some psi(f^-1) is not psi(f)^-1;";
  if (!r.cond_c.empty()) os << " psi(" << r.cond_c.front() << ") has a fixed point;";
  return os.str();
}

}  // namespace

// ---- construction ----

std::unique_ptr<Construction> Construction::build(const SimpleGraph& graph, const std::vector<VertexGroup>& groups,
                                                  std::vector<VertexInput> inputs, const BuildConfig& config) {
  const std::size_t n = graph.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "the graph has no vertices");
  if (groups.size() != n || inputs.size() != n)
    fail(ErrorCode::SizeMismatch, "graph has " + std::to_string(n) + " vertices but " +
                                      std::to_string(groups.size()) + " groups and " +
                                      std::to_string(inputs.size()) + " inputs were given");
  std::unique_ptr<Construction> out(new Construction());
  out->ctx_ = std::make_unique<GraphProduct>(graph, groups);
  out->config_ = config;
  out->radius_ = config.radius_override.value_or(4 * config.N + 4);
  const GraphProduct& ctx = *out->ctx_;

  for (std::size_t i = 0; i < n; ++i) {
    VertexInput& in = inputs[i];
    const VertexGroup& G = ctx.group(static_cast<int>(i));
    std::set<Elt> Fi(in.F.begin(), in.F.end());
    Fi.insert(0);
    for (Elt f : Fi) {
      if (!G.contains(f)) fail(ErrorCode::BadElement, "F_" + std::to_string(i) + " contains " + std::to_string(f));
      if (!Fi.count(G.inverse(f)))
        fail(ErrorCode::InputAxiomViolation,
             "F_" + std::to_string(i) + " is not closed under inversion (" + std::to_string(f) + ")");
    }
    in.F.assign(Fi.begin(), Fi.end());
    auto report = verify_special(in.psi, std::span<const Elt>(in.F), Rational(0), VertexGroupOps{&G});
    if (!report.cond_a || !report.cond_b || !report.cond_c.empty())
      fail(ErrorCode::InputAxiomViolation, describe_violation(static_cast<int>(i), report));
    if (in.psi.carrier_size() == 0) fail(ErrorCode::InputAxiomViolation, "input " + std::to_string(i) + " is empty");
    out->input_defects_.push_back(report.cond_d_max_defect);
    out->eps_in_ = rational_max(out->eps_in_, report.cond_d_max_defect);
  }
  out->inputs_ = std::move(inputs);
  if (config.mode == LabelMode::Exact && out->eps_in_ != 0)
    fail(ErrorCode::InputAxiomViolation,
         "exact mode needs genuine actions but the inputs have defect " + to_string(out->eps_in_));

  out->symmetric_ = std::all_of(out->inputs_.begin(), out->inputs_.end(),
                                [](const VertexInput& in) { return has_transitive_centralizer(in.psi); });

  // F: reduced products of at most N syllables drawn from the F_i.
  const bool edgeless = graph.edges().empty();
  if (edgeless) {
    // Count first; words of an edgeless graph are exactly the sequences
    // without repeated adjacent vertices.
    std::vector<std::uint64_t> choices(n);
    for (std::size_t i = 0; i < n; ++i) choices[i] = out->inputs_[i].F.size() - 1;
    auto& W = out->words_by_length_;
    W.assign(config.N + 1, std::vector<std::uint64_t>(n, 0));
    std::uint64_t total = 1;
    for (std::size_t len = 1; len <= config.N; ++len) {
      std::uint64_t all_prev = 0;
      for (std::size_t v = 0; v < n; ++v) all_prev = checked_add(all_prev, W[len - 1][v]);
      for (std::size_t v = 0; v < n; ++v) {
        const std::uint64_t prev = len == 1 ? 1 : all_prev - W[len - 1][v];
        W[len][v] = checked_mul(choices[v], prev);
        total = checked_add(total, W[len][v]);
      }
    }
    if (total == UINT64_MAX) fail(ErrorCode::BudgetExceeded, "|F| does not fit in 64 bits");
    out->F_size_ = total;
    if (total > config.max_F) out->F_explicit_ = false;
  }
  if (out->F_explicit_) {
    std::vector<GPElement> syllables;
    for (std::size_t i = 0; i < n; ++i)
      for (Elt f : out->inputs_[i].F)
        if (f != 0) syllables.push_back(ctx.syllable(static_cast<int>(i), f));
    out->F_.push_back(ctx.identity());
    out->F_index_.emplace(ctx.identity(), 0);
    std::vector<GPElement> level{ctx.identity()};
    for (std::size_t len = 1; len <= config.N && !level.empty(); ++len) {
      std::vector<GPElement> next;
      for (const GPElement& g : level)
        for (const GPElement& s : syllables) {
          GPElement h = ctx.multiply(g, s);
          if (h.length() != len || out->F_index_.count(h)) continue;
          out->F_index_.emplace(h, 0);
          next.push_back(std::move(h));
          if (out->F_index_.size() > config.max_F)
            fail(ErrorCode::BudgetExceeded,
                 "|F| exceeds " + std::to_string(config.max_F) + " at syllable length " + std::to_string(len));
        }
      std::sort(next.begin(), next.end());
      for (GPElement& h : next) {
        out->F_index_[h] = out->F_.size();
        out->F_.push_back(h);
      }
      level = std::move(next);
    }
    out->F_size_ = out->F_.size();
  }

  out->top_ = out->make_node(ctx.vertices());
  return out;
}

const SpaceNode* Construction::make_node(VertexSet vertices) {
  auto it = nodes_.find(vertices.bits());
  if (it != nodes_.end()) return it->second.get();
  auto node = std::make_unique<SpaceNode>();
  node->vertices = vertices;
  const auto members = vertices.members();
  if (members.size() == 1) {
    const int v = members.front();
    node->leaf_vertex = v;
    node->leaf_psi = &inputs_[v].psi;
    node->leaf_size = node->leaf_psi->carrier_size();
    node->basepoints = node->leaf_size;
  } else {
    std::uint64_t count = 1;
    for (int k : members) {
      CoordinateSpace cs;
      cs.k = k;
      cs.link = ctx_->graph().link(k) & vertices;
      cs.inner = make_node(vertices.without(k));
      cs.psi = &inputs_[k].psi;
      cs.a_size = cs.psi->carrier_size();
      cs.labels = std::make_unique<LabelRegistry>();
      count = checked_mul(count, checked_mul(cs.inner->basepoints, cs.a_size));
      node->coords.push_back(std::move(cs));
    }
    node->basepoints = count;
  }
  const SpaceNode* raw = node.get();
  nodes_.emplace(vertices.bits(), std::move(node));
  return raw;
}

std::optional<std::size_t> Construction::index_in_F(const GPElement& g) const {
  auto it = F_index_.find(g);
  if (it == F_index_.end()) return std::nullopt;
  return it->second;
}

Rational Construction::bound() const { return Rational(f_bound(n())) * eps_in_; }

Rational Construction::per_coordinate_bound() const {
  if (n() == 1) return eps_in_;
  return Rational(n() * f_bound(n() - 1) + 1) * eps_in_;
}

EvalStats Construction::stats() const { return EvalStats{u_cancellations_.load(), label_mismatches_.load()}; }

void Construction::reset_stats() const {
  u_cancellations_ = 0;
  label_mismatches_ = 0;
}

// ---- effective points ----

std::uint64_t Construction::effective_count(std::size_t ci) const {
  const CoordinateSpace& cs = top_->coords.at(ci);
  std::uint64_t count = checked_mul(cs.inner->basepoints, cs.a_size);
  if (count == UINT64_MAX)
    fail(ErrorCode::BudgetExceeded, "coordinate " + std::to_string(cs.k) + " has too many effective points");
  return count;
}

VirtualPoint Construction::basepoint(const SpaceNode& node, std::uint64_t index) const {
  if (node.basepoints == UINT64_MAX) fail(ErrorCode::BudgetExceeded, "too many basepoints to index");
  if (index >= node.basepoints) fail(ErrorCode::BadRange, "basepoint index out of range");
  VirtualPoint p;
  if (config_.mode == LabelMode::Exact) p.prov = Provenance{static_cast<std::int64_t>(index), ctx_->identity()};
  if (node.is_leaf()) {
    p.leaf = static_cast<Point>(index);
    return p;
  }
  p.coords.reserve(node.coords.size());
  for (const CoordinateSpace& cs : node.coords) {
    const std::uint64_t m = cs.inner->basepoints * cs.a_size;
    const std::uint64_t r = index % m;
    index /= m;
    Coord c;
    c.d = basepoint(*cs.inner, r / cs.a_size);
    c.a = static_cast<Point>(r % cs.a_size);
    p.coords.push_back(std::move(c));
  }
  return p;
}

Coord Construction::effective_point(std::size_t ci, std::uint64_t index) const {
  const CoordinateSpace& cs = top_->coords.at(ci);
  if (index >= effective_count(ci)) fail(ErrorCode::BadRange, "effective point index out of range");
  Coord c;
  c.d = basepoint(*cs.inner, index / cs.a_size);
  c.a = static_cast<Point>(index % cs.a_size);
  return c;
}

// ---- programs and evaluation ----

const Program& Construction::program(const SpaceNode& node, const GPElement& g) const {
  {
    std::lock_guard lock(node.program_mutex);
    auto it = node.programs.find(g);
    if (it != node.programs.end()) return *it->second;
  }
  auto prog = std::make_unique<Program>(compile(node, g));
  std::lock_guard lock(node.program_mutex);
  auto [it, inserted] = node.programs.try_emplace(g, std::move(prog));
  return *it->second;
}

Program Construction::compile(const SpaceNode& node, const GPElement& g) const {
  ctx_->check_same(g);
  if (!support(g).subset_of(node.vertices))
    fail(ErrorCode::BadVertex, to_string(g) + " is not supported on " + to_string(node.vertices));
  Program prog;
  if (node.is_leaf()) {
    if (g.length() == 1) prog.leaf_key = g.syllables().front().elt;
    return prog;
  }
  prog.coords.resize(node.coords.size());
  for (std::size_t ci = 0; ci < node.coords.size(); ++ci) {
    const CoordinateSpace& cs = node.coords[ci];
    for (const KBlock& b : k_normal_form(g, cs.k).blocks) {
      Step s;
      if (!b.x.is_identity()) {
        s.x = &program(*cs.inner, b.x);
        s.x_elt = b.x;
      }
      s.y = b.y;
      prog.coords[ci].push_back(std::move(s));
    }
  }
  return prog;
}

Letter Construction::letter(const CoordinateSpace& cs, ClassLabel label, Point a, bool inverse) const {
  const std::uint64_t symbol = static_cast<std::uint64_t>(label) * cs.a_size + a;
  if (symbol >= (std::uint64_t{1} << 31)) fail(ErrorCode::BudgetExceeded, "too many class labels");
  return Letter::make(static_cast<std::uint32_t>(symbol), inverse);
}

void Construction::run(const SpaceNode& node, const Program& prog, VirtualPoint& p) const {
  if (node.is_leaf()) {
    if (prog.leaf_key != 0) p.leaf = node.leaf_psi->at(prog.leaf_key)(p.leaf);
    return;
  }
  for (std::size_t ci = 0; ci < node.coords.size(); ++ci) run_coord(node, ci, prog.coords[ci], p.coords[ci]);
}

void Construction::y_step(const SpaceNode& node, std::size_t ci, Coord& c, Elt y, std::size_t& floor) const {
  const CoordinateSpace& cs = node.coords[ci];
  // Letters at positions >= floor belong to the word u appended by this call.
  auto push = [&](Letter x) {
    const std::size_t before = c.w.size();
    if (c.w.push(x)) {
      if (before - 1 >= floor)
        ++u_cancellations_;
      else
        floor = before - 1;
    }
  };
  const ClassLabel label = pi_label(node, ci, c.d);
  const Point a2 = cs.psi->at(y)(c.a);
  push(letter(cs, label, c.a, true));
  push(letter(cs, label, a2, false));
  if (c.w.size() > radius_)
    fail(ErrorCode::RadiusExceeded,
         "word of length " + std::to_string(c.w.size()) + " exceeds radius " + std::to_string(radius_));
  c.a = a2;
}

void Construction::run_coord(const SpaceNode& node, std::size_t ci, const std::vector<Step>& steps, Coord& c) const {
  const CoordinateSpace& cs = node.coords[ci];
  std::size_t floor = c.w.size();
  for (const Step& s : steps) {
    if (s.x != nullptr) {
      run(*cs.inner, *s.x, c.d);
      if (config_.mode == LabelMode::Exact) c.d.prov.h = ctx_->multiply(c.d.prov.h, s.x_elt);
    }
    if (s.y != 0) y_step(node, ci, c, s.y, floor);
  }
}

void Construction::step_syllable(const SpaceNode& node, VirtualPoint& p, Syllable s) const {
  if (node.is_leaf()) {
    p.leaf = node.leaf_psi->at(s.elt)(p.leaf);
    return;
  }
  for (std::size_t ci = 0; ci < node.coords.size(); ++ci) step_syllable_coord(node, ci, p.coords[ci], s);
}

void Construction::step_syllable_coord(const SpaceNode& node, std::size_t ci, Coord& c, Syllable s) const {
  const CoordinateSpace& cs = node.coords[ci];
  if (s.vertex == cs.k) {
    // Every letter already in w counts as part of u here.
    std::size_t floor = 0;
    y_step(node, ci, c, s.elt, floor);
    return;
  }
  step_syllable(*cs.inner, c.d, s);
  if (config_.mode == LabelMode::Exact) c.d.prov.h = ctx_->multiply(c.d.prov.h, ctx_->syllable(s.vertex, s.elt));
}

GPElement Construction::sample_F(Rng& rng) const {
  if (F_explicit_) return F_[rng.below(F_.size())];
  // Length by weight, then vertices from the end backwards.
  const auto& W = words_by_length_;
  const std::size_t n = W.front().size();
  std::uint64_t r = rng.below(F_size_);
  if (r == 0) return ctx_->identity();
  --r;
  std::size_t len = 1;
  int v = 0;
  for (;; ++len) {
    bool found = false;
    for (std::size_t u = 0; u < n; ++u) {
      if (r < W[len][u]) {
        v = static_cast<int>(u);
        found = true;
        break;
      }
      r -= W[len][u];
    }
    if (found) break;
  }
  std::vector<Syllable> word(len);
  for (std::size_t pos = len; pos-- > 0;) {
    const auto& Fv = inputs_[v].F;  // sorted, contains 0
    std::vector<Elt> choices;
    for (Elt f : Fv)
      if (f != 0) choices.push_back(f);
    word[pos] = Syllable{v, choices[rng.below(choices.size())]};
    if (pos == 0) break;
    std::uint64_t total = 0;
    for (std::size_t u = 0; u < n; ++u)
      if (static_cast<int>(u) != v) total += W[pos][u];
    std::uint64_t pick = rng.below(total);
    for (std::size_t u = 0; u < n; ++u) {
      if (static_cast<int>(u) == v) continue;
      if (pick < W[pos][u]) {
        v = static_cast<int>(u);
        break;
      }
      pick -= W[pos][u];
    }
  }
  return ctx_->normalize(word);
}

VirtualPoint Construction::apply(const GPElement& g, const VirtualPoint& p) const {
  VirtualPoint q = p;
  run(*top_, program(*top_, g), q);
  return q;
}

Coord Construction::apply_phi_k(std::size_t ci, const GPElement& g, const Coord& c) const {
  Coord out = c;
  run_coord(*top_, ci, program(*top_, g).coords.at(ci), out);
  return out;
}

// ---- class labels ----

ClassLabel Construction::intern(const CoordinateSpace& cs, VirtualPoint rep) const {
  LabelRegistry& reg = *cs.labels;
  std::lock_guard lock(reg.mutex);
  auto [it, inserted] = reg.ids.try_emplace(std::move(rep), static_cast<ClassLabel>(reg.reps.size()));
  if (inserted) reg.reps.push_back(it->first);
  return it->second;
}

ClassLabel Construction::pi_label(const SpaceNode& node, std::size_t ci, const VirtualPoint& d) const {
  const CoordinateSpace& cs = node.coords[ci];
  const ClassLabel id = intern(cs, canonical(*cs.inner, d, cs.link));
  if (config_.mode != LabelMode::Exact) return id;

  // Second route: the class of d0 moved by h is determined by the coset h G_L.
  if (d.prov.base < 0) fail(ErrorCode::MissingProvenance, "exact mode needs the provenance of every point");
  GPElement coset = max_right_divisor_in(d.prov.h, cs.link).left;
  LabelRegistry& reg = *cs.labels;
  std::lock_guard lock(reg.mutex);
  auto [c_it, c_new] = reg.by_coset.try_emplace({d.prov.base, coset}, id);
  if (!c_new && c_it->second != id) ++label_mismatches_;
  auto [l_it, l_new] = reg.by_label.try_emplace({d.prov.base, id}, std::move(coset));
  if (!l_new && !(l_it->second == c_it->first.second)) ++label_mismatches_;
  return id;
}

ExactLabel Construction::pi_label_exact(const SpaceNode& node, std::size_t ci, const VirtualPoint& d) const {
  const CoordinateSpace& cs = node.coords.at(ci);
  if (d.prov.base < 0) fail(ErrorCode::MissingProvenance, "the point carries no provenance");
  ClassLabel seed;
  {
    std::lock_guard lock(cs.labels->mutex);
    auto it = cs.labels->seeds.find(d.prov.base);
    if (it != cs.labels->seeds.end()) seed = it->second;
    else seed = UINT32_MAX;
  }
  if (seed == UINT32_MAX) {
    seed = intern(cs, canonical(*cs.inner, basepoint(*cs.inner, static_cast<std::uint64_t>(d.prov.base)), cs.link));
    std::lock_guard lock(cs.labels->mutex);
    cs.labels->seeds.emplace(d.prov.base, seed);
  }
  return ExactLabel{seed, max_right_divisor_in(d.prov.h, cs.link).left};
}

const VirtualPoint& Construction::label_representative(const SpaceNode& node, std::size_t ci,
                                                       ClassLabel label) const {
  LabelRegistry& reg = *node.coords.at(ci).labels;
  std::lock_guard lock(reg.mutex);
  if (label >= reg.reps.size()) fail(ErrorCode::UnregisteredClass, "label " + std::to_string(label));
  return reg.reps[label];
}

// ---- the equivalence relations ----

VirtualPoint Construction::canonical(const SpaceNode& node, const VirtualPoint& p, VertexSet J) const {
  VirtualPoint out;
  if (node.is_leaf()) {
    out.leaf = J.contains(node.leaf_vertex) ? 0 : p.leaf;
    return out;
  }
  out.coords.reserve(node.coords.size());
  for (std::size_t ci = 0; ci < node.coords.size(); ++ci)
    out.coords.push_back(canonical_coord(node, ci, p.coords[ci], J));
  return out;
}

Coord Construction::canonical_coord(const SpaceNode& node, std::size_t ci, const Coord& c, VertexSet J) const {
  const CoordinateSpace& cs = node.coords[ci];
  if (!J.contains(cs.k)) return Coord{canonical(*cs.inner, c.d, J), c.a, c.w, };
  const VertexSet rest = J.without(cs.k);
  Coord out{canonical(*cs.inner, c.d, rest), c.a, c.w};

  // Labels whose L-class meets the class of d: moves along them are free.
  std::map<ClassLabel, bool> memo;
  auto free_label = [&](ClassLabel label) {
    auto it = memo.find(label);
    if (it != memo.end()) return it->second;
    const bool ok = meets(*cs.inner, label_representative(node, ci, label), cs.link, out.d, rest);
    memo.emplace(label, ok);
    return ok;
  };
  const std::size_t A = cs.a_size;
  // Strip trailing pairs (p,b)^-1 (p,e) that end at the current endpoint e.
  while (out.w.size() >= 2) {
    const Letter last = out.w.back();
    const Letter prev = out.w[out.w.size() - 2];
    if (last.inverse() || !prev.inverse()) break;
    const ClassLabel label = last.symbol() / A;
    if (prev.symbol() / A != label || last.symbol() % A != out.a || !free_label(label)) break;
    out.a = static_cast<Point>(prev.symbol() % A);
    out.w.pop();
    out.w.pop();
  }
  // A trailing (p,e) may be moved to (p,0).
  if (!out.w.empty() && !out.w.back().inverse()) {
    const ClassLabel label = out.w.back().symbol() / A;
    if (out.w.back().symbol() % A == out.a && free_label(label)) {
      out.w.set_back(letter(cs, label, 0, false));
      out.a = 0;
    }
  }
  return out;
}

bool Construction::path_word(const CoordinateSpace& cs, const ReducedWord& z, Point from, Point to,
                             const std::function<bool(ClassLabel)>& first,
                             const std::function<bool(ClassLabel)>& second) const {
  if (z.size() % 2 != 0) return false;
  const std::size_t A = cs.a_size;
  Point at = from;
  bool in_first = true;
  for (std::size_t i = 0; i < z.size(); i += 2) {
    const Letter x = z[i], y = z[i + 1];
    if (!x.inverse() || y.inverse()) return false;
    const ClassLabel label = x.symbol() / A;
    if (y.symbol() / A != label || x.symbol() % A != at) return false;
    if (in_first && !first(label)) in_first = false;
    if (!in_first && !second(label)) return false;
    at = static_cast<Point>(y.symbol() % A);
  }
  return at == to;
}

bool Construction::meets(const SpaceNode& node, const VirtualPoint& p1, VertexSet J1, const VirtualPoint& p2,
                         VertexSet J2) const {
  if (node.is_leaf())
    return J1.contains(node.leaf_vertex) || J2.contains(node.leaf_vertex) || p1.leaf == p2.leaf;
  for (std::size_t ci = 0; ci < node.coords.size(); ++ci)
    if (!meets_coord(node, ci, p1.coords[ci], J1, p2.coords[ci], J2)) return false;
  return true;
}

bool Construction::meets_coord(const SpaceNode& node, std::size_t ci, const Coord& c1, VertexSet J1,
                               const Coord& c2, VertexSet J2) const {
  const CoordinateSpace& cs = node.coords[ci];
  const bool in1 = J1.contains(cs.k), in2 = J2.contains(cs.k);
  const VertexSet r1 = J1.without(cs.k), r2 = J2.without(cs.k);
  if (!in1 && !in2) {
    if (c1.a != c2.a || !(c1.w == c2.w)) return false;
    return meets(*cs.inner, c1.d, r1, c2.d, r2);
  }
  if (!meets(*cs.inner, c1.d, r1, c2.d, r2)) return false;
  ReducedWord z = c1.w.inverse();
  z.append(c2.w);
  auto free_for = [&](const VirtualPoint& d, VertexSet r, bool active) -> std::function<bool(ClassLabel)> {
    if (!active) return [](ClassLabel) { return false; };
    return [this, &node, ci, &cs, &d, r, memo = std::map<ClassLabel, bool>()](ClassLabel label) mutable {
      auto it = memo.find(label);
      if (it != memo.end()) return it->second;
      const bool ok = meets(*cs.inner, label_representative(node, ci, label), cs.link, d, r);
      memo.emplace(label, ok);
      return ok;
    };
  };
  return path_word(cs, z, c1.a, c2.a, free_for(c1.d, r1, in1), free_for(c2.d, r2, in2));
}

bool Construction::related(const VirtualPoint& p, const VirtualPoint& q, VertexSet J) const {
  return meets(*top_, p, J, q, VertexSet());
}

bool Construction::related_coord(std::size_t ci, const Coord& p, const Coord& q, VertexSet J) const {
  return meets_coord(*top_, ci, p, J, q, VertexSet());
}

bool Construction::equivalence_check(int k, int j, const Coord& p, const Coord& q) const {
  if (!ctx_->vertices().contains(j)) fail(ErrorCode::BadVertex, "vertex " + std::to_string(j));
  return related_coord(top_->coord_index(k), p, q, VertexSet::single(j));
}

bool Construction::same_coord(const Coord& p, const Coord& q) const {
  return p.a == q.a && words_equal_bounded(p.w, q.w, radius_) && same_point(p.d, q.d);
}

bool Construction::same_point(const VirtualPoint& p, const VirtualPoint& q) const {
  if (p.leaf != q.leaf || p.coords.size() != q.coords.size()) return false;
  for (std::size_t i = 0; i < p.coords.size(); ++i)
    if (!same_coord(p.coords[i], q.coords[i])) return false;
  return true;
}

// ---- measurement ----

bool MeasureReport::condition1_holds() const {
  return std::all_of(condition1.begin(), condition1.end(),
                     [](const Condition1Entry& e) { return e.product_ok && e.commute_ok; });
}

bool MeasureReport::condition2_holds() const {
  return std::all_of(condition2.begin(), condition2.end(), [](const Condition2Entry& e) { return e.holds; });
}

namespace {

Rational fraction(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return Rational(0);
  return Rational(BigInt(num), BigInt(den));
}

// What to evaluate at every point. elems[0] is the identity.
struct Workload {
  std::vector<GPElement> elems;
  std::vector<std::size_t> inv;
  std::vector<GPElement> products;
  struct Pair {
    std::size_t a, b, product;
  };
  std::vector<Pair> pairs;
  struct C1 {
    std::size_t x, y, xy;
    bool adjacent;
  };
  std::vector<C1> c1;
  bool cond2 = true;

  std::size_t add(const GPElement& g, std::unordered_map<GPElement, std::size_t>& index) {
    auto [it, inserted] = index.try_emplace(g, elems.size());
    if (inserted) elems.push_back(g);
    return it->second;
  }
};

// Per-coordinate tallies; merged across worker threads by addition.
struct Tally {
  std::uint64_t points = 0;
  bool cond_a = true;
  bool cond_b = true;
  std::vector<std::uint64_t> fixed;          // per element
  std::vector<std::uint64_t> disagreements;  // per pair
  std::vector<char> c1_product, c1_commute;
  std::vector<std::uint64_t> related;  // per (element, J)

  Tally(const Workload& w, std::size_t subsets)
      : fixed(w.elems.size(), 0),
        disagreements(w.pairs.size(), 0),
        c1_product(w.c1.size(), 1),
        c1_commute(w.c1.size(), 1),
        related(w.cond2 ? w.elems.size() * subsets : 0, 0) {}

  void merge(const Tally& o) {
    points += o.points;
    cond_a = cond_a && o.cond_a;
    cond_b = cond_b && o.cond_b;
    for (std::size_t i = 0; i < fixed.size(); ++i) fixed[i] += o.fixed[i];
    for (std::size_t i = 0; i < disagreements.size(); ++i) disagreements[i] += o.disagreements[i];
    for (std::size_t i = 0; i < c1_product.size(); ++i) {
      c1_product[i] = c1_product[i] && o.c1_product[i];
      c1_commute[i] = c1_commute[i] && o.c1_commute[i];
    }
    for (std::size_t i = 0; i < related.size(); ++i) related[i] += o.related[i];
  }
};

struct PointPlan {
  std::uint64_t effective = 0;
  std::vector<std::uint64_t> indices;  // empty: all effective points
  bool sampled = false;
  bool reduced = false;
  std::uint64_t count() const { return indices.empty() ? effective : indices.size(); }
  std::uint64_t at(std::uint64_t i) const { return indices.empty() ? i : indices[i]; }
};

PointPlan plan_points(const Construction& out, std::size_t ci, const MeasureOptions& options) {
  PointPlan plan;
  plan.effective = out.effective_count(ci);
  if (options.use_symmetry && out.symmetric()) {
    plan.indices = {0};
    plan.reduced = true;
  } else if (plan.effective > out.config().point_cap) {
    Rng rng(derive_seed(out.config().seed, ci));
    for (std::uint64_t i = 0; i < out.config().samples; ++i) plan.indices.push_back(rng.below(plan.effective));
    plan.sampled = true;
  }
  return plan;
}

Tally evaluate_coordinate(const Construction& out, std::size_t ci, const Workload& work, const PointPlan& plan,
                          unsigned threads) {
  const SpaceNode& top = out.space();
  const std::size_t subsets = std::size_t{1} << out.n();
  const std::size_t m = work.elems.size();
  const std::uint64_t count = plan.count();
  const unsigned workers =
      static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(threads, count)));
  std::vector<Tally> partial(workers, Tally(work, subsets));
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&](unsigned wid) {
    try {
      Tally& t = partial[wid];
      std::vector<Coord> img(m), prod(work.products.size());
      std::vector<Coord> canon0(subsets);
      for (std::uint64_t i = wid; i < count; i += workers) {
        const Coord c0 = out.effective_point(ci, plan.at(i));
        ++t.points;
        for (std::size_t g = 0; g < m; ++g) img[g] = out.apply_phi_k(ci, work.elems[g], c0);
        for (std::size_t p = 0; p < work.products.size(); ++p)
          prod[p] = out.apply_phi_k(ci, work.products[p], c0);
        if (!out.same_coord(img[0], c0)) t.cond_a = false;
        for (std::size_t g = 0; g < m; ++g) {
          if (out.same_coord(img[g], c0)) ++t.fixed[g];
          if (!out.same_coord(out.apply_phi_k(ci, work.elems[work.inv[g]], img[g]), c0)) t.cond_b = false;
        }
        for (std::size_t e = 0; e < work.pairs.size(); ++e) {
          const auto& q = work.pairs[e];
          if (!out.same_coord(prod[q.product], out.apply_phi_k(ci, work.elems[q.b], img[q.a])))
            ++t.disagreements[e];
        }
        for (std::size_t e = 0; e < work.c1.size(); ++e) {
          const auto& q = work.c1[e];
          const Coord xy = out.apply_phi_k(ci, work.elems[q.y], img[q.x]);
          if (!out.same_coord(img[q.xy], xy)) t.c1_product[e] = 0;
          if (q.adjacent && !out.same_coord(xy, out.apply_phi_k(ci, work.elems[q.x], img[q.y])))
            t.c1_commute[e] = 0;
        }
        if (work.cond2) {
          for (std::size_t s = 0; s < subsets; ++s)
            canon0[s] = out.canonical_coord(top, ci, c0, VertexSet(static_cast<std::uint32_t>(s)));
          for (std::size_t g = 0; g < m; ++g)
            for (std::size_t s = 0; s < subsets; ++s)
              if (out.canonical_coord(top, ci, img[g], VertexSet(static_cast<std::uint32_t>(s))) == canon0[s])
                ++t.related[g * subsets + s];
        }
      }
    } catch (...) {
      errors[wid] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  Tally total(work, subsets);
  for (const Tally& t : partial) total.merge(t);
  return total;
}

MeasureReport measure_single_vertex(const Construction& out, const MeasureOptions& options) {
  const auto& F = out.F();
  const VertexGroup& G = out.context().group(0);
  std::vector<Elt> keys;
  for (const GPElement& g : F) keys.push_back(g.is_identity() ? 0 : g.syllables().front().elt);
  const auto& psi = out.inputs()[0].psi;
  auto r = verify_special(psi, std::span<const Elt>(keys), out.eps_in(), VertexGroupOps{&G});
  MeasureReport rep;
  rep.cond_a = r.cond_a;
  rep.cond_b = r.cond_b;
  rep.elements_scanned = F.size();
  const std::size_t m = F.size();
  rep.pairs_evaluated = m * m;
  std::vector<bool> has_fixed(m, false);
  for (std::size_t i = 1; i < m; ++i)
    if (psi.at(keys[i]).has_fixed_point()) {
      rep.cond_c.push_back(F[i]);
      has_fixed[i] = true;
      ++rep.cond_c_count;
    }
  CoordinateBreakdown cb;
  cb.k = 0;
  cb.effective_points = cb.evaluated_points = psi.carrier_size();
  for (std::size_t i = 0; i < m * m; ++i) {
    Rational d = fraction(r.pair_disagreements[i], psi.carrier_size());
    if (options.keep_pairs) rep.pair_defects.push_back(d);
    if (!rep.worst_pair || d > rep.max_defect) {
      rep.max_defect = d;
      rep.worst_pair = std::make_pair(F[i / m], F[i % m]);
    }
  }
  cb.max_defect = rep.max_defect;
  rep.coordinates.push_back(cb);
  if (options.condition2)
    for (std::size_t g = 0; g < m; ++g)
      for (std::uint32_t bits = 0; bits < 2; ++bits) {
        Condition2Entry e{F[g], VertexSet(bits), is_in_GJ(F[g], VertexSet(bits)), true};
        if (!e.in_GJ) e.holds = !has_fixed[g];
        rep.condition2.push_back(e);
      }
  rep.within_bound = rep.max_defect <= out.bound();
  rep.within_per_coordinate_bound = rep.max_defect <= out.per_coordinate_bound();
  return rep;
}

// Condition (c) over all of F without materialising it: a depth-first walk
// over reduced words, one syllable at a time. Edgeless graphs only.
void scan_fixed_points(const Construction& out, MeasureReport& rep) {
  const GraphProduct& ctx = out.context();
  const SpaceNode& top = out.space();
  const std::size_t n = out.n(), N = out.N();
  std::vector<std::vector<Elt>> choices(n);
  for (std::size_t v = 0; v < n; ++v)
    for (Elt f : out.inputs()[v].F)
      if (f != 0) choices[v].push_back(f);
  // fixed[ci] holds, per element in walk order, whether the representative
  // point of coordinate ci is fixed.
  std::vector<std::vector<bool>> fixed(n);
  std::uint64_t witnesses = 0;
  for (std::size_t ci = 0; ci < n; ++ci) {
    const bool last = ci + 1 == n;
    if (!last) fixed[ci].reserve(out.F_size());
    const Coord c0 = out.effective_point(ci, 0);
    std::vector<Coord> stack(N + 1);
    std::vector<Syllable> word;
    stack[0] = c0;
    std::uint64_t index = 0;
    auto walk = [&](auto&& self, std::size_t depth, int prev) -> void {
      for (std::size_t v = 0; v < n; ++v) {
        if (static_cast<int>(v) == prev) continue;
        for (Elt f : choices[v]) {
          const Syllable s{static_cast<std::int32_t>(v), f};
          stack[depth + 1] = stack[depth];
          out.step_syllable_coord(top, ci, stack[depth + 1], s);
          const bool fx = out.same_coord(stack[depth + 1], c0);
          word.push_back(s);
          if (!last) {
            fixed[ci].push_back(fx);
          } else {
            bool all = fx;
            for (std::size_t cj = 0; all && cj + 1 < n; ++cj) all = fixed[cj][index];
            if (all) {
              ++witnesses;
              if (rep.cond_c.size() < 64) rep.cond_c.push_back(ctx.normalize(word));
            }
          }
          ++index;
          if (depth + 1 < N) self(self, depth + 1, static_cast<int>(v));
          word.pop_back();
        }
      }
    };
    walk(walk, 0, -1);
    rep.elements_scanned = index + 1;
  }
  rep.cond_c_count = witnesses;
}

}  // namespace

MeasureReport measure_conditions(const Construction& out, const MeasureOptions& options) {
  if (out.n() == 1) {
    if (!out.F_explicit()) fail(ErrorCode::BudgetExceeded, "F is too large to enumerate");
    return measure_single_vertex(out, options);
  }
  const GraphProduct& ctx = out.context();
  const std::size_t subsets = std::size_t{1} << out.n();
  const SpaceNode& top = out.space();
  out.reset_stats();

  Workload work;
  work.cond2 = options.condition2;
  std::unordered_map<GPElement, std::size_t> index;
  std::unordered_map<GPElement, std::size_t> product_index;
  auto add_product = [&](const GPElement& p) {
    auto [it, inserted] = product_index.try_emplace(p, work.products.size());
    if (inserted) work.products.push_back(p);
    return it->second;
  };
  MeasureReport rep;
  if (out.F_explicit()) {
    for (const GPElement& g : out.F()) work.add(g, index);
    const std::size_t m = work.elems.size();
    if (static_cast<std::uint64_t>(m) * m <= options.pair_cap) {
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          work.pairs.push_back({a, b, add_product(ctx.multiply(work.elems[a], work.elems[b]))});
    } else {
      Rng rng(derive_seed(out.config().seed, 0x9a1f));
      for (std::uint64_t i = 0; i < options.sampled_pairs; ++i) {
        const std::size_t a = rng.below(m), b = rng.below(m);
        work.pairs.push_back({a, b, add_product(ctx.multiply(work.elems[a], work.elems[b]))});
      }
      rep.cond_d_estimated = true;
    }
  } else {
    work.add(ctx.identity(), index);
    Rng rng(derive_seed(out.config().seed, 0x5eed));
    for (std::uint64_t i = 0; i < options.sampled_elements; ++i) work.add(out.sample_F(rng), index);
    for (std::uint64_t i = 0; i < options.sampled_pairs; ++i) {
      const std::size_t a = work.add(out.sample_F(rng), index);
      const std::size_t b = work.add(out.sample_F(rng), index);
      work.pairs.push_back({a, b, add_product(ctx.multiply(work.elems[a], work.elems[b]))});
    }
    rep.cond_d_estimated = true;
  }
  // Single syllables, for condition (1).
  std::vector<GPElement> syllables;
  for (std::size_t v = 0; v < out.n(); ++v)
    for (Elt f : out.inputs()[v].F)
      if (f != 0) syllables.push_back(ctx.syllable(static_cast<int>(v), f));
  if (options.condition1 && out.N() >= 2)
    for (const GPElement& x : syllables)
      for (const GPElement& y : syllables) {
        const int u = x.syllables().front().vertex, v = y.syllables().front().vertex;
        if (u == v) continue;
        const std::size_t xi = work.add(x, index), yi = work.add(y, index);
        const std::size_t xy = work.add(ctx.multiply(x, y), index);
        work.c1.push_back({xi, yi, xy, ctx.commute(u, v)});
      }
  for (std::size_t g = 0; g < work.elems.size(); ++g) work.add(ctx.inverse(work.elems[g]), index);
  work.inv.resize(work.elems.size());
  for (std::size_t g = 0; g < work.elems.size(); ++g) work.inv[g] = index.at(ctx.inverse(work.elems[g]));
  // Compile every program up front so workers only read the caches.
  for (const GPElement& g : work.elems) out.program(top, g);
  for (const GPElement& p : work.products) out.program(top, p);

  std::vector<Tally> tallies;
  for (std::size_t ci = 0; ci < top.coords.size(); ++ci) {
    const PointPlan plan = plan_points(out, ci, options);
    Tally total = evaluate_coordinate(out, ci, work, plan, options.threads);
    CoordinateBreakdown cb;
    cb.k = top.coords[ci].k;
    cb.effective_points = plan.effective;
    cb.evaluated_points = total.points;
    cb.sampled = plan.sampled;
    cb.symmetry_reduced = plan.reduced;
    for (std::uint64_t d : total.disagreements) cb.max_defect = rational_max(cb.max_defect, fraction(d, total.points));
    rep.coordinates.push_back(cb);
    rep.estimated = rep.estimated || plan.sampled;
    tallies.push_back(std::move(total));
  }

  for (const Tally& t : tallies) {
    rep.cond_a = rep.cond_a && t.cond_a;
    rep.cond_b = rep.cond_b && t.cond_b;
  }
  // phi(g) fixes a point of C iff it fixes a point in every coordinate.
  if (out.F_explicit()) {
    for (std::size_t g = 1; g < work.elems.size() && g < out.F().size(); ++g)
      if (std::all_of(tallies.begin(), tallies.end(), [&](const Tally& t) { return t.fixed[g] > 0; }))
        rep.cond_c.push_back(work.elems[g]);
    rep.cond_c_count = rep.cond_c.size();
    rep.elements_scanned = out.F().size();
  } else if (options.use_symmetry && out.symmetric()) {
    scan_fixed_points(out, rep);
  } else {
    for (std::size_t g = 1; g < work.elems.size(); ++g)
      if (std::all_of(tallies.begin(), tallies.end(), [&](const Tally& t) { return t.fixed[g] > 0; }))
        rep.cond_c.push_back(work.elems[g]);
    rep.cond_c_count = rep.cond_c.size();
    rep.elements_scanned = work.elems.size();
    rep.cond_c_estimated = true;
  }
  // The points of C where the pair agrees form a product set.
  for (std::size_t e = 0; e < work.pairs.size(); ++e) {
    Rational agree = 1;
    for (const Tally& t : tallies) agree *= 1 - fraction(t.disagreements[e], t.points);
    const Rational d = 1 - agree;
    if (options.keep_pairs && !rep.cond_d_estimated) rep.pair_defects.push_back(d);
    if (!rep.worst_pair || d > rep.max_defect) {
      rep.max_defect = d;
      rep.worst_pair = std::make_pair(work.elems[work.pairs[e].a], work.elems[work.pairs[e].b]);
    }
  }
  rep.pairs_evaluated = work.pairs.size();
  for (std::size_t e = 0; e < work.c1.size(); ++e) {
    Condition1Entry entry{work.elems[work.c1[e].x], work.elems[work.c1[e].y], work.c1[e].adjacent, true, true};
    for (const Tally& t : tallies) {
      entry.product_ok = entry.product_ok && t.c1_product[e];
      entry.commute_ok = entry.commute_ok && t.c1_commute[e];
    }
    rep.condition1.push_back(entry);
  }
  if (options.condition2) {
    const std::size_t limit = out.F_explicit() ? out.F().size() : work.elems.size();
    for (std::size_t g = 0; g < limit; ++g)
      for (std::size_t s = 0; s < subsets; ++s) {
        const VertexSet J(static_cast<std::uint32_t>(s));
        Condition2Entry entry{work.elems[g], J, is_in_GJ(work.elems[g], J), true};
        auto all = [&](const Tally& t) { return t.related[g * subsets + s] == t.points; };
        auto none = [&](const Tally& t) { return t.related[g * subsets + s] == 0; };
        entry.holds = entry.in_GJ ? std::all_of(tallies.begin(), tallies.end(), all)
                                  : std::any_of(tallies.begin(), tallies.end(), none);
        rep.condition2.push_back(entry);
      }
  }
  const EvalStats st = out.stats();
  rep.u_cancellations = st.u_cancellations;
  rep.label_route_mismatches = st.label_route_mismatches;
  rep.within_bound = rep.max_defect <= out.bound();
  rep.within_per_coordinate_bound = std::all_of(rep.coordinates.begin(), rep.coordinates.end(), [&](const auto& c) {
    return c.max_defect <= out.per_coordinate_bound();
  });
  return rep;
}

bool check_condition2(const Construction& out, const GPElement& g, VertexSet J) {
  const bool in_GJ = is_in_GJ(g, J);
  if (out.n() == 1) {
    if (in_GJ) return true;
    const auto& psi = out.inputs()[0].psi;
    return !psi.at(g.syllables().front().elt).has_fixed_point();
  }
  const SpaceNode& top = out.space();
  bool some_none = false;
  for (std::size_t ci = 0; ci < top.coords.size(); ++ci) {
    const std::uint64_t E = out.effective_count(ci);
    if (E > out.config().point_cap) fail(ErrorCode::BudgetExceeded, "too many effective points to check exhaustively");
    std::uint64_t related = 0;
    for (std::uint64_t i = 0; i < E; ++i) {
      const Coord c0 = out.effective_point(ci, i);
      related += out.related_coord(ci, out.apply_phi_k(ci, g, c0), c0, J);
    }
    if (in_GJ && related != E) return false;
    if (related == 0) some_none = true;
  }
  return in_GJ || some_none;
}

}  // namespace soficlab
