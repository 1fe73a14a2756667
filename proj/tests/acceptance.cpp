// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.
// Expected values come from test-side oracles; tolerances are pinned below.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "soficlab/ball_group.hpp"
#include "soficlab/bass_serre.hpp"
#include "soficlab/errors.hpp"
#include "soficlab/graph_products.hpp"
#include "soficlab/quasi_actions.hpp"
#include "soficlab/rng.hpp"
#include "soficlab/sofic_builder.hpp"
#include "support/oracles.hpp"

using namespace soficlab;

namespace {

// Runtime targets, in seconds.
constexpr double kLimit1 = 10, kLimit2 = 5, kLimit3 = 300, kLimit4 = 120;
constexpr std::uint64_t kEffectiveSpace3 = 32768;
constexpr int kDegradedTrials = 20;
constexpr int kProductTrials = 100;
constexpr std::uint64_t kBallSamples = 100'000;
constexpr int kMergerPairs = 10'000;
constexpr int kShuffleTrials = 10'000;
constexpr int kRandomGogs = 50;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail = what;
    pass = false;
  }
};

// f(1) = 1, f(n) = n(n f(n-1) + 1), recomputed here rather than taken from the library.
std::uint64_t f_oracle(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t m = 2; m <= n; ++m) f = m * (m * f + 1);
  return f;
}

// Number of reduced words of syllable length <= N in a free product of n
// groups with the given numbers of non-identity elements.
std::uint64_t free_product_ball(const std::vector<std::uint64_t>& nontrivial, std::size_t N) {
  // ending[v]: words of the current length whose last syllable is at v
  std::vector<std::uint64_t> ending(nontrivial);
  std::uint64_t total = 1;
  for (std::size_t len = 1; len <= N; ++len) {
    std::uint64_t all = 0;
    for (auto e : ending) all += e;
    total += all;
    std::vector<std::uint64_t> next(ending.size());
    for (std::size_t v = 0; v < ending.size(); ++v) next[v] = (all - ending[v]) * nontrivial[v];
    ending = next;
  }
  return total;
}

VertexInput regular_input(const FiniteGroup& g) {
  VertexInput in{regular_table(g), {}};
  for (std::size_t i = 1; i < g.order(); ++i) in.F.push_back(static_cast<Elt>(i));
  return in;
}

struct Instance {
  SimpleGraph graph;
  std::vector<VertexGroup> groups;
  std::vector<VertexInput> inputs;
};

Instance z2_instance(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
  Instance I{SimpleGraph(n, edges), {}, {}};
  for (std::size_t v = 0; v < n; ++v) {
    I.groups.push_back(VertexGroup::finite(cyclic_group(2)));
    I.inputs.push_back(regular_input(cyclic_group(2)));
  }
  return I;
}

std::unique_ptr<Construction> build(const Instance& I, std::size_t N, LabelMode mode, std::uint64_t seed = 1,
                                    std::size_t max_F = 2'000'000) {
  BuildConfig cfg;
  cfg.N = N;
  cfg.mode = mode;
  cfg.seed = seed;
  cfg.max_F = max_F;
  return Construction::build(I.graph, I.groups, I.inputs, cfg);
}

bool all_zero(const std::vector<Rational>& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& r) { return r == 0; });
}

bool condition2_complete(const MeasureReport& rep, std::size_t F_size, std::size_t n) {
  if (rep.condition2.size() != F_size * (std::size_t{1} << n)) return false;
  std::set<std::pair<std::string, std::uint32_t>> seen;
  for (const auto& e : rep.condition2) seen.insert({to_string(e.g), e.J.bits()});
  return seen.size() == rep.condition2.size() && rep.condition2_holds();
}

// ---------------------------------------------------------------- 1

Outcome criterion1() {
  Outcome o;
  const auto t0 = Clock::now();
  const Instance I = z2_instance(2, {});
  const auto out = build(I, 6, LabelMode::Exact);
  const MeasureReport rep = measure_conditions(*out);
  const double secs = seconds_since(t0);
  const std::uint64_t expected_F = free_product_ball({1, 1}, 6);
  o.require(expected_F == 13, "oracle |F| is not 13");
  o.require(out->F_size() == expected_F, "|F| = " + std::to_string(out->F_size()));
  o.require(rep.cond_a && rep.cond_b, "conditions (a)/(b)");
  o.require(rep.pair_defects.size() == expected_F * expected_F && all_zero(rep.pair_defects) && rep.max_defect == 0,
            "defect over F x F is not exactly 0");
  o.require(rep.cond_c_count == 0 && !rep.cond_c_estimated, "a non-identity element has a fixed point");
  std::size_t fpf = 0;
  for (const auto& g : out->F())
    if (!g.is_identity()) {
      bool moved_all = true;
      for (std::uint64_t i = 0; i < out->space().basepoints && moved_all; ++i) {
        const VirtualPoint c = out->basepoint(out->space(), i);
        moved_all = !(out->apply(g, c) == c);
      }
      fpf += moved_all;
    }
  o.require(fpf == 12, std::to_string(fpf) + " fixed-point-free elements by direct scan");
  o.require(condition2_complete(rep, expected_F, 2), "condition (2)");
  o.require(secs < kLimit1, "runtime " + std::to_string(secs) + " s");
  if (o.pass)
    o.detail = "|F|=13, defect 0/1 on 169 pairs, 12 fixed-point free, condition (2) on 52 (g,J), " +
               std::to_string(secs) + " s";
  return o;
}

// ---------------------------------------------------------------- 2

Outcome criterion2() {
  Outcome o;
  const auto t0 = Clock::now();
  const Instance I = z2_instance(2, {{0, 1}});
  const auto out = build(I, 6, LabelMode::Exact);
  const MeasureReport rep = measure_conditions(*out);
  o.require(rep.special(0) && all_zero(rep.pair_defects), "not special with defect 0");
  o.require(rep.condition1_holds() && !rep.condition1.empty(), "condition (1) entries");
  for (const auto& e : rep.condition1) o.require(e.adjacent && e.commute_ok, "condition (1) commuting case");
  // pointwise on every point built from effective points
  const GraphProduct& G = out->context();
  const GPElement x = G.syllable(0, 1), y = G.syllable(1, 1);
  std::uint64_t checked = 0;
  for (std::uint64_t i = 0; i < out->space().basepoints; ++i) {
    const VirtualPoint c = out->basepoint(out->space(), i);
    o.require(out->apply(y, out->apply(x, c)) == out->apply(x, out->apply(y, c)), "phi(x)phi(y) != phi(y)phi(x)");
    ++checked;
  }
  o.require(condition2_complete(rep, out->F_size(), 2), "condition (2)");
  const double secs = seconds_since(t0);
  o.require(secs < kLimit2, "runtime " + std::to_string(secs) + " s");
  if (o.pass)
    o.detail = "commuting on all " + std::to_string(checked) + " points, defect 0/1, " + std::to_string(secs) + " s";
  return o;
}

// ---------------------------------------------------------------- 3

Outcome criterion3() {
  Outcome o;
  const auto t0 = Clock::now();
  const Instance I = z2_instance(3, {{0, 1}, {1, 2}});
  const auto out = build(I, 4, LabelMode::Exact);
  const MeasureReport rep = measure_conditions(*out);
  const double secs = seconds_since(t0);
  o.require(rep.special(0) && all_zero(rep.pair_defects) && !rep.estimated, "not special with exact defect 0");
  o.require(condition2_complete(rep, out->F_size(), 3), "condition (2) over all g and 8 subsets");
  o.require(out->space().basepoints <= kEffectiveSpace3,
            "effective space " + std::to_string(out->space().basepoints));
  o.require(rep.label_route_mismatches == 0, "coset cross-check mismatches");
  o.require(secs < kLimit3, "runtime " + std::to_string(secs) + " s");
  if (o.pass)
    o.detail = "|F|=" + std::to_string(out->F_size()) + ", " + std::to_string(rep.condition2.size()) +
               " (g,J) checks, effective space " + std::to_string(out->space().basepoints) + ", " +
               std::to_string(secs) + " s";
  return o;
}

// ---------------------------------------------------------------- 4

Outcome criterion4() {
  Outcome o;
  const auto t0 = Clock::now();
  constexpr std::size_t m = 101;
  constexpr Elt K = 10;
  Instance I{SimpleGraph(2, {}), {VertexGroup::integers(), VertexGroup::integers()}, {}};
  std::vector<Elt> F;
  for (Elt k = -K; k <= K; ++k)
    if (k != 0) F.push_back(k);
  for (int v = 0; v < 2; ++v) I.inputs.push_back(VertexInput{shift_table(m, 2 * K), F});
  // |F| is far above the materialisation budget: condition (c) streams over
  // every element, condition (d) is estimated on sampled pairs
  const auto out = build(I, 6, LabelMode::Exact, 4, 2'000'000);
  MeasureOptions opt;
  opt.use_symmetry = true;
  const MeasureReport rep = measure_conditions(*out, opt);
  const double secs = seconds_since(t0);
  const std::uint64_t expected_F = free_product_ball({2 * K, 2 * K}, 6);
  o.require(out->F_size() == expected_F, "|F| = " + std::to_string(out->F_size()));
  o.require(rep.elements_scanned == expected_F && !rep.cond_c_estimated, "condition (c) scan was not exhaustive");
  o.require(rep.cond_c_count == 0, std::to_string(rep.cond_c_count) + " elements with a fixed point");
  o.require(rep.cond_a && rep.cond_b && rep.max_defect == 0, "defect " + to_string(rep.max_defect));
  o.require(secs < kLimit4, "runtime " + std::to_string(secs) + " s");
  if (o.pass)
    o.detail = "all " + std::to_string(expected_F) + " elements of F scanned, 0 fixed points; defect 0/1 " +
               (rep.cond_d_estimated ? "[sampled: " + std::to_string(rep.pairs_evaluated) + " pairs]"
                                     : "[exact: " + std::to_string(rep.pairs_evaluated) + " pairs]") +
               ", " + std::to_string(secs) + " s";
  return o;
}

// ---------------------------------------------------------------- 5

// Disagreement count of psi(g1 g2) and psi(g1) then psi(g2), maximised over F u {0}.
std::size_t worst_disagreement(const QuasiActionTable<Elt>& psi, const std::vector<Elt>& F) {
  std::vector<Elt> keys = F;
  keys.push_back(0);
  std::size_t worst = 0;
  for (Elt a : keys)
    for (Elt b : keys) {
      const Permutation& pa = psi.at(a);
      const Permutation& pb = psi.at(b);
      const Permutation& pab = psi.at(a + b);
      std::size_t bad = 0;
      for (Point x = 0; x < psi.carrier_size(); ++x) bad += pab(x) != pb(pa(x));
      worst = std::max(worst, bad);
    }
  return worst;
}

Outcome criterion5() {
  Outcome o;
  const std::vector<Elt> F{-1, 1};
  const VertexGroup Z = VertexGroup::integers();
  int runs = 0;
  Rational tightest = 0;  // largest measured / bound
  for (const std::uint64_t den : {20u, 10u}) {
    const Rational eps(1, den);
    // two disagreeing points, the least a permutation defect can be
    const std::size_t m = 2 * den;
    for (std::size_t n : {2u, 3u}) {
      for (int trial = 0; trial < kDegradedTrials; ++trial) {
        Instance I{SimpleGraph(n, n == 3 ? std::vector<std::pair<int, int>>{{0, 1}, {1, 2}}
                                         : std::vector<std::pair<int, int>>{}),
                   {},
                   {}};
        Rng rng(derive_seed(1000 * n + trial, den));
        // Every coordinate must stay below the exhaustive enumeration cap and
        // the suite within minutes, so for n = 3 one vertex is degraded (two on
        // every fourth trial at eps = 1/10) and the rest keep an exact shift
        // action on 3 points.
        const std::size_t degraded = n == 2 ? 2 : (den == 10 && trial % 4 == 0 ? 2 : 1);
        for (std::size_t v = 0; v < n; ++v) {
          I.groups.push_back(Z);
          const bool degrade_here = (v + n - trial % n) % n < degraded;
          if (!degrade_here) {
            I.inputs.push_back(VertexInput{shift_table(3, 2), F});
            continue;
          }
          // seeded search for a degradation whose measured defect is exactly eps
          std::optional<QuasiActionTable<Elt>> found;
          for (int attempt = 0; attempt < 2000 && !found; ++attempt) {
            auto t = degrade(shift_table(m, 2), Rational(1, m), rng.below(UINT64_MAX), VertexGroupOps{&Z});
            if (worst_disagreement(t, F) == 2) found = std::move(t);
          }
          if (!found) {
            o.require(false, "no degradation with defect " + to_string(eps) + " found");
            return o;
          }
          I.inputs.push_back(VertexInput{std::move(*found), F});
        }
        const auto out = build(I, n == 2 ? 2 : 1, LabelMode::General, trial + 1);
        const MeasureReport rep = measure_conditions(*out);
        ++runs;
        const Rational total_bound = Rational(f_oracle(n)) * eps;
        const Rational coord_bound = Rational(n * f_oracle(n - 1) + 1) * eps;
        o.require(out->eps_in() == eps, "measured input defect " + to_string(out->eps_in()) + " != " + to_string(eps));
        o.require(!rep.estimated, "measurement was sampled");
        o.require(rep.max_defect <= total_bound, "total defect " + to_string(rep.max_defect) + " > f(n) eps");
        for (const auto& cb : rep.coordinates)
          o.require(!cb.sampled && cb.max_defect <= coord_bound,
                    "coordinate " + std::to_string(cb.k) + " defect " + to_string(cb.max_defect));
        tightest = rational_max(tightest, rep.max_defect / total_bound);
      }
    }
  }
  if (o.pass)
    o.detail = std::to_string(runs) + " runs (f(2)=" + std::to_string(f_oracle(2)) +
               ", f(3)=" + std::to_string(f_oracle(3)) + "), worst measured/bound = " + to_string(tightest);
  return o;
}

// ---------------------------------------------------------------- 6

Outcome criterion6() {
  Outcome o;
  Rng rng(606);
  const VertexGroup Z = VertexGroup::integers();
  const std::vector<Elt> F{-1, 0, 1};
  int nonzero = 0;
  for (int trial = 0; trial < kProductTrials; ++trial) {
    const std::size_t n = 2 + rng.below(2);
    std::vector<QuasiActionTable<Elt>> tables;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = 5 + rng.below(8);
      tables.push_back(degrade(shift_table(m, 2), Rational(1 + rng.below(3), m), rng.below(UINT64_MAX),
                               VertexGroupOps{&Z}));
    }
    const auto product = product_quasi_action<Elt>(tables);
    const Elt g1 = F[rng.below(3)], g2 = F[rng.below(3)];
    // per-factor defects of the pair, counted directly
    Rational agreement = 1, worst = 0;
    for (const auto& t : tables) {
      std::size_t bad = 0;
      for (Point x = 0; x < t.carrier_size(); ++x) bad += t.at(g1 + g2)(x) != t.at(g2)(t.at(g1)(x));
      const Rational d = ratio(static_cast<std::int64_t>(bad), static_cast<std::int64_t>(t.carrier_size()));
      agreement *= 1 - d;
      worst = rational_max(worst, d);
    }
    const std::vector<Elt> pair_keys{g1, g2};
    const auto rep = verify_special(product, std::span<const Elt>(F), Rational(0), VertexGroupOps{&Z});
    const std::size_t a = static_cast<std::size_t>(g1 + 1), b = static_cast<std::size_t>(g2 + 1);
    const Rational measured = ratio(static_cast<std::int64_t>(rep.pair_disagreements[a * 3 + b]),
                                    static_cast<std::int64_t>(product.carrier_size()));
    o.require(measured == 1 - agreement, "trial " + std::to_string(trial) + ": " + to_string(measured) +
                                             " != " + to_string(1 - agreement));
    o.require(measured <= Rational(n) * worst, "trial " + std::to_string(trial) + ": above n * max defect");
    nonzero += measured != 0;
  }
  if (o.pass) o.detail = std::to_string(kProductTrials) + " pairs, " + std::to_string(nonzero) + " with non-zero defect";
  return o;
}

// ---------------------------------------------------------------- 7

std::vector<Letter> free_reduce(const std::vector<Letter>& w) {
  std::vector<Letter> out;
  for (Letter x : w) {
    if (!out.empty() && (out.back().code ^ 1u) == x.code)
      out.pop_back();
    else
      out.push_back(x);
  }
  return out;
}

bool same_letters(const ReducedWord& a, const std::vector<Letter>& b) {
  return a.size() == b.size() && std::equal(b.begin(), b.end(), a.letters().begin());
}

Outcome criterion7() {
  Outcome o;
  // s = 2, R = 4: every word, full permutations
  const BallGroupRep V = build_ball_group(2, 4, 77);
  const Point base = V.index_of(ReducedWord());
  std::vector<std::vector<Letter>> words{{}};
  for (std::size_t i = 0; i < words.size(); ++i)
    if (words[i].size() < 4)
      for (std::uint32_t c = 0; c < 4; ++c) {
        auto w = words[i];
        w.push_back(Letter{c});
        words.push_back(std::move(w));
      }
  std::size_t trivial = 0;
  for (const auto& w : words) {
    const Permutation p = eval_word(V, w);
    const auto red = free_reduce(w);
    o.require(same_letters(V.word_at(p(base)), red), "basepoint of " + std::to_string(w.size()) + "-letter word");
    o.require(p.is_identity() == red.empty(), "trivial-iff-freely-trivial");
    trivial += red.empty();
  }
  // s = 4, R = 10: sampled
  const std::size_t s = 4, R = 10;
  const BallAction act(s, R, 78);
  Rng rng(79);
  auto random_letters = [&](std::size_t len) {
    std::vector<Letter> w(len);
    for (auto& x : w) x = Letter{static_cast<std::uint32_t>(rng.below(2 * s))};
    return w;
  };
  std::uint64_t violations = 0;
  for (std::uint64_t t = 0; t < kBallSamples; ++t) {
    const auto w = random_letters(rng.below(R + 1));
    const auto red = free_reduce(w);
    violations += !same_letters(act.apply_word(w, ReducedWord()), red);
    // w w^-1 fixes a random point of the ball
    ReducedWord p;
    for (Letter x : free_reduce(random_letters(rng.below(R + 1)))) p.push(x);
    std::vector<Letter> ww = w;
    for (auto it = w.rbegin(); it != w.rend(); ++it) ww.push_back(it->inverted());
    violations += !(act.apply_word(ww, p) == p);
  }
  o.require(violations == 0, std::to_string(violations) + " violations among sampled words");
  if (o.pass)
    o.detail = std::to_string(words.size()) + " words exhaustively (" + std::to_string(trivial) +
               " freely trivial); " + std::to_string(kBallSamples) + " sampled words at s=4, R=10, 0 violations";
  return o;
}

// ---------------------------------------------------------------- 8

Outcome criterion8() {
  Outcome o;
  std::vector<oracle::Setting> graphs{
      oracle::cyclic_setting(2, {}, 2),
      oracle::cyclic_setting(2, {{0, 1}}, 3),
      oracle::cyclic_setting(3, {}, 2),
      oracle::cyclic_setting(3, {{0, 1}, {1, 2}}, 2),
      oracle::cyclic_setting(3, {{0, 1}, {1, 2}, {0, 2}}, 3),
      oracle::cyclic_setting(4, {{0, 1}, {1, 2}, {2, 3}}, 2),
      oracle::cyclic_setting(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, 3),
      oracle::cyclic_setting(4, {{0, 1}, {0, 2}, {0, 3}}, 2),
  };
  constexpr std::size_t N = 6;
  Rng rng(808);
  int max_h = 0, max_g = 0;
  for (const auto& s : graphs) {
    const GraphProduct ctx = oracle::context_of(s);
    auto random_element = [&] {
      while (true) {
        const GPElement g = ctx.normalize(oracle::random_word(s, rng, rng.below(2 * N + 1)));
        if (g.length() <= N) return g;
      }
    };
    for (int t = 0; t < kMergerPairs; ++t) {
      const GPElement g1 = random_element(), g2 = random_element();
      const int k = static_cast<int>(rng.below(s.n));
      const RewriteResult r = rewrite_concat_counting(ctx, k_normal_form(g1, k), k_normal_form(g2, k));
      o.require(r.h_reducing <= s.n, "h_reducing " + std::to_string(r.h_reducing));
      o.require(r.g_reducing <= 1, "g_reducing " + std::to_string(r.g_reducing));
      o.require(r.product == k_normal_form(ctx.multiply(g1, g2), k), "product differs from the oracle");
      max_h = std::max(max_h, r.h_reducing);
      max_g = std::max(max_g, r.g_reducing);
    }
  }
  if (o.pass)
    o.detail = std::to_string(graphs.size()) + " graphs x " + std::to_string(kMergerPairs) +
               " pairs; max h_reducing " + std::to_string(max_h) + ", max g_reducing " + std::to_string(max_g);
  return o;
}

// ---------------------------------------------------------------- 9

Outcome criterion9() {
  Outcome o;
  const oracle::Setting s = oracle::cyclic_setting(3, {{0, 1}, {1, 2}}, 2);
  const GraphProduct ctx = oracle::context_of(s);
  const auto words = oracle::all_words(s, 5);
  for (const auto& w : words)
    o.require(ctx.normalize(w).syllables() == oracle::shortest_shuffle(s, w), "normal form disagrees");
  Rng rng(909);
  for (int t = 0; t < kShuffleTrials; ++t) {
    const GPElement g = ctx.normalize(oracle::random_word(s, rng, rng.below(9)));
    const auto all = oracle::shuffles(s, g.syllables());
    auto it = all.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng.below(all.size())));
    o.require(ctx.normalize(*it) == g, "shuffle changed the normal form");
  }
  if (o.pass)
    o.detail = std::to_string(words.size()) + " words exhaustively, " + std::to_string(kShuffleTrials) +
               " shuffle trials";
  return o;
}

// ---------------------------------------------------------------- 10

Outcome criterion10() {
  Outcome o;
  auto cyclic_presented = [](const std::string& gen) { return GroupSpec::presented(Presentation({gen}, {})); };
  auto power = [](std::size_t gen, int k) { return PWord(static_cast<std::size_t>(k), PLetter{gen, false}); };
  {
    GoGEdge e;
    e.v1 = 0;
    e.v2 = 1;
    e.group = cyclic_presented("x");
    e.theta1 = {power(0, 2)};
    e.theta2 = {power(0, 3)};
    const GraphOfGroups g({cyclic_presented("a"), cyclic_presented("b")}, {e});
    const std::string text = to_string(fundamental_presentation(g, spanning_tree(g)));
    o.require(text == "⟨a,b ∣ a²=b³⟩", "amalgam presentation " + text);
  }
  {
    GoGEdge e;
    e.group = cyclic_presented("x");
    e.theta1 = {power(0, 2)};
    e.theta2 = {power(0, 3)};
    const GraphOfGroups g({cyclic_presented("a")}, {e});
    const std::string text = to_string(fundamental_presentation(g, spanning_tree(g)));
    o.require(text == "⟨a,t ∣ t⁻¹a²t=a³⟩", "HNN presentation " + text);
  }
  {
    const IntegerLineChain c = integer_line_chain("H", "K", 0, 2);
    o.require(c.vertices == std::vector<std::string>{"H_0", "H_1", "H_2"}, "chain vertices");
    o.require(c.edges.size() == 2 && c.edges[0].left_image == "L_0" && c.edges[0].right_image == "K_1" &&
                  c.edges[1].left_image == "L_1" && c.edges[1].right_image == "K_2",
              "chain edge labels");
  }
  // random graphs of groups: generator and relation counts
  Rng rng(1010);
  for (int t = 0; t < kRandomGogs; ++t) {
    const std::size_t V = 1 + rng.below(5);
    std::vector<GroupSpec> vertices;
    std::size_t gen_total = 0, rel_total = 0;
    for (std::size_t v = 0; v < V; ++v) {
      std::vector<std::string> names;
      const std::size_t k = 1 + rng.below(3);
      for (std::size_t i = 0; i < k; ++i) names.push_back("g" + std::to_string(v) + "_" + std::to_string(i));
      std::vector<Relation> rels;
      if (rng.coin()) rels.push_back(Relation{power(0, 2 + static_cast<int>(rng.below(3))), {}});
      gen_total += k;
      rel_total += rels.size();
      vertices.push_back(GroupSpec::presented(Presentation(names, rels)));
    }
    // a random spanning tree plus extra edges and loops, no multi-edges
    std::set<std::pair<int, int>> used;
    std::vector<GoGEdge> edges;
    std::size_t edge_gens = 0;
    auto add_edge = [&](int a, int b) {
      if (!used.insert(std::minmax(a, b)).second) return;
      GoGEdge e;
      e.v1 = a;
      e.v2 = b;
      const bool trivial = rng.coin();
      e.group = trivial ? GroupSpec::presented(Presentation({}, {})) : cyclic_presented("x");
      if (!trivial) {
        e.theta1 = {power(rng.below(vertices[a].presentation.generators().size()), 1)};
        e.theta2 = {power(rng.below(vertices[b].presentation.generators().size()), 2)};
        ++edge_gens;
      }
      edges.push_back(std::move(e));
    };
    for (std::size_t v = 1; v < V; ++v) add_edge(static_cast<int>(rng.below(v)), static_cast<int>(v));
    for (std::size_t extra = rng.below(4); extra-- > 0;)
      add_edge(static_cast<int>(rng.below(V)), static_cast<int>(rng.below(V)));
    const std::size_t E = edges.size();
    const GraphOfGroups g(std::move(vertices), std::move(edges));
    const Presentation p = fundamental_presentation(g, spanning_tree(g));
    o.require(p.generators().size() == gen_total + E - (V - 1),
              "generator count on random graph " + std::to_string(t));
    o.require(p.relations().size() == rel_total + edge_gens, "relation count on random graph " + std::to_string(t));
    const HnnDecomposition d = hnn_amalgam_decomposition(g, spanning_tree(g));
    o.require(d.stable_letters.size() == E - (V - 1), "stable letters on random graph " + std::to_string(t));
  }
  if (o.pass) o.detail = "both worked presentations exact, chain [0,2] labels match, 50 random graphs";
  return o;
}

}  // namespace

// With arguments, runs only the listed criteria: acceptance 5 6
int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"free product Z/2 * Z/2, N=6: exact, 12 fixed-point free, condition (2)", criterion1},
      {"direct product Z/2 x Z/2: commuting case of condition (1)", criterion2},
      {"path of three Z/2, N=4: exact, condition (2) for all 8 subsets", criterion3},
      {"two copies of Z by shifts on Z/101, K=10, N=6: fixed-point free, defect 0", criterion4},
      {"bound soundness under degradation, n=2,3", criterion5},
      {"product defect is 1 minus the product of agreements", criterion6},
      {"ball group: basepoint and trivial-iff-freely-trivial", criterion7},
      {"merger counts and rewritten products", criterion8},
      {"normal form against the shortest-shuffle oracle", criterion9},
      {"Bass-Serre presentations, chain labels, random counts", criterion10},
  };
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::strtoul(argv[i], nullptr, 10));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
