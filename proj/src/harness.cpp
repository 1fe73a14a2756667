#include "soficlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "soficlab/ball_group.hpp"
#include "soficlab/core_groups.hpp"
#include "soficlab/errors.hpp"
#include "soficlab/quasi_actions.hpp"

namespace soficlab {

namespace {

// ---------------------------------------------------------------- parsing

[[noreturn]] void schema(const std::string& ptr, const std::string& msg) {
  fail(ErrorCode::SchemaError, (ptr.empty() ? std::string("/") : ptr) + ": " + msg);
}

std::string child(const std::string& ptr, const std::string& key) {
  std::string escaped;
  for (char ch : key) {
    if (ch == '~')
      escaped += "~0";
    else if (ch == '/')
      escaped += "~1";
    else
      escaped += ch;
  }
  return ptr + "/" + escaped;
}

std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

void expect_object(const Json& j, const std::string& ptr, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) schema(ptr, "expected an object");
  for (const auto& [key, value] : j.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      schema(child(ptr, key), "unknown key");
}

const Json& require(const Json& j, const std::string& ptr, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) schema(child(ptr, key), "required");
  return *it;
}

const Json& expect_array(const Json& j, const std::string& ptr) {
  if (!j.is_array()) schema(ptr, "expected an array");
  return j;
}

std::int64_t get_int(const Json& j, const std::string& ptr) {
  if (!j.is_number_integer()) schema(ptr, "expected an integer");
  return j.get<std::int64_t>();
}

std::uint64_t get_uint(const Json& j, const std::string& ptr) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    schema(ptr, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::size_t get_positive(const Json& j, const std::string& ptr) {
  const auto v = get_uint(j, ptr);
  if (v == 0) schema(ptr, "expected a positive integer");
  return static_cast<std::size_t>(v);
}

std::string get_string(const Json& j, const std::string& ptr) {
  if (!j.is_string()) schema(ptr, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const Json& j, const std::string& ptr) {
  if (!j.is_boolean()) schema(ptr, "expected true or false");
  return j.get<bool>();
}

// Rationals are "p/q" strings; bare integers are accepted too.
Rational get_rational(const Json& j, const std::string& ptr) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (!j.is_string()) schema(ptr, "expected a rational string \"p/q\"");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const Error& e) {
    schema(ptr, e.what());
  }
}

std::vector<Elt> get_int_list(const Json& j, const std::string& ptr) {
  expect_array(j, ptr);
  std::vector<Elt> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_int(j[i], child(ptr, i)));
  return out;
}

std::vector<std::string> get_string_list(const Json& j, const std::string& ptr) {
  expect_array(j, ptr);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_string(j[i], child(ptr, i)));
  return out;
}

GroupConfig parse_group(const Json& j, const std::string& ptr) {
  expect_object(j, ptr, {"kind", "order", "degree", "table"});
  GroupConfig g;
  g.kind = get_string(require(j, ptr, "kind"), child(ptr, "kind"));
  if (g.kind == "cyclic") {
    g.order = get_positive(require(j, ptr, "order"), child(ptr, "order"));
  } else if (g.kind == "symmetric") {
    g.order = get_positive(require(j, ptr, "degree"), child(ptr, "degree"));
  } else if (g.kind == "table") {
    const std::string tp = child(ptr, "table");
    const Json& t = expect_array(require(j, ptr, "table"), tp);
    for (std::size_t r = 0; r < t.size(); ++r) g.table.push_back(get_int_list(t[r], child(tp, r)));
    if (j.contains("order") && get_uint(j["order"], child(ptr, "order")) != g.table.size())
      schema(child(ptr, "order"), "does not match the table size");
  } else if (g.kind != "integers") {
    schema(child(ptr, "kind"), "expected cyclic, symmetric, table or integers");
  }
  return g;
}

ActionConfig parse_action(const Json& j, const std::string& ptr) {
  expect_object(j, ptr, {"kind", "carrier", "range", "base", "delta", "seed", "F"});
  ActionConfig a;
  a.kind = get_string(require(j, ptr, "kind"), child(ptr, "kind"));
  if (a.kind == "shift") {
    a.carrier = get_positive(require(j, ptr, "carrier"), child(ptr, "carrier"));
    a.range = static_cast<Elt>(get_uint(require(j, ptr, "range"), child(ptr, "range")));
  } else if (a.kind == "degraded") {
    a.base.push_back(parse_action(require(j, ptr, "base"), child(ptr, "base")));
    a.delta = get_rational(require(j, ptr, "delta"), child(ptr, "delta"));
    if (a.delta < 0 || a.delta >= 1) schema(child(ptr, "delta"), "must lie in [0,1)");
    // randomised: the seed is mandatory
    a.seed = get_uint(require(j, ptr, "seed"), child(ptr, "seed"));
  } else if (a.kind != "regular") {
    schema(child(ptr, "kind"), "expected regular, shift or degraded");
  }
  if (j.contains("F")) a.F = get_int_list(j["F"], child(ptr, "F"));
  return a;
}

std::vector<Syllable> parse_syllables(const Json& j, const std::string& ptr) {
  expect_array(j, ptr);
  std::vector<Syllable> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = child(ptr, i);
    if (!j[i].is_array() || j[i].size() != 2) schema(p, "expected a [vertex, elt] pair");
    out.push_back(Syllable{static_cast<std::int32_t>(get_int(j[i][0], child(p, 0))), get_int(j[i][1], child(p, 1))});
  }
  return out;
}

GogGroupConfig parse_gog_group(const Json& j, const std::string& ptr) {
  expect_object(j, ptr, {"generators", "relations", "finite", "prefix"});
  GogGroupConfig g;
  if (j.contains("finite")) {
    g.finite = parse_group(j["finite"], child(ptr, "finite"));
    if (g.finite->kind == "integers") schema(child(ptr, "finite"), "the integers are not finite");
    if (j.contains("prefix")) g.prefix = get_string(j["prefix"], child(ptr, "prefix"));
    if (j.contains("generators") || j.contains("relations"))
      schema(ptr, "give either a finite group or generators and relations");
    return g;
  }
  if (j.contains("generators")) g.generators = get_string_list(j["generators"], child(ptr, "generators"));
  if (j.contains("relations")) {
    const std::string rp = child(ptr, "relations");
    const Json& rs = expect_array(j["relations"], rp);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const std::string p = child(rp, i);
      if (rs[i].is_string()) {
        g.relations.push_back({rs[i].get<std::string>(), ""});
      } else {
        if (!rs[i].is_array() || rs[i].size() != 2) schema(p, "expected a relator string or a [lhs, rhs] pair");
        g.relations.push_back({get_string(rs[i][0], child(p, 0)), get_string(rs[i][1], child(p, 1))});
      }
    }
  }
  return g;
}

GogConfig parse_gog(const Json& j, const std::string& ptr) {
  expect_object(j, ptr, {"vertices", "edges", "tree", "chain"});
  GogConfig g;
  if (j.contains("vertices")) {
    const std::string vp = child(ptr, "vertices");
    const Json& vs = expect_array(j["vertices"], vp);
    for (std::size_t i = 0; i < vs.size(); ++i) g.vertices.push_back(parse_gog_group(vs[i], child(vp, i)));
  }
  if (j.contains("edges")) {
    const std::string ep = child(ptr, "edges");
    const Json& es = expect_array(j["edges"], ep);
    for (std::size_t i = 0; i < es.size(); ++i) {
      const std::string p = child(ep, i);
      expect_object(es[i], p, {"v1", "v2", "group", "theta1", "theta2", "amenable"});
      GogEdgeConfig e;
      e.v1 = static_cast<int>(get_int(require(es[i], p, "v1"), child(p, "v1")));
      e.v2 = static_cast<int>(get_int(require(es[i], p, "v2"), child(p, "v2")));
      for (int v : {e.v1, e.v2})
        if (v < 0 || static_cast<std::size_t>(v) >= g.vertices.size()) schema(p, "edge endpoint out of range");
      e.group = parse_gog_group(require(es[i], p, "group"), child(p, "group"));
      e.theta1 = get_string_list(require(es[i], p, "theta1"), child(p, "theta1"));
      e.theta2 = get_string_list(require(es[i], p, "theta2"), child(p, "theta2"));
      if (es[i].contains("amenable")) e.amenable = get_bool(es[i]["amenable"], child(p, "amenable"));
      g.edges.push_back(std::move(e));
    }
  }
  if (j.contains("tree")) {
    std::vector<std::size_t> t;
    for (Elt e : get_int_list(j["tree"], child(ptr, "tree"))) {
      if (e < 0) schema(child(ptr, "tree"), "edge indices are non-negative");
      t.push_back(static_cast<std::size_t>(e));
    }
    g.tree = t;
  }
  if (j.contains("chain")) {
    const std::string cp = child(ptr, "chain");
    expect_object(j["chain"], cp, {"H", "K", "L", "lo", "hi"});
    ChainConfig c;
    if (j["chain"].contains("H")) c.H = get_string(j["chain"]["H"], child(cp, "H"));
    if (j["chain"].contains("K")) c.K = get_string(j["chain"]["K"], child(cp, "K"));
    if (j["chain"].contains("L")) c.L = get_string(j["chain"]["L"], child(cp, "L"));
    c.lo = get_int(require(j["chain"], cp, "lo"), child(cp, "lo"));
    c.hi = get_int(require(j["chain"], cp, "hi"), child(cp, "hi"));
    if (c.lo > c.hi) schema(child(cp, "hi"), "range needs lo <= hi");
    g.chain = c;
  }
  return g;
}

// ---------------------------------------------------------------- emitting

Json emit_group(const GroupConfig& g) {
  Json j;
  j["kind"] = g.kind;
  if (g.kind == "cyclic") j["order"] = g.order;
  if (g.kind == "symmetric") j["degree"] = g.order;
  if (g.kind == "table") j["table"] = g.table;
  return j;
}

Json emit_action(const ActionConfig& a) {
  Json j;
  j["kind"] = a.kind;
  if (a.kind == "shift") {
    j["carrier"] = a.carrier;
    j["range"] = a.range;
  }
  if (a.kind == "degraded") {
    j["base"] = emit_action(a.base.at(0));
    j["delta"] = to_string(a.delta);
    j["seed"] = a.seed;
  }
  if (a.F) j["F"] = *a.F;
  return j;
}

Json emit_syllables(const std::vector<Syllable>& w) {
  Json j = Json::array();
  for (const auto& s : w) j.push_back(Json::array({s.vertex, s.elt}));
  return j;
}

Json emit_gog_group(const GogGroupConfig& g) {
  Json j;
  if (g.finite) {
    j["finite"] = emit_group(*g.finite);
    j["prefix"] = g.prefix;
    return j;
  }
  j["generators"] = g.generators;
  Json rels = Json::array();
  for (const auto& [l, r] : g.relations) rels.push_back(Json::array({l, r}));
  j["relations"] = rels;
  return j;
}

// ---------------------------------------------------------------- building inputs

VertexGroup make_group(const GroupConfig& g, const std::string& ptr) {
  try {
    if (g.kind == "cyclic") return VertexGroup::finite(cyclic_group(g.order));
    if (g.kind == "symmetric") return VertexGroup::finite(symmetric_group(g.order));
    if (g.kind == "table") return VertexGroup::finite(group_from_cayley_table(g.table));
    return VertexGroup::integers();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotAGroup) schema(child(ptr, "table"), e.what());
    throw;
  }
}

struct BuiltAction {
  QuasiActionTable<Elt> table;
  std::vector<Elt> F;
};

BuiltAction make_action(const ActionConfig& a, const VertexGroup& g, const std::string& ptr) {
  BuiltAction out;
  if (a.kind == "regular") {
    if (!g.is_finite()) schema(child(ptr, "kind"), "a regular action needs a finite vertex group");
    out.table = regular_table(g.finite_group());
    out.F.resize(g.order());
    std::iota(out.F.begin(), out.F.end(), 0);
  } else if (a.kind == "shift") {
    if (g.is_finite()) schema(child(ptr, "kind"), "a shift action needs the integers as vertex group");
    // keys cover pairwise sums of F_i
    out.table = shift_table(a.carrier, 2 * a.range);
    for (Elt k = -a.range; k <= a.range; ++k) out.F.push_back(k);
  } else {
    BuiltAction base = make_action(a.base.at(0), g, child(ptr, "base"));
    out.table = degrade(base.table, a.delta, a.seed, VertexGroupOps{&g});
    out.F = std::move(base.F);
  }
  if (a.F) {
    for (std::size_t i = 0; i < a.F->size(); ++i)
      if (!out.table.contains((*a.F)[i])) schema(child(child(ptr, "F"), i), "key has no table entry");
    out.F = *a.F;
  }
  return out;
}

struct ProductInputs {
  SimpleGraph graph;
  std::vector<VertexGroup> groups;
};

ProductInputs make_product(const ExperimentConfig& c) {
  if (!c.n) schema("/graph", "required");
  ProductInputs p;
  p.graph = SimpleGraph(*c.n, c.edges);
  if (c.vertex_groups.size() != *c.n)
    schema("/vertex_groups", "expected " + std::to_string(*c.n) + " vertex groups");
  for (std::size_t v = 0; v < *c.n; ++v) p.groups.push_back(make_group(c.vertex_groups[v], child("/vertex_groups", v)));
  return p;
}

BuildConfig make_build_config(const ExperimentConfig& c) {
  BuildConfig bc;
  bc.N = c.N;
  bc.radius_override = c.radius_override;
  bc.mode = c.mode == "general" ? LabelMode::General : LabelMode::Exact;
  if (c.budget.max_F) bc.max_F = *c.budget.max_F;
  if (c.budget.point_cap) bc.point_cap = *c.budget.point_cap;
  if (c.budget.samples) bc.samples = *c.budget.samples;
  if (auto env = budget_from_env()) bc.point_cap = *env;
  bc.seed = *c.seed;
  return bc;
}

MeasureOptions make_measure_options(const ExperimentConfig& c) {
  MeasureOptions o;
  o.use_symmetry = c.symmetry;
  o.threads = c.threads;
  if (c.budget.pair_cap) o.pair_cap = *c.budget.pair_cap;
  if (c.budget.sampled_pairs) o.sampled_pairs = *c.budget.sampled_pairs;
  if (c.budget.sampled_elements) o.sampled_elements = *c.budget.sampled_elements;
  if (auto env = budget_from_env()) o.pair_cap = *env;
  return o;
}

std::string verdict(bool ok) { return ok ? "pass" : "fail"; }

Json vertex_set_json(VertexSet s) { return s.members(); }

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- build

Report run_build(const ExperimentConfig& c) {
  if (!c.seed) schema("/seed", "a seed is required for build runs (sampling fallbacks draw from it)");
  ProductInputs pin = make_product(c);
  if (c.actions.size() != *c.n) schema("/actions", "expected " + std::to_string(*c.n) + " actions");
  std::vector<VertexInput> inputs;
  for (std::size_t v = 0; v < *c.n; ++v) {
    BuiltAction a = make_action(c.actions[v], pin.groups[v], child("/actions", v));
    inputs.push_back(VertexInput{std::move(a.table), std::move(a.F)});
  }
  Report r;
  auto t0 = Clock::now();
  auto out = Construction::build(pin.graph, pin.groups, std::move(inputs), make_build_config(c));
  r.timings["build_ms"] = ms_since(t0);
  t0 = Clock::now();
  const MeasureReport m = measure_conditions(*out, make_measure_options(c));
  r.timings["measure_ms"] = ms_since(t0);

  const Rational bound = out->bound();
  Json& j = r.json;
  j["command"] = "build";
  j["version"] = kVersion;
  j["seed"] = *c.seed;
  j["n"] = out->n();
  j["N"] = out->N();
  j["radius"] = out->radius();
  j["mode"] = c.mode;
  j["F_size"] = out->F_size();
  j["F_explicit"] = out->F_explicit();
  j["symmetric_inputs"] = out->symmetric();
  Json inputs_json = Json::array();
  for (std::size_t v = 0; v < out->n(); ++v)
    inputs_json.push_back({{"vertex", v}, {"defect", to_string(out->input_defects()[v])}});
  j["inputs"] = inputs_json;

  Json cond;
  cond["a"] = m.cond_a;
  cond["b"] = m.cond_b;
  Json cw = Json::array();
  for (const auto& g : m.cond_c) cw.push_back(to_string(g));
  cond["c"] = {{"holds", m.cond_c_count == 0},
               {"violations", m.cond_c_count},
               {"witnesses", cw},
               {"elements_scanned", m.elements_scanned},
               {"estimated", m.cond_c_estimated}};
  if (!m.cond_c_estimated && out->F_size() > 0)
    cond["c"]["fixed_point_free"] = out->F_size() - 1 - m.cond_c_count;
  Json d = {{"max_defect", to_string(m.max_defect)},
            {"within_bound", m.max_defect <= bound},
            {"pairs_evaluated", m.pairs_evaluated},
            {"estimated", m.cond_d_estimated}};
  if (m.worst_pair) d["worst_pair"] = Json::array({to_string(m.worst_pair->first), to_string(m.worst_pair->second)});
  if (m.cond_d_estimated) d["sample_size"] = m.pairs_evaluated;
  cond["d"] = d;
  j["conditions"] = cond;

  j["bound"] = {{"f_n", f_bound(out->n())},
                {"eps_in", to_string(out->eps_in())},
                {"total_bound", to_string(bound)},
                {"per_coordinate_bound", to_string(out->per_coordinate_bound())},
                {"within_bound", m.within_bound},
                {"within_per_coordinate_bound", m.within_per_coordinate_bound}};
  Json coords = Json::array();
  for (const auto& cb : m.coordinates)
    coords.push_back({{"k", cb.k},
                      {"effective_points", cb.effective_points},
                      {"evaluated_points", cb.evaluated_points},
                      {"sampled", cb.sampled},
                      {"symmetry_reduced", cb.symmetry_reduced},
                      {"max_defect", to_string(cb.max_defect)}});
  j["coordinates"] = coords;

  Json c1 = Json::array();
  for (const auto& e : m.condition1)
    c1.push_back({{"x", to_string(e.x)},
                  {"y", to_string(e.y)},
                  {"adjacent", e.adjacent},
                  {"product_ok", e.product_ok},
                  {"commute_ok", e.commute_ok}});
  j["condition1"] = {{"holds", m.condition1_holds()}, {"entries", c1}};
  Json c2 = Json::array();
  for (const auto& e : m.condition2)
    c2.push_back({{"g", to_string(e.g)}, {"J", vertex_set_json(e.J)}, {"in_GJ", e.in_GJ}, {"holds", e.holds}});
  j["condition2"] = {{"holds", m.condition2_holds()}, {"checked", m.condition2.size()}, {"entries", c2}};
  j["diagnostics"] = {{"u_cancellations", m.u_cancellations}, {"label_route_mismatches", m.label_route_mismatches}};
  j["estimated"] = m.estimated;

  const bool special = m.special(bound);
  j["special"] = special;
  r.pass = special && m.condition1_holds() && m.condition2_holds() && m.within_bound &&
           m.within_per_coordinate_bound && m.label_route_mismatches == 0;
  j["pass"] = r.pass;

  r.rows.push_back({"condition", "a", "", verdict(m.cond_a)});
  r.rows.push_back({"condition", "b", "", verdict(m.cond_b)});
  r.rows.push_back({"condition", "c", "", verdict(m.cond_c_count == 0)});
  r.rows.push_back({"condition", "d", to_string(m.max_defect), verdict(m.max_defect <= bound)});
  r.rows.push_back({"condition", "1", "", verdict(m.condition1_holds())});
  r.rows.push_back({"condition", "2", "", verdict(m.condition2_holds())});
  if (out->F_explicit() && m.pair_defects.size() == out->F().size() * out->F().size()) {
    const auto& F = out->F();
    for (std::size_t a = 0; a < F.size(); ++a)
      for (std::size_t b = 0; b < F.size(); ++b)
        r.rows.push_back({"defect", to_string(F[a]), to_string(F[b]), to_string(m.pair_defects[a * F.size() + b])});
  }
  return r;
}

// ---------------------------------------------------------------- verify

Report run_verify(const ExperimentConfig& c) {
  if (!c.verify) schema("/verify", "required");
  const VerifyConfig& v = *c.verify;
  const VertexGroup g = make_group(v.group, "/verify/group");
  QuasiActionTable<Elt> table;
  std::vector<Elt> F;
  if (v.action) {
    BuiltAction a = make_action(*v.action, g, "/verify/action");
    table = std::move(a.table);
    F = std::move(a.F);
  } else if (v.table) {
    std::map<Elt, Permutation> entries;
    for (std::size_t i = 0; i < v.table->second.size(); ++i) {
      const auto& [key, image] = v.table->second[i];
      try {
        entries.emplace(key, Permutation(image));
      } catch (const Error& e) {
        schema("/verify/table/entries/" + std::to_string(i) + "/image", e.what());
      }
    }
    table = QuasiActionTable<Elt>(v.table->first, std::move(entries));
    F = table.keys();
  } else {
    schema("/verify", "give an action or a table");
  }
  if (v.F) F = *v.F;
  for (std::size_t i = 0; i < F.size(); ++i)
    if (!g.contains(F[i])) schema("/verify/F/" + std::to_string(i), "not an element of the group");

  const auto rep = verify_special(table, std::span<const Elt>(F), v.epsilon, VertexGroupOps{&g});
  Report r;
  Json& j = r.json;
  j["command"] = "verify";
  j["version"] = kVersion;
  j["carrier"] = table.carrier_size();
  j["F"] = F;
  j["epsilon"] = to_string(v.epsilon);
  Json cc = Json::array();
  for (Elt k : rep.cond_c) cc.push_back(k);
  Json d = {{"max_defect", to_string(rep.cond_d_max_defect)}};
  if (rep.cond_d_worst_pair) d["worst_pair"] = Json::array({rep.cond_d_worst_pair->first, rep.cond_d_worst_pair->second});
  j["conditions"] = {{"a", rep.cond_a}, {"b", rep.cond_b}, {"c", cc}, {"d", d}};
  r.pass = rep.special();
  j["special"] = r.pass;
  j["pass"] = r.pass;
  if (!F.empty()) {
    r.rows.push_back({"condition", "a", "", verdict(rep.cond_a)});
    r.rows.push_back({"condition", "b", "", verdict(rep.cond_b)});
    r.rows.push_back({"condition", "c", "", verdict(rep.cond_c.empty())});
    r.rows.push_back({"condition", "d", to_string(rep.cond_d_max_defect), verdict(rep.cond_d_max_defect <= v.epsilon)});
    for (std::size_t a = 0; a < F.size(); ++a)
      for (std::size_t b = 0; b < F.size(); ++b)
        r.rows.push_back({"defect", std::to_string(F[a]), std::to_string(F[b]),
                          to_string(ratio(static_cast<std::int64_t>(rep.pair_disagreements[a * F.size() + b]),
                                          static_cast<std::int64_t>(std::max<std::size_t>(table.carrier_size(), 1))))});
  }
  return r;
}

// ---------------------------------------------------------------- nf

Report run_nf(const ExperimentConfig& c) {
  if (!c.nf) schema("/nf", "required");
  ProductInputs pin = make_product(c);
  const GraphProduct ctx(pin.graph, pin.groups);
  const GPElement g = ctx.normalize(c.nf->word);
  Report r;
  Json& j = r.json;
  j["command"] = "nf";
  j["version"] = kVersion;
  j["input"] = emit_syllables(c.nf->word);
  j["normal_form"] = emit_syllables(g.syllables());
  j["text"] = to_string(g);
  j["syllable_length"] = syllable_length(g);
  j["support"] = vertex_set_json(support(g));
  if (c.nf->k) {
    const KNormalForm nf = k_normal_form(g, *c.nf->k);
    Json blocks = Json::array();
    for (const auto& b : nf.blocks) blocks.push_back({{"x", emit_syllables(b.x.syllables())}, {"y", b.y}});
    j["k_normal_form"] = {{"k", nf.k}, {"blocks", blocks}};
  }
  j["pass"] = true;
  r.rows.push_back({"normal_form", to_string(ctx.normalize(c.nf->word)), "", std::to_string(syllable_length(g))});
  return r;
}

// ---------------------------------------------------------------- ballgroup

Report run_ballgroup(const ExperimentConfig& c) {
  const BallConfig b = c.ballgroup.value_or(BallConfig{});
  std::optional<std::uint64_t> seed = b.seed ? b.seed : c.seed;
  if (!seed) schema("/ballgroup/seed", "a seed is required (it fixes the completion of the ball action)");
  if (b.gens == 0 || b.radius == 0) schema("/ballgroup", "gens and radius must be positive");
  Report r;
  Json& j = r.json;
  j["command"] = "ballgroup";
  j["version"] = kVersion;
  j["gens"] = b.gens;
  j["radius"] = b.radius;
  j["seed"] = *seed;
  const std::size_t size = ball_size(b.gens, b.radius);
  if (size == SIZE_MAX)
    j["carrier_size"] = "overflow";
  else
    j["carrier_size"] = size;

  auto reduce_letters = [](const std::vector<Letter>& w) { return reduce(w); };
  std::uint64_t checked = 0, basepoint_violations = 0, identity_violations = 0;
  auto t0 = Clock::now();
  if (b.exhaustive) {
    const std::size_t budget = budget_from_env().value_or(10'000'000);
    if (size > budget)
      fail(ErrorCode::BudgetExceeded, "ball of " + std::to_string(size) + " words exceeds the budget " +
                                          std::to_string(budget) + " for an exhaustive check");
    const BallGroupRep V = build_ball_group(b.gens, b.radius, *seed, budget);
    const Point base = V.index_of(ReducedWord());
    std::vector<Letter> w;
    // depth-first over all words of length <= R, tracking the basepoint image
    std::vector<Point> images{base};
    std::uint64_t words_budget = budget * 10;
    auto visit = [&](auto&& self) -> void {
      ++checked;
      if (checked > words_budget)
        fail(ErrorCode::BudgetExceeded, "more than " + std::to_string(words_budget) + " words to check");
      const ReducedWord red = reduce_letters(w);
      const Point img = images.back();
      if (V.word_at(img) != red) ++basepoint_violations;
      if (red.empty() && !eval_word(V, w).is_identity()) ++identity_violations;
      if (!red.empty() && img == base) ++identity_violations;
      if (w.size() == b.radius) return;
      for (std::uint32_t code = 0; code < 2 * b.gens; ++code) {
        // eval_word(w g) = sigma[w] o sigma[g]: the basepoint first moves by g,
        // so images are recomputed from the right
        w.push_back(Letter{code});
        Point p = base;
        for (std::size_t i = w.size(); i-- > 0;) p = V.sigma(w[i])(p);
        images.push_back(p);
        self(self);
        images.pop_back();
        w.pop_back();
      }
    };
    visit(visit);
    j["mode"] = "exhaustive";
  } else {
    const BallAction act(b.gens, b.radius, *seed);
    Rng rng(derive_seed(*seed, 1));
    for (std::uint64_t t = 0; t < b.samples; ++t) {
      std::vector<Letter> w(1 + rng.below(b.radius));
      for (auto& x : w) x = Letter{static_cast<std::uint32_t>(rng.below(2 * b.gens))};
      ++checked;
      const ReducedWord red = reduce_letters(w);
      const ReducedWord img = act.apply_word(w, ReducedWord());
      if (img != red) ++basepoint_violations;
      if (!red.empty() && img.empty()) ++identity_violations;
    }
    j["mode"] = "sampled";
    j["sample_size"] = b.samples;
  }
  r.timings["check_ms"] = ms_since(t0);
  j["words_checked"] = checked;
  j["basepoint_violations"] = basepoint_violations;
  j["identity_violations"] = identity_violations;
  r.pass = basepoint_violations == 0 && identity_violations == 0;
  j["pass"] = r.pass;
  r.rows.push_back({"condition", "basepoint", std::to_string(checked), verdict(basepoint_violations == 0)});
  r.rows.push_back({"condition", "no_short_relators", std::to_string(checked), verdict(identity_violations == 0)});
  return r;
}

// ---------------------------------------------------------------- gog

GroupSpec make_gog_group(const GogGroupConfig& g, const std::string& ptr) {
  if (g.finite) {
    const VertexGroup vg = make_group(*g.finite, child(ptr, "finite"));
    return GroupSpec::from_finite(vg.finite_group(), g.prefix);
  }
  std::vector<Relation> rels;
  for (std::size_t i = 0; i < g.relations.size(); ++i) {
    const std::string p = child(child(ptr, "relations"), i);
    try {
      rels.push_back(Relation{parse_word(g.generators, g.relations[i].first),
                              parse_word(g.generators, g.relations[i].second)});
    } catch (const Error& e) {
      schema(p, e.what());
    }
  }
  try {
    return GroupSpec::presented(Presentation(g.generators, std::move(rels)));
  } catch (const Error& e) {
    schema(ptr, e.what());
  }
}

Json word_list(const Presentation& p, const std::vector<PWord>& ws) {
  Json j = Json::array();
  for (const auto& w : ws) j.push_back(format_word(p, w));
  return j;
}

Report run_gog(const ExperimentConfig& c) {
  if (!c.gog) schema("/gog", "required");
  const GogConfig& gc = *c.gog;
  Report r;
  Json& j = r.json;
  j["command"] = "gog";
  j["version"] = kVersion;
  if (!gc.vertices.empty()) {
    std::vector<GroupSpec> vertices;
    for (std::size_t v = 0; v < gc.vertices.size(); ++v)
      vertices.push_back(make_gog_group(gc.vertices[v], child("/gog/vertices", v)));
    std::vector<GoGEdge> edges;
    for (std::size_t e = 0; e < gc.edges.size(); ++e) {
      const std::string p = child("/gog/edges", e);
      const GogEdgeConfig& ec = gc.edges[e];
      GoGEdge edge;
      edge.v1 = ec.v1;
      edge.v2 = ec.v2;
      edge.group = make_gog_group(ec.group, child(p, "group"));
      edge.amenable = ec.amenable;
      auto images = [&](const std::vector<std::string>& ws, int v, const char* key) {
        std::vector<PWord> out;
        for (std::size_t i = 0; i < ws.size(); ++i) {
          try {
            out.push_back(parse_word(vertices[v].presentation.generators(), ws[i]));
          } catch (const Error& err) {
            schema(child(child(p, key), i), err.what());
          }
        }
        return out;
      };
      edge.theta1 = images(ec.theta1, ec.v1, "theta1");
      edge.theta2 = images(ec.theta2, ec.v2, "theta2");
      edges.push_back(std::move(edge));
    }
    const GraphOfGroups g(std::move(vertices), std::move(edges));
    const std::vector<std::size_t> tree = gc.tree ? *gc.tree : spanning_tree(g);
    const Presentation p = fundamental_presentation(g, tree);
    const HnnDecomposition d = hnn_amalgam_decomposition(g, tree);
    j["tree"] = tree;
    Json rels = Json::array();
    for (const auto& rel : p.relations()) rels.push_back(Json::array({format_word(p, rel.lhs), format_word(p, rel.rhs)}));
    j["presentation"] = {{"generators", p.generators()},
                         {"relations", rels},
                         {"generator_count", p.generators().size()},
                         {"relation_count", p.relations().size()},
                         {"text", to_string(p)}};
    Json base = Json::array();
    for (const auto& id : d.base) {
      Json pairs = Json::array();
      for (const auto& [a, b] : id.identified)
        pairs.push_back(Json::array({format_word(p, a), format_word(p, b)}));
      base.push_back({{"edge", id.edge}, {"v1", id.v1}, {"v2", id.v2}, {"identified", pairs}});
    }
    Json stable = Json::array();
    for (const auto& s : d.stable_letters)
      stable.push_back({{"edge", s.edge},
                        {"name", s.name},
                        {"v1", s.v1},
                        {"v2", s.v2},
                        {"into_v1", word_list(p, s.into_v1)},
                        {"into_v2", word_list(p, s.into_v2)}});
    j["decomposition"] = {{"base_vertices", d.base_vertices},
                          {"base", base},
                          {"stable_letters", stable},
                          {"text", to_string(g, d)}};
    Json edge_flags = Json::array();
    for (const auto& e : g.edges()) edge_flags.push_back({{"trusted", e.trusted}, {"amenable", e.amenable}});
    j["edges"] = edge_flags;
    r.rows.push_back({"presentation", std::to_string(p.generators().size()), std::to_string(p.relations().size()),
                      to_string(p)});
  }
  if (gc.chain) {
    const IntegerLineChain ch = integer_line_chain(gc.chain->H, gc.chain->K, gc.chain->lo, gc.chain->hi, gc.chain->L);
    Json es = Json::array();
    for (const auto& e : ch.edges)
      es.push_back({{"i", e.i}, {"left_image", e.left_image}, {"right_image", e.right_image}});
    j["chain"] = {{"vertices", ch.vertices}, {"edges", es}, {"amalgam", ch.amalgam}};
    r.rows.push_back({"chain", std::to_string(gc.chain->lo), std::to_string(gc.chain->hi), ch.amalgam});
  }
  j["pass"] = true;
  return r;
}

// ---------------------------------------------------------------- bench

Report run_bench(const ExperimentConfig& c) {
  Report first;
  Json runs = Json::array();
  bool deterministic = true;
  for (std::size_t i = 0; i < std::max<std::size_t>(c.repeat, 1); ++i) {
    Report r = run_build(c);
    runs.push_back(r.timings);
    if (i == 0)
      first = std::move(r);
    else
      deterministic = deterministic && r.json == first.json;
  }
  Report out;
  out.json = first.json;
  out.json["command"] = "bench";
  out.json["repeat"] = std::max<std::size_t>(c.repeat, 1);
  out.json["deterministic"] = deterministic;
  out.pass = first.pass && deterministic;
  out.json["pass"] = out.pass;
  out.timings["runs"] = runs;
  out.rows = std::move(first.rows);
  out.rows.push_back({"condition", "deterministic", "", verdict(deterministic)});
  return out;
}

}  // namespace

ExperimentConfig parse_config(const Json& j) {
  expect_object(j, "", {"graph", "vertex_groups", "actions", "N", "radius_override", "mode", "budget", "seed",
                        "threads", "symmetry", "repeat", "verify", "nf", "ballgroup", "gog"});
  ExperimentConfig c;
  if (j.contains("graph")) {
    const Json& g = j["graph"];
    expect_object(g, "/graph", {"n", "edges"});
    c.n = get_uint(require(g, "/graph", "n"), "/graph/n");
    if (*c.n > 32) schema("/graph/n", "at most 32 vertices are supported");
    if (g.contains("edges")) {
      const Json& es = expect_array(g["edges"], "/graph/edges");
      std::set<std::pair<int, int>> seen;
      for (std::size_t i = 0; i < es.size(); ++i) {
        const std::string p = child("/graph/edges", i);
        if (!es[i].is_array() || es[i].size() != 2) schema(p, "expected a [u, v] pair");
        const auto u = get_int(es[i][0], child(p, 0)), v = get_int(es[i][1], child(p, 1));
        if (u < 0 || v < 0 || static_cast<std::uint64_t>(u) >= *c.n || static_cast<std::uint64_t>(v) >= *c.n)
          schema(p, "vertex out of range");
        if (u == v)
          schema(p, "loop [" + std::to_string(u) + "," + std::to_string(v) + "]: a simple graph has no loops");
        if (!seen.insert(std::minmax(static_cast<int>(u), static_cast<int>(v))).second)
          schema(p, "duplicate edge: a simple graph has no multiple edges");
        c.edges.push_back({static_cast<int>(u), static_cast<int>(v)});
      }
    }
  }
  if (j.contains("vertex_groups")) {
    const Json& vs = expect_array(j["vertex_groups"], "/vertex_groups");
    for (std::size_t i = 0; i < vs.size(); ++i) c.vertex_groups.push_back(parse_group(vs[i], child("/vertex_groups", i)));
  }
  if (j.contains("actions")) {
    const Json& as = expect_array(j["actions"], "/actions");
    for (std::size_t i = 0; i < as.size(); ++i) c.actions.push_back(parse_action(as[i], child("/actions", i)));
  }
  if (j.contains("N")) c.N = get_uint(j["N"], "/N");
  if (j.contains("radius_override")) c.radius_override = get_positive(j["radius_override"], "/radius_override");
  if (j.contains("mode")) {
    c.mode = get_string(j["mode"], "/mode");
    if (c.mode != "exact" && c.mode != "general") schema("/mode", "expected exact or general");
  }
  if (j.contains("budget")) {
    const Json& b = j["budget"];
    expect_object(b, "/budget", {"max_F", "point_cap", "samples", "pair_cap", "sampled_pairs", "sampled_elements"});
    auto opt = [&](const char* key, std::optional<std::uint64_t>& dst) {
      if (b.contains(key)) dst = get_positive(b[key], child("/budget", key));
    };
    opt("max_F", c.budget.max_F);
    opt("point_cap", c.budget.point_cap);
    opt("samples", c.budget.samples);
    opt("pair_cap", c.budget.pair_cap);
    opt("sampled_pairs", c.budget.sampled_pairs);
    opt("sampled_elements", c.budget.sampled_elements);
  }
  if (j.contains("seed")) c.seed = get_uint(j["seed"], "/seed");
  if (j.contains("threads")) c.threads = static_cast<unsigned>(get_positive(j["threads"], "/threads"));
  if (j.contains("symmetry")) c.symmetry = get_bool(j["symmetry"], "/symmetry");
  if (j.contains("repeat")) c.repeat = get_positive(j["repeat"], "/repeat");

  if (j.contains("verify")) {
    const Json& v = j["verify"];
    expect_object(v, "/verify", {"group", "action", "table", "F", "epsilon"});
    VerifyConfig vc;
    vc.group = parse_group(require(v, "/verify", "group"), "/verify/group");
    if (v.contains("action")) vc.action = parse_action(v["action"], "/verify/action");
    if (v.contains("table")) {
      const Json& t = v["table"];
      expect_object(t, "/verify/table", {"carrier", "entries"});
      std::pair<std::size_t, std::vector<std::pair<Elt, std::vector<Point>>>> tab;
      tab.first = get_positive(require(t, "/verify/table", "carrier"), "/verify/table/carrier");
      const Json& es = expect_array(require(t, "/verify/table", "entries"), "/verify/table/entries");
      for (std::size_t i = 0; i < es.size(); ++i) {
        const std::string p = child("/verify/table/entries", i);
        expect_object(es[i], p, {"key", "image"});
        std::vector<Point> image;
        for (Elt x : get_int_list(require(es[i], p, "image"), child(p, "image"))) {
          if (x < 0) schema(child(p, "image"), "points are non-negative");
          image.push_back(static_cast<Point>(x));
        }
        if (image.size() != tab.first) schema(child(p, "image"), "length differs from the carrier");
        tab.second.push_back({get_int(require(es[i], p, "key"), child(p, "key")), std::move(image)});
      }
      vc.table = std::move(tab);
    }
    if (vc.action.has_value() == vc.table.has_value()) schema("/verify", "give exactly one of action and table");
    if (v.contains("F")) vc.F = get_int_list(v["F"], "/verify/F");
    if (v.contains("epsilon")) vc.epsilon = get_rational(v["epsilon"], "/verify/epsilon");
    c.verify = std::move(vc);
  }
  if (j.contains("nf")) {
    const Json& v = j["nf"];
    expect_object(v, "/nf", {"word", "k"});
    NfConfig nc;
    nc.word = parse_syllables(require(v, "/nf", "word"), "/nf/word");
    if (v.contains("k")) nc.k = static_cast<int>(get_int(v["k"], "/nf/k"));
    c.nf = std::move(nc);
  }
  if (j.contains("ballgroup")) {
    const Json& v = j["ballgroup"];
    expect_object(v, "/ballgroup", {"gens", "radius", "seed", "exhaustive", "samples"});
    BallConfig bc;
    if (v.contains("gens")) bc.gens = get_positive(v["gens"], "/ballgroup/gens");
    if (v.contains("radius")) bc.radius = get_positive(v["radius"], "/ballgroup/radius");
    if (v.contains("seed")) bc.seed = get_uint(v["seed"], "/ballgroup/seed");
    if (v.contains("exhaustive")) bc.exhaustive = get_bool(v["exhaustive"], "/ballgroup/exhaustive");
    if (v.contains("samples")) bc.samples = get_positive(v["samples"], "/ballgroup/samples");
    c.ballgroup = bc;
  }
  if (j.contains("gog")) c.gog = parse_gog(j["gog"], "/gog");
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::SchemaError, std::string("/: not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

Json emit_config(const ExperimentConfig& c) {
  Json j;
  if (c.n) {
    Json edges = Json::array();
    for (auto [u, v] : c.edges) edges.push_back(Json::array({u, v}));
    j["graph"] = {{"n", *c.n}, {"edges", edges}};
  }
  if (!c.vertex_groups.empty()) {
    Json vs = Json::array();
    for (const auto& g : c.vertex_groups) vs.push_back(emit_group(g));
    j["vertex_groups"] = vs;
  }
  if (!c.actions.empty()) {
    Json as = Json::array();
    for (const auto& a : c.actions) as.push_back(emit_action(a));
    j["actions"] = as;
  }
  j["N"] = c.N;
  if (c.radius_override) j["radius_override"] = *c.radius_override;
  j["mode"] = c.mode;
  Json b = Json::object();
  auto opt = [&](const char* key, const std::optional<std::uint64_t>& v) {
    if (v) b[key] = *v;
  };
  opt("max_F", c.budget.max_F);
  opt("point_cap", c.budget.point_cap);
  opt("samples", c.budget.samples);
  opt("pair_cap", c.budget.pair_cap);
  opt("sampled_pairs", c.budget.sampled_pairs);
  opt("sampled_elements", c.budget.sampled_elements);
  if (!b.empty()) j["budget"] = b;
  if (c.seed) j["seed"] = *c.seed;
  j["threads"] = c.threads;
  j["symmetry"] = c.symmetry;
  j["repeat"] = c.repeat;
  if (c.verify) {
    Json v;
    v["group"] = emit_group(c.verify->group);
    if (c.verify->action) v["action"] = emit_action(*c.verify->action);
    if (c.verify->table) {
      Json es = Json::array();
      for (const auto& [k, image] : c.verify->table->second) es.push_back({{"key", k}, {"image", image}});
      v["table"] = {{"carrier", c.verify->table->first}, {"entries", es}};
    }
    if (c.verify->F) v["F"] = *c.verify->F;
    v["epsilon"] = to_string(c.verify->epsilon);
    j["verify"] = v;
  }
  if (c.nf) {
    Json v;
    v["word"] = emit_syllables(c.nf->word);
    if (c.nf->k) v["k"] = *c.nf->k;
    j["nf"] = v;
  }
  if (c.ballgroup) {
    Json v;
    v["gens"] = c.ballgroup->gens;
    v["radius"] = c.ballgroup->radius;
    if (c.ballgroup->seed) v["seed"] = *c.ballgroup->seed;
    v["exhaustive"] = c.ballgroup->exhaustive;
    v["samples"] = c.ballgroup->samples;
    j["ballgroup"] = v;
  }
  if (c.gog) {
    Json v;
    Json vs = Json::array();
    for (const auto& g : c.gog->vertices) vs.push_back(emit_gog_group(g));
    v["vertices"] = vs;
    Json es = Json::array();
    for (const auto& e : c.gog->edges)
      es.push_back({{"v1", e.v1},
                    {"v2", e.v2},
                    {"group", emit_gog_group(e.group)},
                    {"theta1", e.theta1},
                    {"theta2", e.theta2},
                    {"amenable", e.amenable}});
    v["edges"] = es;
    if (c.gog->tree) v["tree"] = *c.gog->tree;
    if (c.gog->chain)
      v["chain"] = {{"H", c.gog->chain->H},
                    {"K", c.gog->chain->K},
                    {"L", c.gog->chain->L},
                    {"lo", c.gog->chain->lo},
                    {"hi", c.gog->chain->hi}};
    j["gog"] = v;
  }
  return j;
}

std::optional<std::uint64_t> budget_from_env() {
  const char* v = std::getenv("SOFICLAB_BUDGET");
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v, &end, 10);
  if (*end != '\0' || x == 0) fail(ErrorCode::SchemaError, "SOFICLAB_BUDGET: expected a positive integer");
  return static_cast<std::uint64_t>(x);
}

Report run(const std::string& command, const ExperimentConfig& config) {
  if (command == "build") return run_build(config);
  if (command == "verify") return run_verify(config);
  if (command == "nf") return run_nf(config);
  if (command == "ballgroup") return run_ballgroup(config);
  if (command == "gog") return run_gog(config);
  if (command == "bench") return run_bench(config);
  fail(ErrorCode::InvalidArgument, "unknown command " + command);
}

PWord parse_word(const std::vector<std::string>& generators, const std::string& text) {
  PWord w;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    if (token == "1") continue;
    std::string name = token;
    long long power = 1;
    if (auto caret = token.find('^'); caret != std::string::npos) {
      name = token.substr(0, caret);
      const std::string exp = token.substr(caret + 1);
      char* end = nullptr;
      power = std::strtoll(exp.c_str(), &end, 10);
      if (exp.empty() || *end != '\0') fail(ErrorCode::InvalidArgument, "bad exponent in \"" + token + "\"");
    }
    auto it = std::find(generators.begin(), generators.end(), name);
    if (it == generators.end()) fail(ErrorCode::InvalidArgument, "unknown generator \"" + name + "\"");
    const PLetter x{static_cast<std::size_t>(it - generators.begin()), power < 0};
    for (long long i = 0; i < std::llabs(power); ++i) w.push_back(x);
  }
  return w;
}

std::string report_json_text(const Report& r) {
  Json j = r.json;
  j["timings_ms"] = r.timings;
  return j.dump(2) + "\n";
}

std::string csv_text(const Report& r) {
  std::string out = "kind,a,b,value\n";
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  for (const auto& row : r.rows)
    out += field(row.kind) + "," + field(row.a) + "," + field(row.b) + "," + field(row.value) + "\n";
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  f << text;
  if (!f) fail(ErrorCode::IoError, "failed writing " + path);
}

void emit_csv(const Report& r, const std::string& path) { write_text(path, csv_text(r)); }

}  // namespace soficlab
