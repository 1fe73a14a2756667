#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "soficlab/errors.hpp"
#include "soficlab/harness.hpp"
#include "support/oracles.hpp"

using namespace soficlab;

namespace {

std::string schema_message(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) return e.what();
    return std::string("wrong code: ") + e.what();
  }
  return "no error";
}

const char* kFreeProduct = R"({
  "graph": {"n": 2, "edges": []},
  "vertex_groups": [{"kind": "cyclic", "order": 2}, {"kind": "cyclic", "order": 2}],
  "actions": [{"kind": "regular"}, {"kind": "regular"}],
  "N": 6, "seed": 11
})";

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("config round trip") {
  const char* text = R"({
    "graph": {"n": 3, "edges": [[0, 1], [2, 1]]},
    "vertex_groups": [{"kind": "cyclic", "order": 4}, {"kind": "symmetric", "degree": 3},
                      {"kind": "table", "table": [[0, 1], [1, 0]]}],
    "actions": [{"kind": "regular"},
                {"kind": "degraded", "base": {"kind": "regular"}, "delta": "1/10", "seed": 5},
                {"kind": "regular", "F": [0, 1]}],
    "N": 3, "radius_override": 40, "mode": "general",
    "budget": {"point_cap": 1000, "pair_cap": 50},
    "seed": 9, "threads": 2, "symmetry": false, "repeat": 2,
    "verify": {"group": {"kind": "integers"},
               "table": {"carrier": 2, "entries": [{"key": 0, "image": [0, 1]}, {"key": 1, "image": [1, 0]}]},
               "F": [0], "epsilon": "2/4"},
    "nf": {"word": [[0, 1], [2, 1]], "k": 1},
    "ballgroup": {"gens": 3, "radius": 5, "seed": 1, "exhaustive": true},
    "gog": {"vertices": [{"generators": ["a"]}, {"finite": {"kind": "cyclic", "order": 3}, "prefix": "c"}],
            "edges": [{"v1": 0, "v2": 1, "group": {"generators": ["x"], "relations": ["x^3"]},
                       "theta1": ["a"], "theta2": ["c1"], "amenable": true}],
            "tree": [0], "chain": {"lo": -1, "hi": 2}}
  })";
  const ExperimentConfig c = parse_config_text(text);
  CHECK(c.verify->epsilon == Rational(1, 2));
  CHECK(c.actions[1].delta == Rational(1, 10));
  const ExperimentConfig again = parse_config(emit_config(c));
  CHECK(again == c);
  CHECK(emit_config(again).dump() == emit_config(c).dump());

  const ExperimentConfig minimal = parse_config_text(kFreeProduct);
  CHECK(parse_config(emit_config(minimal)) == minimal);
}

TEST_CASE("schema errors carry a JSON pointer") {
  const std::string loop = schema_message(R"({"graph": {"n": 2, "edges": [[0, 0]]}})");
  CHECK(loop.find("/graph/edges/0") != std::string::npos);
  CHECK(loop.find("simple graph has no loops") != std::string::npos);

  CHECK(schema_message(R"({"graph": {"n": 2, "edges": [[0, 1], [1, 0]]}})").find("/graph/edges/1") !=
        std::string::npos);
  CHECK(schema_message(R"({"graph": {"n": 2, "edges": [[0, 2]]}})").find("/graph/edges/0") != std::string::npos);
  CHECK(schema_message(R"({"grpah": {}})").find("/grpah: unknown key") != std::string::npos);
  CHECK(schema_message(R"({"actions": [{"kind": "degraded", "base": {"kind": "regular"}, "delta": "1/2"}]})")
            .find("/actions/0/seed") != std::string::npos);
  CHECK(schema_message(R"({"actions": [{"kind": "degraded", "base": {"kind": "regular"}, "delta": "1", "seed": 1}]})")
            .find("/actions/0/delta") != std::string::npos);
  CHECK(schema_message(R"({"verify": {"group": {"kind": "cyclic", "order": 2}, "action": {"kind": "regular"}, "epsilon": "x/y"}})")
            .find("/verify/epsilon") != std::string::npos);
  CHECK(schema_message("{not json").find("not valid JSON") != std::string::npos);

  ExperimentConfig unseeded = parse_config_text(kFreeProduct);
  unseeded.seed.reset();
  try {
    run("build", unseeded);
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaError);
    CHECK(std::string(e.what()).find("/seed") != std::string::npos);
  }

  const ExperimentConfig not_a_group = parse_config_text(R"({
    "graph": {"n": 1}, "vertex_groups": [{"kind": "table", "table": [[0, 1], [0, 1]]}],
    "actions": [{"kind": "regular"}], "seed": 1})");
  CHECK(oracle::error_of([&] { run("build", not_a_group); }) == ErrorCode::SchemaError);
}

TEST_CASE("verify subcommand") {
  const Report r = run("verify", parse_config_text(
                                     R"({"verify": {"group": {"kind": "cyclic", "order": 3},
                                                    "action": {"kind": "regular"}}})"));
  CHECK(r.pass);
  CHECK(r.json["conditions"]["d"]["max_defect"] == "0/1");
  // header, four verdicts, 3 x 3 defect entries
  CHECK(count_lines(csv_text(r)) == 1 + 4 + 9);

  // Z/3 keys acting by a 4-cycle: phi(1)phi(1) and phi(2) disagree everywhere
  const Report bad = run("verify", parse_config_text(R"({"verify": {
      "group": {"kind": "cyclic", "order": 3},
      "table": {"carrier": 4, "entries": [{"key": 0, "image": [0, 1, 2, 3]},
                                          {"key": 1, "image": [1, 2, 3, 0]},
                                          {"key": 2, "image": [3, 0, 1, 2]}]}}})"));
  CHECK_FALSE(bad.pass);
  CHECK(bad.json["conditions"]["b"] == true);
  CHECK(bad.json["conditions"]["d"]["max_defect"] == "1/1");

  const Report empty = run("verify", parse_config_text(
                                         R"({"verify": {"group": {"kind": "cyclic", "order": 3},
                                                        "action": {"kind": "regular"}, "F": []}})"));
  CHECK(csv_text(empty) == "kind,a,b,value\n");
}

TEST_CASE("build report, csv rows and determinism") {
  const ExperimentConfig c = parse_config_text(kFreeProduct);
  const Report r = run("build", c);
  CHECK(r.pass);
  CHECK(r.json["F_size"] == 13);
  CHECK(r.json["conditions"]["d"]["max_defect"] == "0/1");
  CHECK(r.json["conditions"]["c"]["fixed_point_free"] == 12);
  CHECK(r.json["condition2"]["holds"] == true);
  const std::string csv = csv_text(r);
  CHECK(count_lines(csv) == 1 + 6 + 13 * 13);

  const Report again = run("build", c);
  CHECK(again.json == r.json);
  CHECK(csv_text(again) == csv);

  const auto dir = std::filesystem::temp_directory_path() / "soficlab_harness_test";
  std::filesystem::create_directories(dir);
  emit_csv(r, (dir / "a.csv").string());
  emit_csv(again, (dir / "b.csv").string());
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(oracle::error_of([&] { emit_csv(r, (dir / "missing" / "x.csv").string()); }) == ErrorCode::IoError);
  std::filesystem::remove_all(dir);

  ExperimentConfig bench = c;
  bench.repeat = 2;
  const Report b = run("bench", bench);
  CHECK(b.pass);
  CHECK(b.json["deterministic"] == true);
  CHECK(b.timings["runs"].size() == 2);
}

TEST_CASE("degraded build stays within the bound") {
  const Report r = run("build", parse_config_text(R"({
    "graph": {"n": 2, "edges": [[0, 1]]},
    "vertex_groups": [{"kind": "cyclic", "order": 6}, {"kind": "cyclic", "order": 6}],
    "actions": [{"kind": "degraded", "base": {"kind": "regular"}, "delta": "1/3", "seed": 3},
                {"kind": "regular"}],
    "N": 2, "mode": "general", "seed": 4})"));
  CHECK(r.json["inputs"][0]["defect"] != "0/1");
  CHECK(r.json["bound"]["within_bound"] == true);
  CHECK(r.json["bound"]["within_per_coordinate_bound"] == true);
}

TEST_CASE("budget environment override") {
  ::setenv("SOFICLAB_BUDGET", "123", 1);
  CHECK(budget_from_env() == 123u);
  ::setenv("SOFICLAB_BUDGET", "12x", 1);
  CHECK(oracle::error_of([] { budget_from_env(); }) == ErrorCode::SchemaError);
  ::unsetenv("SOFICLAB_BUDGET");
  CHECK_FALSE(budget_from_env().has_value());
}

TEST_CASE("nf subcommand") {
  const Report r = run("nf", parse_config_text(R"({
    "graph": {"n": 3, "edges": [[0, 1], [1, 2]]},
    "vertex_groups": [{"kind": "cyclic", "order": 2}, {"kind": "cyclic", "order": 2}, {"kind": "cyclic", "order": 2}],
    "nf": {"word": [[2, 1], [0, 1], [1, 1], [1, 1]]}})"));
  // the two trailing syllables at vertex 1 cancel; 2 and 0 do not commute
  CHECK(r.json["normal_form"] == Json::parse("[[2, 1], [0, 1]]"));
  CHECK(r.json["syllable_length"] == 2);
  CHECK(r.json["support"] == Json::parse("[0, 2]"));
}

TEST_CASE("ballgroup subcommand") {
  ExperimentConfig c;
  c.ballgroup = BallConfig{};
  CHECK(oracle::error_of([&] { run("ballgroup", c); }) == ErrorCode::SchemaError);
  c.ballgroup->seed = 2;
  c.ballgroup->exhaustive = true;
  const Report r = run("ballgroup", c);
  CHECK(r.pass);
  CHECK(r.json["carrier_size"] == 161);
  CHECK(r.json["words_checked"] == 341);
  c.ballgroup->exhaustive = false;
  c.ballgroup->samples = 500;
  CHECK(run("ballgroup", c).json["sample_size"] == 500);
}

TEST_CASE("gog subcommand and word syntax") {
  const std::vector<std::string> gens{"a", "b"};
  CHECK(parse_word(gens, "a^2 b^-1 1") ==
        PWord{PLetter{0, false}, PLetter{0, false}, PLetter{1, true}});
  CHECK(parse_word(gens, "").empty());
  CHECK(oracle::error_of([&] { parse_word(gens, "c"); }) == ErrorCode::InvalidArgument);
  CHECK(oracle::error_of([&] { parse_word(gens, "a^x"); }) == ErrorCode::InvalidArgument);

  const Report amalgam = run("gog", parse_config_text(R"({"gog": {
      "vertices": [{"generators": ["a"]}, {"generators": ["b"]}],
      "edges": [{"v1": 0, "v2": 1, "group": {"generators": ["x"]}, "theta1": ["a^2"], "theta2": ["b^3"]}]}})"));
  CHECK(amalgam.json["presentation"]["text"] == "⟨a,b ∣ a²=b³⟩");
  CHECK(amalgam.json["edges"][0]["trusted"] == true);

  const Report hnn = run("gog", parse_config_text(R"({"gog": {
      "vertices": [{"generators": ["a"]}],
      "edges": [{"v1": 0, "v2": 0, "group": {"generators": ["x"]}, "theta1": ["a^2"], "theta2": ["a^3"]}]}})"));
  CHECK(hnn.json["presentation"]["text"] == "⟨a,t ∣ t⁻¹a²t=a³⟩");
  CHECK(hnn.json["decomposition"]["stable_letters"].size() == 1);

  const Report chain = run("gog", parse_config_text(R"({"gog": {"chain": {"lo": 0, "hi": 2}}})"));
  CHECK(chain.json["chain"]["amalgam"] == "H_0 *_{L_0=K_1} H_1 *_{L_1=K_2} H_2");

  CHECK(schema_message(R"({"gog": {"vertices": [{"generators": ["a"]}],
      "edges": [{"v1": 0, "v2": 1, "group": {"generators": []}, "theta1": [], "theta2": []}]}})")
            .find("/gog/edges/0") != std::string::npos);
  CHECK(oracle::error_of([] {
          run("gog", parse_config_text(R"({"gog": {"vertices": [{"generators": ["a"]}],
              "edges": [{"v1": 0, "v2": 0, "group": {"generators": ["x"]}, "theta1": ["z"], "theta2": ["a"]}]}})"));
        }) == ErrorCode::SchemaError);
}
