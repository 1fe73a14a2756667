#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "soficlab/bass_serre.hpp"
#include "soficlab/graph_products.hpp"
#include "soficlab/rational.hpp"
#include "soficlab/sofic_builder.hpp"

namespace soficlab {

inline constexpr const char* kVersion = "1.0.0";

using Json = nlohmann::ordered_json;

struct GroupConfig {
  std::string kind;  // cyclic | symmetric | table | integers
  std::size_t order = 0;  // cyclic order or symmetric degree
  std::vector<std::vector<std::int64_t>> table;

  friend bool operator==(const GroupConfig&, const GroupConfig&) = default;
};

struct ActionConfig {
  std::string kind;  // regular | shift | degraded
  std::size_t carrier = 0;  // shift
  Elt range = 0;            // shift: F_i = -range..range
  std::vector<ActionConfig> base;  // degraded: exactly one entry
  Rational delta = 0;
  std::uint64_t seed = 0;
  std::optional<std::vector<Elt>> F;  // overrides the default F_i

  friend bool operator==(const ActionConfig&, const ActionConfig&) = default;
};

struct BudgetConfig {
  std::optional<std::uint64_t> max_F, point_cap, samples, pair_cap, sampled_pairs, sampled_elements;

  friend bool operator==(const BudgetConfig&, const BudgetConfig&) = default;
};

struct VerifyConfig {
  GroupConfig group;
  std::optional<ActionConfig> action;
  // explicit table: carrier plus (key, image) entries
  std::optional<std::pair<std::size_t, std::vector<std::pair<Elt, std::vector<Point>>>>> table;
  std::optional<std::vector<Elt>> F;
  Rational epsilon = 0;

  friend bool operator==(const VerifyConfig&, const VerifyConfig&) = default;
};

struct NfConfig {
  std::vector<Syllable> word;
  std::optional<int> k;

  friend bool operator==(const NfConfig&, const NfConfig&) = default;
};

struct BallConfig {
  std::size_t gens = 2;
  std::size_t radius = 4;
  std::optional<std::uint64_t> seed;
  bool exhaustive = false;
  std::uint64_t samples = 100'000;

  friend bool operator==(const BallConfig&, const BallConfig&) = default;
};

// A group in a graph of groups: generators with relations, or a finite group
// whose presentation is derived with the given generator prefix.
struct GogGroupConfig {
  std::vector<std::string> generators;
  std::vector<std::pair<std::string, std::string>> relations;  // lhs, rhs words
  std::optional<GroupConfig> finite;
  std::string prefix = "g";

  friend bool operator==(const GogGroupConfig&, const GogGroupConfig&) = default;
};

struct GogEdgeConfig {
  int v1 = 0, v2 = 0;
  GogGroupConfig group;
  std::vector<std::string> theta1, theta2;
  bool amenable = false;

  friend bool operator==(const GogEdgeConfig&, const GogEdgeConfig&) = default;
};

struct ChainConfig {
  std::string H = "H", K = "K", L = "L";
  std::int64_t lo = 0, hi = 0;

  friend bool operator==(const ChainConfig&, const ChainConfig&) = default;
};

struct GogConfig {
  std::vector<GogGroupConfig> vertices;
  std::vector<GogEdgeConfig> edges;
  std::optional<std::vector<std::size_t>> tree;
  std::optional<ChainConfig> chain;

  friend bool operator==(const GogConfig&, const GogConfig&) = default;
};

struct ExperimentConfig {
  // graph product runs (build, bench, nf)
  std::optional<std::size_t> n;
  std::vector<std::pair<int, int>> edges;
  std::vector<GroupConfig> vertex_groups;
  std::vector<ActionConfig> actions;
  std::size_t N = 2;
  std::optional<std::size_t> radius_override;
  std::string mode = "exact";
  BudgetConfig budget;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool symmetry = true;
  std::size_t repeat = 3;  // bench

  std::optional<VerifyConfig> verify;
  std::optional<NfConfig> nf;
  std::optional<BallConfig> ballgroup;
  std::optional<GogConfig> gog;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Throws SchemaError whose message starts with the JSON pointer of the
// offending value.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig parse_config_text(const std::string& text);
Json emit_config(const ExperimentConfig& c);

struct CsvRow {
  std::string kind, a, b, value;
};

struct Report {
  Json json;  // everything except timings is deterministic
  Json timings = Json::object();
  bool pass = true;
  std::vector<CsvRow> rows;
};

// Environment override for the enumeration caps (points and pairs).
std::optional<std::uint64_t> budget_from_env();

Report run(const std::string& command, const ExperimentConfig& config);

// Word syntax for presentations: whitespace-separated tokens "a", "a^3",
// "a^-1"; "" or "1" is the empty word.
PWord parse_word(const std::vector<std::string>& generators, const std::string& text);

std::string report_json_text(const Report& r);
std::string csv_text(const Report& r);
void write_text(const std::string& path, const std::string& text);
void emit_csv(const Report& r, const std::string& path);

}  // namespace soficlab
