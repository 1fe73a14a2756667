#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "soficlab/errors.hpp"
#include "soficlab/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) soficlab::fail(soficlab::ErrorCode::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite permutation approximations of graph products, with a Bass-Serre toolkit"};
  app.set_version_flag("--version", std::string(soficlab::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_path, format = "json";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "Experiment config (JSON)");
  app.add_option("--out", out_path, "Write the report here instead of stdout");
  app.add_option("--seed", seed, "Seed; overrides the config");
  app.add_option("--threads", threads, "Worker threads for measurement")->check(CLI::PositiveNumber);
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));

  for (const char* name : {"verify", "build", "nf", "gog", "bench"}) app.add_subcommand(name);
  app.get_subcommand("verify")->description("Check a quasi-action table against the special conditions");
  app.get_subcommand("build")->description("Build the graph product quasi-action and measure it");
  app.get_subcommand("nf")->description("Canonical form of a graph product word");
  app.get_subcommand("gog")->description("Presentation and decomposition of a graph of groups");
  app.get_subcommand("bench")->description("Repeat a build, timing it and checking determinism");

  auto* ball = app.add_subcommand("ballgroup", "Relator-freeness of the ball action of a free group");
  std::optional<std::size_t> gens, radius;
  std::optional<std::uint64_t> samples;
  bool exhaustive = false;
  ball->add_option("--gens", gens, "Free generators s")->check(CLI::PositiveNumber);
  ball->add_option("--radius", radius, "Ball radius R")->check(CLI::PositiveNumber);
  ball->add_option("--samples", samples, "Sampled words when not exhaustive")->check(CLI::PositiveNumber);
  ball->add_flag("--exhaustive", exhaustive, "Check every word of length <= R");
  // the subcommand accepts its own --seed too
  ball->add_option("--seed", seed, "Seed fixing the completion of the action");

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    soficlab::ExperimentConfig config;
    if (!config_path.empty())
      config = soficlab::parse_config_text(read_file(config_path));
    else if (command != "ballgroup")
      soficlab::fail(soficlab::ErrorCode::SchemaError, "/: --config is required for " + command);
    if (seed) config.seed = seed;
    if (threads) config.threads = *threads;
    if (command == "ballgroup") {
      soficlab::BallConfig b = config.ballgroup.value_or(soficlab::BallConfig{});
      if (gens) b.gens = *gens;
      if (radius) b.radius = *radius;
      if (samples) b.samples = *samples;
      if (exhaustive) b.exhaustive = true;
      if (seed) b.seed = seed;
      config.ballgroup = b;
    }

    const soficlab::Report report = soficlab::run(command, config);
    const std::string text = format == "csv" ? soficlab::csv_text(report) : soficlab::report_json_text(report);
    if (out_path.empty())
      std::cout << text;
    else
      soficlab::write_text(out_path, text);
    return report.pass ? 0 : 1;
  } catch (const soficlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
