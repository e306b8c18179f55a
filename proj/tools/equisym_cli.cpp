#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "equisym/experiments.hpp"

namespace {

int run_command(const std::string& name, const std::string& config_path, std::optional<std::uint64_t> seed,
                std::optional<std::string> out, std::optional<int> n, std::optional<int> d) {
  nlohmann::json file = nlohmann::json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw equisym::DomainError("cannot open config '" + config_path + "'");
    file = nlohmann::json::parse(in);
  }
  equisym::ExperimentConfig config = equisym::ExperimentConfig::from_json(file);
  if (!name.empty()) config.experiment = name;
  if (seed) config.seed = seed;
  if (out) config.out = *out;
  if (n) config.n = n;
  if (d) config.d = d;

  const equisym::Report report = equisym::run(config);
  equisym::report_emit(report, config.out);
  std::cout << report.summary().dump(2) << "\n";
  for (const auto& f : report.failures) std::cerr << "FAIL: " << f << "\n";
  return report.passed ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetric and anti-symmetric function experiments"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List the available experiments");
  auto* run = app.add_subcommand("run", "Run one experiment and write <out>/<experiment>.{csv,json}");
  std::string name, config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> n, d;
  run->add_option("--experiment", name, "Experiment name (overrides the config file)");
  run->add_option("--config", config_path, "Flat JSON config file")->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "RNG seed (required for training experiments)");
  run->add_option("--out", out, "Output directory");
  run->add_option("--n", n, "Number of particles");
  run->add_option("--d", d, "Particle dimension");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    for (const auto& e : equisym::experiments())
      std::printf("%-18s %s%s\n", e.name.c_str(), e.description.c_str(), e.needs_seed ? " (needs --seed)" : "");
    return 0;
  }
  try {
    if (name.empty() && config_path.empty()) throw equisym::DomainError("run: give --experiment or --config");
    return run_command(name, config_path, seed, out, n, d);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
