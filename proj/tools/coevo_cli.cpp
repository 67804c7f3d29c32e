// coevo: run, sweep and verify the opinion-action coevolution model.
//
// Exit codes: 0 success, 1 configuration or I/O error, 2 invariant violation (verify).

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "coevo/coevo.hpp"

namespace {

template <typename Parse>
auto load(const std::string& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw coevo::ConfigError(0, "cannot open config file " + path);
  try {
    return parse(in);
  } catch (const coevo::ConfigError& e) {
    throw coevo::ConfigError(0, path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opinion-action coevolution simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = "out";
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());

  auto* run = app.add_subcommand("run", "Simulate one configured instance");
  run->add_option("--config", config, "Config file")->required();
  run->add_option("--out", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Run an (epsilon, phi, seed) grid and write phase_map.csv");
  sweep->add_option("--config", config, "Config file")->required();
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Check the matrix and structure invariants on one instance");
  verify->add_option("--config", config, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      const auto cfg = load(config, [](std::istream& in) { return coevo::parse_run_config(in); });
      const coevo::RunResult result = coevo::execute(cfg);
      const auto dir = coevo::write_run_outputs(cfg, result, out_dir);
      std::cout << "regime " << coevo::to_string(result.report.regime) << "\n";
      for (const auto& d : result.report.diagnostics) std::cerr << "warning: " << d << "\n";
      std::cout << "wrote " << dir.string() << "\n";
      return 0;
    }
    if (*sweep) {
      const auto cfg = load(config, [](std::istream& in) { return coevo::parse_sweep_config(in); });
      const auto path = coevo::sweep_command(cfg, out_dir, jobs);
      std::cout << "wrote " << path.string() << "\n";
      return 0;
    }
    const auto cfg = load(config, [](std::istream& in) { return coevo::parse_run_config(in); });
    bool all = true;
    for (const auto& line : coevo::verify_command(cfg)) {
      std::cout << (line.pass ? "PASS " : "FAIL ") << line.name << ": " << line.detail << "\n";
      all = all && line.pass;
    }
    return all ? 0 : 2;
  } catch (const coevo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
