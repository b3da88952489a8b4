#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "unitlab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"unitlab: units of CPD-semigroups, Trotter products and their limits"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string schedule;
  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("file", scenario_path, "Scenario file")->required();
  run->add_option("--out", out_dir, std::string("Output directory (default: $") + unitlab::kOutDirEnv +
                                        " or ./unitlab-out)");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--threads", threads, "Worker threads for schedule evaluation")
      ->check(CLI::PositiveNumber);
  run->add_option("--schedule", schedule, "dyadic:MIN:MAX or random:COUNT");

  std::string kernel_path;
  auto* validate = app.add_subcommand("validate", "Check a kernel JSON file");
  validate->add_option("kernel", kernel_path, "Kernel JSON file")->required();

  auto* version = app.add_subcommand("version", "Print the version");

  CLI11_PARSE(app, argc, argv);

  if (version->parsed()) {
    std::cout << "unitlab " << UNITLAB_VERSION << "\n";
    return 0;
  }
  if (validate->parsed()) return unitlab::validate_file(kernel_path, std::cout);

  unitlab::RunOptions options;
  if (!out_dir.empty()) options.out_dir = out_dir;
  options.seed = seed;
  options.threads = threads;
  if (!schedule.empty()) {
    try {
      options.schedule = unitlab::Schedule::parse(schedule);
    } catch (const unitlab::ParseError& e) {
      std::cerr << "error: --schedule: " << e.what() << "\n";
      return unitlab::kExitInput;
    }
  }
  const auto result = unitlab::run_scenario_file(scenario_path, options, std::cout);
  if (!result.failures.empty()) {
    std::cerr << result.failures.size() << " problem(s):\n";
    for (const auto& f : result.failures) std::cerr << "  " << f << "\n";
  }
  return result.exit_code;
}
