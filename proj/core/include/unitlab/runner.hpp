#pragma once

// Batch execution of scenarios and kernel validation. Output layout, under
// OUT/<scenario name>/:
//   gate.json                 conditional-CPD report of the generator
//   NAME.csv, NAME.json       NAME against the adjoined unit
//   NAME_extension.json       the extended generator kernel
//   NAME_vs_LABEL.csv/.json   NAME against a unit of the system
//   fock_NAME_vs_LABEL.csv    closed-form Fock values (fock_crosscheck)

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "unitlab/scenario.hpp"

namespace unitlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitGate = 3;
inline constexpr int kExitExtension = 4;

inline constexpr const char* kOutDirEnv = "UNITLAB_OUT_DIR";

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // default: $UNITLAB_OUT_DIR, then ./unitlab-out
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<Schedule> schedule;
};

struct RunOutcome {
  std::string expression;
  std::string candidate;
  ConvergenceReport report;
  std::optional<Verdict> expected;
  bool matched = true;
};

struct RunResult {
  int exit_code = kExitOk;
  std::filesystem::path out_dir;
  ConditionalReport gate;
  std::vector<RunOutcome> outcomes;
  std::vector<std::string> failures;
  double fock_discrepancy = 0.0;
};

std::filesystem::path default_out_dir();

/// Never throws for scenario-level problems; they become exit codes and
/// messages on `log`.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options, std::ostream& log);
RunResult run_scenario_file(const std::filesystem::path& path, const RunOptions& options,
                            std::ostream& log);

struct ValidationResult {
  double hermitian_defect = 0.0;
  bool hermitian = false;
  CpdVerdict cpd;
  std::optional<ConditionalReport> conditional;  // skipped when not hermitian
  std::size_t kolmogorov_rank = 0;               // when CPD

  bool generator_ok() const { return hermitian && conditional && conditional->verdict; }
};

ValidationResult validate_kernel(const OperatorKernel& kernel, std::uint64_t seed = 20051001);
std::string format_validation(const OperatorKernel& kernel, const ValidationResult& result);
std::string format_witness(const Witness& witness, const std::vector<std::string>& labels);

/// Exit 0 when the kernel is a valid generator, 1 when a check fails, 2 on
/// malformed input.
int validate_file(const std::filesystem::path& path, std::ostream& out);

}  // namespace unitlab
