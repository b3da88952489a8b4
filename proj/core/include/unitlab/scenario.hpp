#pragma once

// Scenario files: line-oriented sections of `key = value` pairs, '#' starts
// a comment.
//
//   [system]       dim, labels (comma separated), horizon, schedule, seed,
//                  threads, zeta, fock_crosscheck (true/false)
//   [matrices]     NAME = [[a, b], [c, d]]      entries are complex literals (1-0.5i)
//   [generator]    kind = ce | kernel | covariance
//                    ce:         eta.LABEL = M1, M2, ...   beta.LABEL = M
//                                Q^{s,s'}(b) = sum_r eta_{s,r}^* b eta_{s',r} + beta_s^* b + b beta_s'
//                    kernel:     file = path.json (relative to the scenario file)
//                    covariance: gamma = [[...]]   (d = 1)
//   [expressions]  NAME = unit expression (see expression_parser.hpp)
//   [expect]       NAME = verdict              (against the adjoined unit zeta)
//                  NAME vs LABEL = verdict     (against a unit of the system)
//   [thresholds]   norm_tol, min_rate, plateau

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unitlab/expression_parser.hpp"
#include "unitlab/kernels.hpp"
#include "unitlab/trotter.hpp"

namespace unitlab {

struct NamedMatrix {
  std::string name;
  Matrix value;
};

struct GeneratorSpec {
  enum class Kind { ce, kernel, covariance };
  Kind kind = Kind::ce;
  std::vector<std::pair<std::string, std::vector<std::string>>> eta;  // label -> matrix names
  std::vector<std::pair<std::string, std::string>> beta;              // label -> matrix name
  std::string kernel_file;
  Matrix gamma;
};

struct NamedExpression {
  std::string name;
  std::string source;
  std::size_t line = 0;
  std::size_t column = 0;
};

struct Expectation {
  std::string expression;
  std::string candidate;  // empty: the adjoined unit
  Verdict verdict = Verdict::norm_convergent;

  friend bool operator==(const Expectation&, const Expectation&) = default;
};

struct Scenario {
  std::string name;
  std::filesystem::path base_dir;  // resolves kernel files; not serialized
  int dim = 1;
  std::vector<std::string> labels;
  double horizon = 1.0;
  Schedule schedule = Schedule::dyadic(3, 12);
  std::uint64_t seed = 20051001;
  unsigned threads = 1;
  std::string zeta_label = "zeta";
  bool fock_crosscheck = false;
  std::vector<NamedMatrix> matrices;
  GeneratorSpec generator;
  std::vector<NamedExpression> expressions;
  std::vector<Expectation> expectations;
  VerdictThresholds thresholds;

  ExpressionContext context() const;
  OperatorKernel build_generator() const;
  UnitExpression expression(std::string_view name) const;
};

/// Semantic equality: same values everywhere except base_dir and source positions.
bool operator==(const Scenario& a, const Scenario& b);

/// Throws ParseError with line:column.
Scenario parse_scenario(std::string_view text, std::string name = "scenario");
Scenario read_scenario_file(const std::filesystem::path& path);
std::string serialize_scenario(const Scenario& scenario);

}  // namespace unitlab
