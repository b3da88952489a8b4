#pragma once

// Products of sections over interval partitions, y_t = y_{t_n} (.) ... (.) y_{t_1},
// evaluated through inner products only:
//   <x_s, b y_t> for partitions s, t of the same length.
// Inner products of tensor products compose innermost-first in time order,
//   <x (.) y, b x' (.) y'> = <y, <x, b x'> y'>,
// so the latest piece of time is applied to b first.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "unitlab/kernels.hpp"
#include "unitlab/partition.hpp"
#include "unitlab/units.hpp"

namespace unitlab {

/// Evaluates pairings against a fixed CPD-semigroup, caching e^{wQ} per
/// (label pair, width). Not thread-safe; use one engine per thread.
class PairingEngine {
 public:
  explicit PairingEngine(const CpdSemigroup& system);

  /// b -> <x_s, b y_t>.
  Superoperator pairing(const UnitExpression& x, const Partition& xs, const UnitExpression& y,
                        const Partition& ys);

  const CpdSemigroup& system() const { return *system_; }

 private:
  const Superoperator& unit_map(std::size_t row, std::size_t col, double width);

  const CpdSemigroup* system_;
  std::map<std::tuple<std::size_t, std::size_t, double>, Superoperator> cache_;
};

Superoperator eval_pairing(const UnitExpression& x, const Partition& xs, const UnitExpression& y,
                           const Partition& ys, const CpdSemigroup& system);

/// Sequence of partitions of [0, T]. "dyadic:MIN:MAX" is the uniform
/// partitions with 2^MIN ... 2^MAX parts; "random:COUNT" is a seeded
/// refinement chain of random partitions (member k joins 2^(k+3) random cuts
/// into member k-1).
class Schedule {
 public:
  enum class Kind { dyadic, random };

  static Schedule dyadic(int min_exponent, int max_exponent);
  static Schedule random(std::size_t count, std::uint64_t seed);
  /// Throws ParseError.
  static Schedule parse(std::string_view text);

  Kind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  Schedule with_seed(std::uint64_t seed) const;
  std::vector<Partition> materialize(double horizon) const;
  std::string to_string() const;

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  Kind kind_ = Kind::dyadic;
  int min_exponent_ = 3;
  int max_exponent_ = 12;
  std::size_t count_ = 0;
  std::uint64_t seed_ = 0;
};

enum class Verdict { norm_convergent, weak_only, divergent };

std::string_view to_string(Verdict verdict);
std::optional<Verdict> parse_verdict(std::string_view text);

struct VerdictThresholds {
  double norm_tol = 1e-6;  // limit criterion/gram defect for norm convergence
  double min_rate = 0.5;   // fitted log-log rate of the criterion defect
  double plateau = 1e-3;   // limit defect that counts as "does not vanish"

  friend bool operator==(const VerdictThresholds&, const VerdictThresholds&) = default;
};

struct ReportRow {
  std::size_t parts = 0;
  double mesh = 0.0;
  double gram_defect = 0.0;       // ||<y_t,.y_t> - <c,.c>||
  double criterion_defect = 0.0;  // ||<c,.y_t> - <c,.c>||
  double norm_defect = 0.0;       // largest eigenvalue of <y_t - c, y_t - c>
  double norm_defect_min = 0.0;   // smallest eigenvalue (>= -1e-9 up to roundoff)
  double ambient_defect = 0.0;    // max_xi ||<xi,.y_t> - <xi,.c>||
  double identity_residual = 0.0; // expansion of <y-c, y-c> vs 2 Re of the criterion
  double gram_norm = 0.0;         // ||<y_t,.y_t>||
  double increment = 0.0;         // ||<c,.y_t> - previous member||
};

struct ConvergenceReport {
  double horizon = 0.0;
  std::string expression;
  std::string candidate;
  std::string schedule;
  std::uint64_t seed = 0;
  VerdictThresholds thresholds;
  std::vector<ReportRow> rows;

  double criterion_rate = 0.0;  // NaN when the defects are at roundoff level
  double gram_rate = 0.0;
  double norm_rate = 0.0;
  double criterion_limit = 0.0;
  double gram_limit = 0.0;
  double norm_limit = 0.0;
  double ambient_limit = 0.0;
  std::string limit_method;  // "richardson" or "finest"
  double scale = 1.0;        // max(1, ||<c,.c>||); norm_tol is relative to it

  bool exact = false;              // every defect at roundoff level
  bool sequence_suffices = false;  // criterion defect is O(mesh)
  bool cauchy = false;
  double max_identity_residual = 0.0;
  double min_norm_defect = 0.0;
  Verdict verdict = Verdict::divergent;
  std::vector<std::string> notes;
};

/// Fills rates, limits and the verdict from report.rows.
void classify(ConvergenceReport& report);

struct ConvergenceOptions {
  VerdictThresholds thresholds;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::string expression_name = "y";
  /// Units whose pairings must converge for a weak limit; empty = all
  /// labels of the system except the candidate.
  std::vector<std::string> ambient;
};

/// Core driver: y against an arbitrary candidate unit of the system.
ConvergenceReport assess_candidate(const UnitExpression& y, const CpdSemigroup& system,
                                   const std::string& candidate, double horizon,
                                   const std::vector<Partition>& schedule,
                                   const ConvergenceOptions& options = {});

/// Builds the zeta extension of the generator and tests y against zeta
/// (ambient units: the original labels).
ConvergenceReport convergence_verdict(const UnitExpression& y, const OperatorKernel& generator,
                                      double horizon, const Schedule& schedule,
                                      const ConvergenceOptions& options = {},
                                      const ExtensionOptions& extension = {});

ConvergenceReport convergence_verdict(const UnitExpression& y, const ExtendedGenerator& extension,
                                      double horizon, const std::vector<Partition>& schedule,
                                      const ConvergenceOptions& options = {});

struct BoundRow {
  double horizon = 0.0;
  std::size_t parts = 0;
  double mesh = 0.0;
  double gram_defect = 0.0;
  double bound = 0.0;       // ||t|| * t * e^{t max(||K||, M)} * M'
  double gram_norm = 0.0;
  double growth_bound = 0.0;  // e^{t max(||K||, M)}
  bool holds = false;
  bool bounded = false;
};

struct BoundReport {
  double k_norm = 0.0;
  double m_estimate = 0.0;
  std::vector<std::pair<double, double>> m_samples;  // (s, ||Y_s - id - sK|| / s^2)
  bool m_stable = false;  // remainder really is O(s^2) over the sampled range
  std::vector<BoundRow> rows;
  bool all_hold = false;
  bool all_bounded = false;
};

/// Checks the O(||t||) estimate for ||<y_t,.y_t> - <c_t,.c_t>|| and the
/// eventual boundedness of the net at horizons T/4, T/2, 3T/4, T.
BoundReport gram_bound_check(const UnitExpression& y, const CpdSemigroup& system,
                               const std::string& candidate, double horizon,
                               const Schedule& schedule);

}  // namespace unitlab
