#include "unitlab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include "unitlab/fock.hpp"
#include "unitlab/kernel_json.hpp"
#include "unitlab/report_io.hpp"

namespace unitlab {

namespace {

std::string short_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string describe(const ConvergenceReport& r) {
  return std::string(to_string(r.verdict)) + " (criterion " + short_g(r.criterion_limit) + ", gram " +
         short_g(r.gram_limit) + ", norm " + short_g(r.norm_limit) + ", ambient " +
         short_g(r.ambient_limit) + ", rate " + short_g(r.criterion_rate) + ", " + r.limit_method + ")";
}

// y on a partition as a single exponential vector; only for one-term d = 1
// expressions over realized units.
std::optional<ExponentialVector> fock_section(const UnitExpression& y, const OperatorKernel& q,
                                              const std::vector<FockUnit>& units,
                                              const Partition& part) {
  if (y.dim() != 1 || y.terms().size() != 1) return std::nullopt;
  const Term& term = y.terms().front();
  const int k = static_cast<int>(units.front().c.size());
  ExponentialVector out{1.0, StepFunction(k)};
  const auto& parts = part.parts();
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    const double p = *it;
    ExponentialVector slot{term.left_factor(p)(0, 0) * term.right_factor(p)(0, 0), StepFunction(k)};
    // Segments run latest first; build from the earliest.
    for (auto s = term.segments.rbegin(); s != term.segments.rend(); ++s)
      slot = concat(slot, units[q.index_of(s->label)].at(s->fraction * p));
    out = concat(out, slot);
  }
  return out;
}

struct FockComparison {
  std::string csv;
  double discrepancy = 0.0;
};

FockComparison fock_compare(const UnitExpression& y, const OperatorKernel& q,
                            const std::vector<FockUnit>& units, const std::string& candidate,
                            double horizon, const std::vector<Partition>& schedule,
                            const ConvergenceReport& kernel_report) {
  FockComparison out;
  ConvergenceReport fr;
  const ExponentialVector c = units[q.index_of(candidate)].at(horizon);
  const Complex cc = fock_inner(c, c);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto yv = fock_section(y, q, units, schedule[i]);
    if (!yv) return {};
    const Complex yy = fock_inner(*yv, *yv);
    const Complex cy = fock_inner(c, *yv);
    ReportRow row;
    row.parts = schedule[i].size();
    row.mesh = schedule[i].norm();
    row.gram_defect = std::abs(yy - cc);
    row.criterion_defect = std::abs(cy - cc);
    row.norm_defect = (yy - 2.0 * cy.real() + cc).real();
    fr.rows.push_back(row);
    const ReportRow& kr = kernel_report.rows[i];
    const double scale = std::max(1.0, std::abs(cc));
    out.discrepancy = std::max({out.discrepancy, std::abs(row.gram_defect - kr.gram_defect) / scale,
                                std::abs(row.criterion_defect - kr.criterion_defect) / scale,
                                std::abs(row.norm_defect - kr.norm_defect) / scale});
  }
  out.csv = report_csv(fr);
  return out;
}

}  // namespace

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "unitlab-out";
}

RunResult run_scenario(const Scenario& input, const RunOptions& options, std::ostream& log) {
  RunResult result;
  Scenario sc = input;
  if (options.seed) sc.seed = *options.seed;
  if (options.threads) sc.threads = *options.threads;
  if (options.schedule) sc.schedule = *options.schedule;
  if (sc.schedule.kind() == Schedule::Kind::random && (options.seed || sc.schedule.seed() == 0))
    sc.schedule = sc.schedule.with_seed(sc.seed);
  result.out_dir = options.out_dir.value_or(default_out_dir()) / sc.name;

  try {
    const OperatorKernel q = sc.build_generator();
    ConditionalOptions cond;
    cond.seed = sc.seed;
    if (q.hermitian_defect() > kPsdTolerance) {
      log << sc.name << ": gate FAIL: generator is not hermitian (defect "
          << short_g(q.hermitian_defect()) << ")\n";
      result.failures.push_back("generator is not hermitian");
      result.exit_code = kExitGate;
      return result;
    }
    result.gate = is_conditionally_cpd(q, cond);
    write_text_file(result.out_dir / "gate.json", conditional_report_json(result.gate));
    log << sc.name << ": gate " << result.gate.summary() << "\n";
    if (!result.gate.verdict) {
      if (result.gate.witness) log << format_witness(*result.gate.witness, q.labels());
      result.failures.push_back("generator is not conditionally CPD");
      result.exit_code = kExitGate;
      return result;
    }

    const CpdSemigroup system(q);
    const auto schedule = sc.schedule.materialize(sc.horizon);
    std::optional<std::vector<FockUnit>> units;
    if (sc.fock_crosscheck) {
      if (q.dim() != 1) throw DomainError("fock_crosscheck needs dim = 1");
      units = fock_realization(q);
    }

    for (const auto& named : sc.expressions) {
      const UnitExpression y = sc.expression(named.name);
      ConvergenceOptions copts;
      copts.thresholds = sc.thresholds;
      copts.threads = sc.threads;
      copts.seed = sc.seed;
      copts.expression_name = named.name;

      ExtensionOptions eopts;
      eopts.zeta_label = sc.zeta_label;
      eopts.conditional = cond;
      std::optional<ExtendedGenerator> ext;
      try {
        ext = extend_generator(y, q, eopts);
      } catch (const ExtensionError& e) {
        log << named.name << ": extension failed: " << e.what() << "\n";
        if (e.report().witness) log << format_witness(*e.report().witness, q.labels());
        result.failures.push_back(named.name + ": extension failed");
        result.exit_code = kExitExtension;
        continue;
      }
      write_text_file(result.out_dir / (named.name + "_extension.json"),
                      kernel_to_json(ext->assembled, 2) + "\n");

      std::vector<std::string> candidates{""};
      for (const auto& ex : sc.expectations)
        if (ex.expression == named.name && !ex.candidate.empty() &&
            std::find(candidates.begin(), candidates.end(), ex.candidate) == candidates.end())
          candidates.push_back(ex.candidate);

      for (const auto& cand : candidates) {
        RunOutcome outcome;
        outcome.expression = named.name;
        outcome.candidate = cand.empty() ? ext->zeta_label : cand;
        std::string stem = named.name;
        if (cand.empty()) {
          outcome.report = convergence_verdict(y, *ext, sc.horizon, schedule, copts);
        } else {
          outcome.report = assess_candidate(y, system, cand, sc.horizon, schedule, copts);
          stem += "_vs_" + cand;
        }
        outcome.report.schedule = sc.schedule.to_string();
        write_text_file(result.out_dir / (stem + ".csv"), report_csv(outcome.report));
        write_text_file(result.out_dir / (stem + ".json"), report_json(outcome.report));

        for (const auto& ex : sc.expectations)
          if (ex.expression == named.name && ex.candidate == cand) outcome.expected = ex.verdict;
        outcome.matched = !outcome.expected || *outcome.expected == outcome.report.verdict;

        log << named.name << " vs " << outcome.candidate << ": " << describe(outcome.report);
        if (outcome.expected) log << (outcome.matched ? " [expected]" : " [MISMATCH]");
        log << "\n";
        if (!outcome.matched) {
          log << "  - expected: " << to_string(*outcome.expected) << "\n"
              << "  + got:      " << to_string(outcome.report.verdict) << "\n";
          result.failures.push_back(named.name + " vs " + outcome.candidate + ": expected " +
                                    std::string(to_string(*outcome.expected)) + ", got " +
                                    std::string(to_string(outcome.report.verdict)));
          if (result.exit_code == kExitOk) result.exit_code = kExitMismatch;
        }

        if (units && !cand.empty()) {
          const auto fc = fock_compare(y, q, *units, cand, sc.horizon, schedule, outcome.report);
          if (fc.csv.empty()) {
            log << "  fock cross-check skipped (needs a single-term expression)\n";
          } else {
            write_text_file(result.out_dir / ("fock_" + stem + ".csv"), fc.csv);
            result.fock_discrepancy = std::max(result.fock_discrepancy, fc.discrepancy);
            log << "  fock cross-check: max relative discrepancy " << short_g(fc.discrepancy) << "\n";
            if (fc.discrepancy > 1e-9) {
              result.failures.push_back(stem + ": fock cross-check disagrees");
              if (result.exit_code == kExitOk) result.exit_code = kExitMismatch;
            }
          }
        }
        result.outcomes.push_back(std::move(outcome));
      }
    }
  } catch (const ParseError& e) {
    log << "error: " << e.what() << "\n";
    result.failures.push_back(e.what());
    result.exit_code = kExitInput;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    result.failures.push_back(e.what());
    result.exit_code = kExitInput;
  }
  return result;
}

RunResult run_scenario_file(const std::filesystem::path& path, const RunOptions& options,
                            std::ostream& log) {
  Scenario sc;
  try {
    sc = read_scenario_file(path);
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    RunResult r;
    r.exit_code = kExitInput;
    r.failures.push_back(e.what());
    return r;
  }
  return run_scenario(sc, options, log);
}

// ---------------------------------------------------------------- validate

ValidationResult validate_kernel(const OperatorKernel& kernel, std::uint64_t seed) {
  ValidationResult r;
  r.hermitian_defect = kernel.hermitian_defect();
  r.hermitian = r.hermitian_defect <= kPsdTolerance;
  r.cpd = is_cpd(kernel);
  if (r.cpd.cpd) r.kolmogorov_rank = kolmogorov_decompose(kernel).rank();
  if (r.hermitian) {
    ConditionalOptions opts;
    opts.seed = seed;
    r.conditional = is_conditionally_cpd(kernel, opts);
  }
  return r;
}

std::string format_witness(const Witness& w, const std::vector<std::string>& labels) {
  std::ostringstream out;
  auto matrix = [&](const Matrix& m) {
    std::string s = "[";
    for (int i = 0; i < m.rows(); ++i) {
      s += i ? ", [" : "[";
      for (int j = 0; j < m.cols(); ++j) s += (j ? ", " : "") + format_complex(m(i, j));
      s += "]";
    }
    return s + "]";
  };
  out << "  witness (" << w.a.size() << " entries):\n";
  for (std::size_t i = 0; i < w.a.size(); ++i)
    out << "    " << labels.at(w.labels[i]) << ": a = " << matrix(w.a[i]) << ", b = " << matrix(w.b[i])
        << "\n";
  return out.str();
}

std::string format_validation(const OperatorKernel& kernel, const ValidationResult& r) {
  std::ostringstream out;
  out << "kernel: dim " << kernel.dim() << ", " << kernel.size() << " labels\n";
  out << "hermitian: " << (r.hermitian ? "pass" : "FAIL") << " (defect " << short_g(r.hermitian_defect)
      << ")\n";
  out << "CPD: " << (r.cpd.cpd ? "pass" : "FAIL") << " (min eigenvalue of block Choi "
      << short_g(r.cpd.min_eigenvalue) << ", threshold -" << short_g(r.cpd.threshold) << ")\n";
  if (r.cpd.cpd) out << "  Kolmogorov rank " << r.kolmogorov_rank << "\n";
  if (r.cpd.witness) out << format_witness(*r.cpd.witness, kernel.labels());
  if (!r.conditional) {
    out << "conditional CPD: skipped (kernel is not hermitian)\n";
  } else {
    const auto& c = *r.conditional;
    out << "conditional CPD: " << (c.verdict ? "pass" : "FAIL") << "\n  " << c.summary() << "\n";
    if (c.witness) out << format_witness(*c.witness, kernel.labels());
  }
  return out.str();
}

int validate_file(const std::filesystem::path& path, std::ostream& out) {
  OperatorKernel kernel;
  try {
    kernel = read_kernel_file(path);
  } catch (const Error& e) {
    out << "error: " << e.what() << "\n";
    return kExitInput;
  }
  const auto r = validate_kernel(kernel);
  out << format_validation(kernel, r);
  return r.generator_ok() ? kExitOk : kExitMismatch;
}

}  // namespace unitlab
