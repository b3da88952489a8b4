#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/oracles.hpp"
#include "unitlab/expression_parser.hpp"
#include "unitlab/kernel_json.hpp"
#include "unitlab/runner.hpp"
#include "unitlab/scenario.hpp"

using namespace unitlab;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = UNITLAB_SCENARIO_DIR;
const fs::path kTmp = fs::path(UNITLAB_TEST_TMP) / "cli";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = kTmp / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExpressionContext context(int dim, std::vector<std::string> labels) {
  ExpressionContext c;
  c.dim = dim;
  c.labels = std::move(labels);
  return c;
}

RunOptions out_to(const fs::path& dir) {
  RunOptions o;
  o.out_dir = dir;
  return o;
}

std::vector<fs::path> bundled_scenarios() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(kScenarios))
    if (e.path().extension() == ".scn") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

// ------------------------------------------------------------ expressions

TEST(ExpressionGrammar, AffineCombination) {
  const auto e = parse_expression("2*xi1 - 1*xi2", context(2, {"xi1", "xi2"}));
  ASSERT_EQ(e.terms().size(), 2u);
  EXPECT_EQ(e.terms()[0].left, 2.0 * identity_element(2));
  EXPECT_EQ(e.terms()[1].left, -1.0 * identity_element(2));
  EXPECT_EQ(e.terms()[1].segments, (std::vector<Segment>{{"xi2", 1.0}}));
  EXPECT_EQ(e.value_at_zero(), identity_element(2));
}

TEST(ExpressionGrammar, ConcatenationListsLatestFirst) {
  const auto e = parse_expression("concat(u@0.25, v@0.75)", context(1, {"u", "v"}));
  ASSERT_EQ(e.terms().size(), 1u);
  EXPECT_EQ(e.terms()[0].segments, (std::vector<Segment>{{"u", 0.25}, {"v", 0.75}}));
}

TEST(ExpressionGrammar, TwistsAndMatrixFactors) {
  auto ctx = context(2, {"xi", "xi1", "xi2"});
  Rng rng(61);
  ctx.matrices["A"] = rng.gaussian_matrix(2, 2);
  ctx.matrices["B"] = rng.gaussian_matrix(2, 2);
  ctx.matrices["C"] = rng.gaussian_matrix(2, 2);
  const auto r = parse_expression("xi*expm(t*B)*C", ctx);
  EXPECT_EQ(r.terms()[0].side, TwistSide::right);
  EXPECT_EQ(r.terms()[0].twist, ctx.matrices["B"]);
  EXPECT_EQ(r.terms()[0].right, ctx.matrices["C"]);
  const auto l = parse_expression("-A*expm(t*B)*xi", ctx);
  EXPECT_EQ(l.terms()[0].side, TwistSide::left);
  EXPECT_EQ(l.terms()[0].left, -ctx.matrices["A"]);
  const auto m = parse_expression("xi + A*xi1*B - A*xi2*B", ctx);
  ASSERT_EQ(m.terms().size(), 3u);
  EXPECT_LT((m.value_at_zero() - identity_element(2)).cwiseAbs().maxCoeff(), 1e-15);
  const auto s = parse_expression("(0.5+1i)*xi1 + (0.5-1i)*xi2", ctx);
  EXPECT_EQ(s.terms()[0].left(0, 0), Complex(0.5, 1.0));
  EXPECT_EQ(s.terms()[1].left(1, 1), Complex(0.5, -1.0));
}

TEST(ExpressionGrammar, ErrorsCarryPositions) {
  auto ctx = context(2, {"xi1", "xi2"});
  ctx.matrices["A"] = identity_element(2);
  ctx.matrices["B"] = identity_element(2);
  struct Case {
    const char* text;
    std::size_t column;
  };
  for (const Case& c : {Case{"2*xi1 + foo", 9}, Case{"2*xi1 +", 8}, Case{"xi1*xi2", 5}, Case{"A*B", 1},
                        Case{"expm(t*B)*A*xi1", 1}, Case{"2*xi1 $ xi2", 7}, Case{"concat(xi1@0.5, xi2@0.4)", 1}}) {
    try {
      parse_expression(c.text, ctx);
      ADD_FAILURE() << "accepted: " << c.text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 1u) << c.text;
      EXPECT_EQ(e.column(), c.column) << c.text << ": " << e.what();
    }
  }
  try {
    parse_expression("2*xi1 + bad", ctx, 7, 5);
    ADD_FAILURE();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_EQ(e.column(), 13u);
  }
}

TEST(ExpressionGrammar, ComplexLiterals) {
  EXPECT_EQ(parse_complex("2"), Complex(2.0));
  EXPECT_EQ(parse_complex("-1.5e-3"), Complex(-1.5e-3));
  EXPECT_EQ(parse_complex("0.5i"), Complex(0.0, 0.5));
  EXPECT_EQ(parse_complex("1-0.5i"), Complex(1.0, -0.5));
  EXPECT_EQ(parse_complex("(2+3i)"), Complex(2.0, 3.0));
  for (const char* bad : {"", "i2", "1+", "abc", "1..2", "(1+2i"}) EXPECT_THROW(parse_complex(bad), ParseError) << bad;
  Rng rng(62);
  for (int i = 0; i < 200; ++i) {
    const Complex z(rng.normal() * std::pow(10.0, rng.uniform(-8, 8)), i % 3 ? rng.normal() : 0.0);
    EXPECT_EQ(parse_complex(format_complex(z)), z) << format_complex(z);
  }
}

// ------------------------------------------------------------ scenarios

TEST(Scenario, BundledFilesRoundTrip) {
  const auto files = bundled_scenarios();
  ASSERT_GE(files.size(), 3u);
  for (const auto& f : files) {
    const Scenario a = read_scenario_file(f);
    const std::string text = serialize_scenario(a);
    const Scenario b = parse_scenario(text, a.name);
    EXPECT_TRUE(a == b) << f;
    EXPECT_EQ(serialize_scenario(b), text) << f;
  }
}

TEST(Scenario, ParseErrorsCarryLineAndColumn) {
  struct Case {
    const char* text;
    std::size_t line;
  };
  for (const Case& c : {Case{"[system]\ndim = x\n", 2}, Case{"[system]\nlabels = a\n[bogus]\n", 3},
                        Case{"[system]\ndim = 1\nlabels = a\n[generator]\nkind = covariance\ngamma = [[1]\n", 6},
                        Case{"[system]\ndim = 1\nlabels = a\n[generator]\nkind = covariance\ngamma = [[1]]\n"
                             "[expressions]\ny = 2*a +\n", 8},
                        Case{"dim = 1\n", 1}}) {
    try {
      const Scenario s = parse_scenario(c.text);
      for (const auto& e : s.expressions) (void)s.expression(e.name);
      ADD_FAILURE() << "accepted: " << c.text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), c.line) << c.text << "\n" << e.what();
      EXPECT_GT(e.column(), 0u);
    }
  }
}

TEST(Scenario, CovarianceGenerator) {
  const Scenario s = read_scenario_file(kScenarios / "counterexample.scn");
  const auto q = s.build_generator();
  EXPECT_EQ(q.labels(), (std::vector<std::string>{"u", "v", "w"}));
  EXPECT_EQ(q.at(1, 2).rep()(0, 0), Complex(0.5));
  EXPECT_EQ(s.schedule, Schedule::dyadic(0, 10));
}

// ------------------------------------------------------------ runs

TEST(Run, BundledScenariosMeetTheirExpectations) {
  for (const auto& f : bundled_scenarios()) {
    const fs::path out = fresh_dir("bundled");
    std::ostringstream log;
    const auto r = run_scenario_file(f, out_to(out), log);
    EXPECT_EQ(r.exit_code, kExitOk) << f << "\n" << log.str();
    EXPECT_TRUE(fs::exists(r.out_dir / "gate.json")) << f;
    for (const auto& o : r.outcomes) {
      EXPECT_TRUE(o.matched) << f << " " << o.expression << " vs " << o.candidate;
      EXPECT_LE(o.report.max_identity_residual, 1e-10);
    }
  }
}

TEST(Run, CounterexampleOutputs) {
  const fs::path out = fresh_dir("counterexample");
  std::ostringstream log;
  const auto r = run_scenario_file(kScenarios / "counterexample.scn", out_to(out), log);
  ASSERT_EQ(r.exit_code, kExitOk) << log.str();
  ASSERT_EQ(r.outcomes.size(), 2u);
  EXPECT_EQ(r.outcomes[0].candidate, "zeta");
  EXPECT_EQ(r.outcomes[0].report.verdict, Verdict::weak_only);
  EXPECT_EQ(r.outcomes[1].candidate, "w");
  EXPECT_EQ(r.outcomes[1].report.verdict, Verdict::weak_only);
  EXPECT_LT(r.fock_discrepancy, 1e-9);
  const fs::path dir = out / "counterexample";
  for (const char* f : {"gate.json", "y.csv", "y.json", "y_extension.json", "y_vs_w.csv", "y_vs_w.json", "fock_y_vs_w.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(slurp(dir / "y.csv").substr(0, 48), "n,mesh,gram_defect,criterion_defect,norm_defect\n");
  EXPECT_NO_THROW(read_kernel_file(dir / "y_extension.json"));
}

TEST(Run, EmptyExpressionListOnlyGates) {
  const fs::path out = fresh_dir("gate_only");
  std::ostringstream log;
  const auto r = run_scenario_file(kScenarios / "gate_only.scn", out_to(out), log);
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_TRUE(r.outcomes.empty());
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(out / "gate_only")) files.push_back(e.path().filename());
  EXPECT_EQ(files, std::vector<std::string>{"gate.json"});
}

TEST(Run, MismatchIsReportedWithADiff) {
  Scenario s = read_scenario_file(kScenarios / "counterexample.scn");
  s.expectations[0].verdict = Verdict::norm_convergent;
  std::ostringstream log;
  const auto r = run_scenario(s, out_to(fresh_dir("mismatch")), log);
  EXPECT_EQ(r.exit_code, kExitMismatch);
  EXPECT_NE(log.str().find("- expected: norm-convergent"), std::string::npos) << log.str();
  EXPECT_NE(log.str().find("+ got:      weak-only"), std::string::npos);
}

TEST(Run, GateFailurePrintsAWitness) {
  const std::string text =
      "[system]\ndim = 1\nlabels = a, b\n[generator]\nkind = covariance\ngamma = [[0, 0], [0, -1]]\n"
      "[expressions]\ny = a\n";
  std::ostringstream log;
  const auto r = run_scenario(parse_scenario(text, "bad_gate"), out_to(fresh_dir("bad_gate")), log);
  EXPECT_EQ(r.exit_code, kExitGate);
  EXPECT_FALSE(r.gate.verdict);
  EXPECT_NE(log.str().find("witness"), std::string::npos) << log.str();
  EXPECT_TRUE(r.outcomes.empty());
}

TEST(Run, NonHermitianGeneratorFailsTheGate) {
  const std::string text =
      "[system]\ndim = 1\nlabels = a, b\n[generator]\nkind = covariance\ngamma = [[0, 1], [0, 0]]\n";
  std::ostringstream log;
  EXPECT_EQ(run_scenario(parse_scenario(text, "skew"), out_to(fresh_dir("skew")), log).exit_code, kExitGate);
}

TEST(Run, InputErrors) {
  std::ostringstream log;
  EXPECT_EQ(run_scenario_file(kTmp / "missing.scn", out_to(fresh_dir("missing")), log).exit_code, kExitInput);
  const std::string not_a_section =
      "[system]\ndim = 1\nlabels = a\n[generator]\nkind = covariance\ngamma = [[0]]\n[expressions]\ny = 2*a\n";
  EXPECT_EQ(run_scenario(parse_scenario(not_a_section, "two"), out_to(fresh_dir("two")), log).exit_code, kExitInput);
}

TEST(Run, OutputsAreDeterministicAcrossThreadCounts) {
  auto run_with = [](unsigned threads, const std::string& name) {
    RunOptions o = out_to(fresh_dir(name));
    o.threads = threads;
    std::ostringstream log;
    const auto r = run_scenario_file(kScenarios / "modification.scn", o, log);
    EXPECT_EQ(r.exit_code, kExitOk) << log.str();
    return std::make_pair(slurp(r.out_dir / "y.csv"), slurp(r.out_dir / "y_vs_xi0.csv"));
  };
  const auto a = run_with(1, "det1");
  const auto b = run_with(3, "det3");
  const auto c = run_with(1, "det1b");
  EXPECT_FALSE(a.first.empty());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Run, RandomScheduleFollowsTheSeed) {
  auto run_with = [](std::uint64_t seed, const std::string& name) {
    RunOptions o = out_to(fresh_dir(name));
    o.seed = seed;
    o.schedule = Schedule::parse("random:4");
    std::ostringstream log;
    const auto r = run_scenario_file(kScenarios / "affine.scn", o, log);
    EXPECT_EQ(r.outcomes.at(0).report.seed, seed);
    EXPECT_EQ(r.outcomes.at(0).report.schedule, "random:4:" + std::to_string(seed));
    return slurp(r.out_dir / "y.csv");
  };
  EXPECT_EQ(run_with(5, "seed5a"), run_with(5, "seed5b"));
  EXPECT_NE(run_with(5, "seed5c"), run_with(6, "seed6"));
}

TEST(Run, DefaultOutputDirectoryFollowsTheEnvironment) {
  ::setenv(kOutDirEnv, "/tmp/unitlab-env-test", 1);
  EXPECT_EQ(default_out_dir(), fs::path("/tmp/unitlab-env-test"));
  ::unsetenv(kOutDirEnv);
  EXPECT_EQ(default_out_dir(), fs::path("unitlab-out"));
}

// ------------------------------------------------------------ validate

TEST(Validate, IdentityKernelPasses) {
  const fs::path f = fresh_dir("validate") / "identity.json";
  write_kernel_file(f, OperatorKernel::identity(2, {"a", "b"}));
  std::ostringstream out;
  EXPECT_EQ(validate_file(f, out), kExitOk) << out.str();
  EXPECT_NE(out.str().find("CPD: pass"), std::string::npos);
  EXPECT_NE(out.str().find("conditional CPD: pass"), std::string::npos);
}

TEST(Validate, ScalarKernelWithNegativeEigenvalue) {
  Matrix g(2, 2);
  g << 1.0, 2.0, 2.0, 1.0;
  const auto q = OperatorKernel::scalar(g, {"a", "b"});
  const auto r = validate_kernel(q);
  EXPECT_FALSE(r.cpd.cpd);
  EXPECT_NEAR(r.cpd.min_eigenvalue, -1.0, 1e-12);  // eigenvalues of [[1,2],[2,1]] are 3 and -1
  ASSERT_TRUE(r.cpd.witness.has_value());
  EXPECT_LT(quadratic_form(q, *r.cpd.witness).real().maxCoeff(), -0.5);
  const fs::path f = fresh_dir("validate_scalar") / "k.json";
  write_kernel_file(f, q);
  std::ostringstream out;
  EXPECT_EQ(validate_file(f, out), kExitMismatch);
  EXPECT_NE(out.str().find("CPD: FAIL"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("witness"), std::string::npos);
}

TEST(Validate, GeneratorNeedNotBeCpd) {
  Rng rng(63);
  auto data = oracle::random_ce_data(2, 2, 2, 0.3, rng);
  for (auto& b : data.beta) b -= 2.0 * identity_element(2);  // Q^{ss}(1) has a negative part
  const auto q = oracle::ce_kernel(data, {"a", "b"});
  const fs::path f = fresh_dir("validate_ce") / "ce.json";
  write_kernel_file(f, q);
  const auto r = validate_kernel(read_kernel_file(f));
  EXPECT_FALSE(r.cpd.cpd);
  ASSERT_TRUE(r.conditional.has_value());
  EXPECT_TRUE(r.conditional->verdict);
  EXPECT_EQ(r.conditional->direct.violations, 0u);
  std::ostringstream out;
  EXPECT_EQ(validate_file(f, out), kExitOk) << out.str();
  EXPECT_NE(out.str().find("CPD: FAIL"), std::string::npos);
}

TEST(Validate, MalformedJson) {
  const fs::path dir = fresh_dir("validate_bad");
  std::ofstream(dir / "bad.json") << "{\"dim\": 2, \"labels\": [";
  std::ostringstream out;
  EXPECT_EQ(validate_file(dir / "bad.json", out), kExitInput);
  EXPECT_EQ(validate_file(dir / "absent.json", out), kExitInput);
}

// ------------------------------------------------------------ executable

#ifdef UNITLAB_EXE
namespace {

int shell(const std::string& args, const fs::path& capture) {
  const std::string cmd = std::string("\"") + UNITLAB_EXE + "\" " + args + " > \"" + capture.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Executable, VersionAndExitCodes) {
  const fs::path dir = fresh_dir("exe");
  EXPECT_EQ(shell("version", dir / "v.txt"), 0);
  EXPECT_EQ(slurp(dir / "v.txt").rfind("unitlab ", 0), 0u);
  EXPECT_EQ(shell("run \"" + (kScenarios / "counterexample.scn").string() + "\" --out \"" + (dir / "out").string() + "\"",
                  dir / "run.txt"),
            0)
      << slurp(dir / "run.txt");
  EXPECT_TRUE(fs::exists(dir / "out" / "counterexample" / "y.csv"));
  EXPECT_EQ(shell("run \"" + (dir / "nope.scn").string() + "\"", dir / "nope.txt"), kExitInput);
  EXPECT_EQ(shell("run \"" + (kScenarios / "affine.scn").string() + "\" --schedule dyadic:9:1", dir / "sched.txt"),
            kExitInput);
  write_kernel_file(dir / "id.json", OperatorKernel::identity(1, {"a"}));
  EXPECT_EQ(shell("validate \"" + (dir / "id.json").string() + "\"", dir / "val.txt"), 0);
  EXPECT_NE(shell("frobnicate", dir / "bad.txt"), 0);
}
#endif
