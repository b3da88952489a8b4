#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "unitlab/fock.hpp"

using namespace unitlab;

namespace {

const Complex I(0.0, 1.0);

Vector vec_of(std::initializer_list<Complex> xs) {
  Vector v(static_cast<int>(xs.size()));
  int i = 0;
  for (auto x : xs) v(i++) = x;
  return v;
}

FockUnit random_unit(Rng& rng, int k) {
  FockUnit u;
  u.alpha = Complex(0.3 * rng.normal(), rng.normal());
  u.c = Vector(k);
  for (int i = 0; i < k; ++i) u.c(i) = 0.6 * rng.complex_normal();
  return u;
}

ExponentialVector random_vector(Rng& rng, double length, int k, std::size_t pieces) {
  std::vector<double> bp{0.0};
  std::vector<Vector> values;
  for (std::size_t i = 0; i < pieces; ++i) {
    bp.push_back(length * static_cast<double>(i + 1) / static_cast<double>(pieces));
    Vector v(k);
    for (int j = 0; j < k; ++j) v(j) = rng.complex_normal();
    values.push_back(v);
  }
  return {rng.complex_normal(), StepFunction(bp, values)};
}

OperatorKernel generator_of(const std::vector<FockUnit>& units, const std::vector<std::string>& labels) {
  Matrix g(static_cast<int>(units.size()), static_cast<int>(units.size()));
  for (std::size_t i = 0; i < units.size(); ++i)
    for (std::size_t j = 0; j < units.size(); ++j)
      g(i, j) = std::conj(units[i].alpha) + units[j].alpha + units[i].c.dot(units[j].c);
  return OperatorKernel::scalar(g, labels);
}

}  // namespace

TEST(FockInner, ConstantArguments) {
  const auto f = StepFunction::constant(vec_of({1.0, I}), 2.0);
  const auto g = StepFunction::constant(vec_of({0.5, 2.0}), 2.0);
  // int <f, g> = 2 (0.5 + conj(i) 2) = 1 - 4i
  EXPECT_LT(std::abs(integrate_inner(f, g) - Complex(1.0, -4.0)), 1e-15);
  EXPECT_LT(std::abs(fock_inner({1.0, f}, {1.0, g}) - std::exp(Complex(1.0, -4.0))), 1e-14);
  EXPECT_LT(std::abs(fock_inner({I, f}, {2.0, g}) - (-I) * 2.0 * std::exp(Complex(1.0, -4.0))), 1e-14);
}

TEST(FockInner, StepArgumentsMergeBreakpoints) {
  const StepFunction f({0.0, 0.5, 1.0}, {vec_of({1.0}), vec_of({2.0})});
  const StepFunction g({0.0, 0.25, 1.0}, {vec_of({I}), vec_of({1.0})});
  // 0.25 i + 0.25 + 2 * 0.5
  EXPECT_LT(std::abs(integrate_inner(f, g) - Complex(1.25, 0.25)), 1e-15);
  EXPECT_LT(std::abs(integrate_inner(g, f) - Complex(1.25, -0.25)), 1e-15);
}

TEST(FockInner, Errors) {
  const auto f = StepFunction::constant(vec_of({1.0}), 1.0);
  EXPECT_THROW(fock_inner({1.0, f}, {1.0, StepFunction::constant(vec_of({1.0, 0.0}), 1.0)}), DimensionError);
  EXPECT_THROW(fock_inner({1.0, f}, {1.0, StepFunction::constant(vec_of({1.0}), 2.0)}), DomainError);
  EXPECT_THROW(StepFunction({0.0, 1.0, 0.5}, {vec_of({1.0}), vec_of({1.0})}), DomainError);
  EXPECT_THROW(StepFunction(5), DimensionError);
  EXPECT_THROW(StepFunction(0), DimensionError);
}

TEST(FockInner, EmptyIntervalGivesPrefactors) {
  const ExponentialVector a{Complex(2.0, 1.0), StepFunction(1)};
  const ExponentialVector b{Complex(0.0, 3.0), StepFunction(1)};
  EXPECT_LT(std::abs(fock_inner(a, b) - std::conj(a.prefactor) * b.prefactor), 1e-15);
}

TEST(FockInner, ConcatenationIsMultiplicative) {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_vector(rng, 0.4, 2, 3), a2 = random_vector(rng, 0.4, 2, 2);
    const auto b = random_vector(rng, 0.7, 2, 1), b2 = random_vector(rng, 0.7, 2, 4);
    const Complex lhs = fock_inner(concat(a, b), concat(a2, b2));
    const Complex rhs = fock_inner(a, a2) * fock_inner(b, b2);
    EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(FockInner, GramMatricesArePositive) {
  Rng rng(42);
  for (std::size_t n = 1; n <= 5; ++n) {
    std::vector<ExponentialVector> vs;
    for (std::size_t i = 0; i < n; ++i) vs.push_back(random_vector(rng, 0.8, 2, 1 + rng.index(4)));
    const Matrix g = gram_matrix(vs);
    EXPECT_LT((g - g.adjoint()).cwiseAbs().maxCoeff(), 1e-12 * g.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
    EXPECT_GE(eig.eigenvalues()(0), -1e-10 * std::max(1.0, eig.eigenvalues().maxCoeff()));
  }
}

TEST(FockUnit, PairingIsTheSemigroupEntry) {
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const auto u = random_unit(rng, 3), v = random_unit(rng, 3);
    const double t = rng.uniform(0.1, 1.5);
    const Complex expected = std::exp(t * (std::conj(u.alpha) + v.alpha + u.c.dot(v.c)));
    EXPECT_LT(std::abs(fock_unit_pairing(u, v, t) - expected), 1e-12 * std::abs(expected));
    EXPECT_LT(std::abs(fock_inner(u.at(t), v.at(t)) - expected), 1e-12 * std::abs(expected));
  }
}

TEST(TrotterVector, AlternatingValues) {
  const auto u = FockUnit::scalar(0.0, 0.0), v = FockUnit::scalar(0.0, 1.0);
  const auto w = FockUnit::scalar(0.0, 0.5);
  for (std::size_t n : {1u, 3u, 16u, 1000u}) {
    const auto y = trotter_vector(u, v, 1.0, n);
    EXPECT_NEAR(y.argument.length(), 1.0, 1e-12);
    EXPECT_LT(std::abs(fock_inner(y, y) - std::exp(0.5)), 1e-12);
    EXPECT_LT(std::abs(fock_inner(w.at(1.0), y) - std::exp(0.25)), 1e-12);
  }
  // u on the first kappa-part of every slot.
  const auto y = trotter_vector(u, v, Partition({1.0}), 0.3, 0.7);
  ASSERT_EQ(y.argument.breakpoints().size(), 3u);
  EXPECT_NEAR(y.argument.breakpoints()[1], 0.3, 1e-15);
  EXPECT_EQ(y.argument.values()[0](0), Complex(0.0));
  EXPECT_LT(std::abs(fock_inner(w.at(1.0), y) - std::exp(0.35)), 1e-14);
  EXPECT_LT(std::abs(fock_inner(y, y) - std::exp(0.7)), 1e-14);
  EXPECT_THROW(trotter_vector(u, v, 1.0, 0), DomainError);
  EXPECT_THROW(trotter_vector(u, v, Partition({1.0}), 0.0, 1.0), DomainError);
}

TEST(TrotterVector, PrefactorCollectsDrifts) {
  const auto u = FockUnit::scalar(Complex(0.2, 1.0), 0.0), v = FockUnit::scalar(Complex(-0.4, 0.5), 0.0);
  const auto y = trotter_vector(u, v, 2.0, 5);
  EXPECT_LT(std::abs(y.prefactor - std::exp(1.0 * u.alpha + 1.0 * v.alpha)), 1e-14);
}

TEST(TrotterVector, AgreesWithThePairingEngine) {
  Rng rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<FockUnit> units{random_unit(rng, 2), random_unit(rng, 2), random_unit(rng, 2)};
    const auto q = generator_of(units, {"u", "v", "x"});
    const CpdSemigroup s(q);
    const double kappa = rng.uniform(0.1, 1.0), lambda = rng.uniform(0.1, 1.0);
    const double t = rng.uniform(0.2, 1.2);
    const std::size_t n = 1 + rng.index(6), m = 1 + rng.index(6);
    const Partition slots_a = Partition::uniform(t / (kappa + lambda), n);
    Rng prng(trial);
    std::vector<double> widths;
    for (std::size_t i = 0; i < m; ++i) widths.push_back(prng.uniform(0.5, 1.5));
    double total = 0;
    for (double x : widths) total += x;
    for (double& x : widths) x *= t / (kappa + lambda) / total;
    const Partition slots_b(widths);

    const auto fa = trotter_vector(units[0], units[1], slots_a, kappa, lambda);
    const auto fb = trotter_vector(units[0], units[1], slots_b, kappa, lambda);
    const Complex fock = fock_inner(fa, fb);

    // Leftmost segment is the latest piece of the slot.
    const double f = kappa / (kappa + lambda);
    const auto y = UnitExpression::concatenation({{"v", 1.0 - f}, {"u", f}}, 1);
    auto scaled = [&](const Partition& p) {
      std::vector<double> parts = p.parts();
      for (double& x : parts) x *= kappa + lambda;
      return Partition(parts);
    };
    const Complex engine = eval_pairing(y, scaled(slots_a), y, scaled(slots_b), s).rep()(0, 0);
    EXPECT_LT(std::abs(fock - engine), 1e-10 * std::max(1.0, std::abs(fock))) << trial;

    const Complex fx = fock_inner(units[2].at(t), fa);
    const Complex ex = eval_pairing(UnitExpression::unit("x", 1), Partition({t}), y, scaled(slots_a), s).rep()(0, 0);
    EXPECT_LT(std::abs(fx - ex), 1e-10 * std::max(1.0, std::abs(fx))) << trial;
  }
}

TEST(Counterexample, UnitHorizon) {
  const auto r = counterexample_scenario(1.0, Schedule::dyadic(0, 8));
  ASSERT_EQ(r.rows.size(), 9u);
  const double gap = std::exp(0.5) - std::exp(0.25);
  for (const auto& row : r.rows) {
    EXPECT_LT(std::abs(row.y_norm2 - std::exp(0.5)), 1e-12);
    EXPECT_LT(std::abs(row.w_y - std::exp(0.25)), 1e-12);
    EXPECT_LT(std::abs(row.w_w - std::exp(0.25)), 1e-12);
    EXPECT_NEAR(row.norm_defect, gap, 1e-12);
    EXPECT_LT(std::abs(row.zeta_y - std::exp(0.25)), 1e-12);
    EXPECT_LT(std::abs(row.zeta_zeta - std::exp(0.5)), 1e-12);
  }
  EXPECT_EQ(r.embedding_multiplicity, 2);
  EXPECT_EQ(r.vs_w.verdict, Verdict::weak_only);
  EXPECT_EQ(r.vs_zeta.verdict, Verdict::weak_only);
  EXPECT_NEAR(r.vs_zeta.criterion_limit, gap, 1e-12);
  EXPECT_LT(r.vs_zeta.gram_limit, 1e-12);
  EXPECT_LT(r.vs_zeta.ambient_limit, 1e-12);
}

TEST(Counterexample, ZeroHorizonIsTrivial) {
  const auto r = counterexample_scenario(0.0, Schedule::dyadic(0, 3));
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.y_norm2, Complex(1.0));
    EXPECT_EQ(row.w_y, Complex(1.0));
    EXPECT_EQ(row.norm_defect, 0.0);
  }
  EXPECT_EQ(r.vs_w.verdict, Verdict::norm_convergent);
  EXPECT_THROW(counterexample_scenario(-1.0, Schedule::dyadic(0, 3)), DomainError);
}

TEST(Counterexample, AgreesWithTheOperatorComputation) {
  Matrix g = Matrix::Zero(3, 3);
  g(1, 1) = 1.0;
  g(1, 2) = g(2, 1) = 0.5;
  g(2, 2) = 0.25;
  const auto q = OperatorKernel::scalar(g, {"u", "v", "w"});
  const auto y = UnitExpression::concatenation({{"v", 0.5}, {"u", 0.5}}, 1);
  const auto ops = convergence_verdict(y, q, 1.0, Schedule::dyadic(0, 6));
  const auto fock = counterexample_scenario(1.0, Schedule::dyadic(0, 6));
  ASSERT_EQ(ops.rows.size(), fock.vs_zeta.rows.size());
  for (std::size_t k = 0; k < ops.rows.size(); ++k) {
    EXPECT_NEAR(ops.rows[k].criterion_defect, fock.vs_zeta.rows[k].criterion_defect, 1e-12);
    EXPECT_NEAR(ops.rows[k].norm_defect, fock.vs_zeta.rows[k].norm_defect, 1e-12);
  }
  EXPECT_EQ(ops.verdict, fock.vs_zeta.verdict);
}

TEST(Realization, ReproducesTheKernel) {
  Rng rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.index(4);
    std::vector<FockUnit> units;
    for (std::size_t i = 0; i < n; ++i) units.push_back(random_unit(rng, 2));
    const auto q = generator_of(units, oracle::names(n));
    const auto real = fock_realization(q);
    ASSERT_EQ(real.size(), n);
    EXPECT_EQ(real[0].c.norm(), 0.0);
    EXPECT_LE(real[0].c.size(), 4);
    const CpdSemigroup s(q);
    for (double t : {0.3, 1.0})
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const Complex want = s.entry(i, j, t).rep()(0, 0);
          EXPECT_LT(std::abs(fock_unit_pairing(real[i], real[j], t) - want), 1e-10 * std::abs(want));
        }
  }
}

TEST(Realization, RejectsBadKernels) {
  Matrix g = Matrix::Zero(2, 2);
  g(1, 1) = -1.0;
  EXPECT_THROW(fock_realization(OperatorKernel::scalar(g, {"a", "b"})), DomainError);
  Rng rng(46);
  std::vector<FockUnit> wide;
  for (int i = 0; i < 7; ++i) wide.push_back(random_unit(rng, 6));
  EXPECT_THROW(fock_realization(generator_of(wide, oracle::names(7))), DomainError);
  EXPECT_THROW(fock_realization(OperatorKernel::identity(2, {"a"})), DimensionError);
}
