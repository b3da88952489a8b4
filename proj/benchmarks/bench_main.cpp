#include <benchmark/benchmark.h>

#include "unitlab/kernels.hpp"
#include "unitlab/rng.hpp"
#include "unitlab/trotter.hpp"

namespace {

using namespace unitlab;

OperatorKernel ce_kernel(int d, std::size_t labels, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> names;
  std::vector<Matrix> eta, beta;
  for (std::size_t s = 0; s < labels; ++s) {
    names.push_back("x" + std::to_string(s));
    eta.push_back(rng.gaussian_matrix(d, d, 0.4));
    beta.push_back(rng.gaussian_matrix(d, d, 0.4));
  }
  OperatorKernel q(d, names);
  for (std::size_t s = 0; s < labels; ++s)
    for (std::size_t t = 0; t < labels; ++t)
      q.set(s, t,
            Superoperator::sandwich(eta[s].adjoint(), eta[t]) + Superoperator::left(beta[s].adjoint()) +
                Superoperator::right(beta[t]));
  return q;
}

void BM_SuperopExp(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const OperatorKernel q = ce_kernel(d, 1, 7);
  for (auto _ : state) benchmark::DoNotOptimize(superop_exp(q.at(0, 0), 0.37));
}
BENCHMARK(BM_SuperopExp)->Arg(2)->Arg(3)->Arg(4);

void BM_SuperopNorm(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const OperatorKernel q = ce_kernel(d, 1, 11);
  for (auto _ : state) benchmark::DoNotOptimize(superop_norm(q.at(0, 0)));
}
BENCHMARK(BM_SuperopNorm)->Arg(2)->Arg(3);

void BM_IsCpd(benchmark::State& state) {
  const OperatorKernel q = ce_kernel(2, static_cast<std::size_t>(state.range(0)), 3);
  const OperatorKernel k = CpdSemigroup(q).evaluate(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(is_cpd(k));
}
BENCHMARK(BM_IsCpd)->Arg(2)->Arg(4)->Arg(8);

void BM_ConditionalCpd(benchmark::State& state) {
  const OperatorKernel q = ce_kernel(2, 3, 5);
  for (auto _ : state) benchmark::DoNotOptimize(is_conditionally_cpd(q));
}
BENCHMARK(BM_ConditionalCpd)->Unit(benchmark::kMillisecond);

void BM_EvalPairing(benchmark::State& state) {
  const OperatorKernel q = ce_kernel(2, 2, 9);
  const CpdSemigroup system(q);
  const auto y = UnitExpression::affine({{2.0, "x0"}, {-1.0, "x1"}}, 2);
  const Partition part = Partition::uniform(1.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    PairingEngine engine(system);
    benchmark::DoNotOptimize(engine.pairing(y, part, y, part));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EvalPairing)->RangeMultiplier(4)->Range(8, 2048)->Complexity(benchmark::oN);

}  // namespace

BENCHMARK_MAIN();
