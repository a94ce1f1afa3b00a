#include <benchmark/benchmark.h>

#include "mbern/bounds.hpp"
#include "mbern/ensembles.hpp"
#include "mbern/kernelops.hpp"
#include "mbern/montecarlo.hpp"
#include "mbern/rng.hpp"
#include "mbern/spectral.hpp"

namespace {

using namespace mbern;

void BM_Philox(benchmark::State& state) {
  CounterStream s(1, 0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(s.next_u64());
}
BENCHMARK(BM_Philox);

void BM_EigSym(benchmark::State& state) {
  const Index d = state.range(0);
  CounterStream rng(2, 0, 0);
  Matrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.normal();
  }
  const SymMatrix a(m);
  for (auto _ : state) benchmark::DoNotOptimize(eig_sym(a));
}
BENCHMARK(BM_EigSym)->Arg(4)->Arg(16)->Arg(64)->Arg(256);

void BM_BoundedTail(benchmark::State& state) {
  BoundRequest r{64, 16, 8.0, 1.0, 40.0, 6.0};
  for (auto _ : state) benchmark::DoNotOptimize(bernstein_bounded_tail(r));
}
BENCHMARK(BM_BoundedTail);

void BM_SphereTrial(benchmark::State& state) {
  const EnsembleSpec spec = EnsembleSpec::rank_one_sphere(state.range(0), 64);
  std::uint64_t trial = 0;
  for (auto _ : state) benchmark::DoNotOptimize(op_norm(SymMatrix::symmetrized(sample_sum(spec, 1, trial++))));
}
BENCHMARK(BM_SphereTrial)->Arg(4)->Arg(16);

void BM_EstimateTail(benchmark::State& state) {
  SimConfig cfg{EnsembleSpec::rank_one_sphere(4, 16), {1, 2, 4, 8}, 10000, 3};
  for (auto _ : state) benchmark::DoNotOptimize(estimate_tail(cfg, static_cast<unsigned>(state.range(0))));
}
BENCHMARK(BM_EstimateTail)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_NystromBasis(benchmark::State& state) {
  const KernelSpec k = KernelSpec::gaussian(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(NystromBasis(k, state.range(0)));
}
BENCHMARK(BM_NystromBasis)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_KernelDeviation(benchmark::State& state) {
  const KernelSpec k = KernelSpec::gaussian(0.5);
  const NystromBasis basis(k, 4000);
  std::uint64_t trial = 0;
  for (auto _ : state) {
    const SampleSet s = draw_sample(k, state.range(0), 1, trial++);
    benchmark::DoNotOptimize(basis.operator_deviation(s.points));
  }
}
BENCHMARK(BM_KernelDeviation)->Arg(200)->Arg(2000)->Unit(benchmark::kMicrosecond);

void BM_JointDeviation(benchmark::State& state) {
  const KernelSpec k = KernelSpec::gaussian(0.5);
  const SampleSet s = draw_sample(k, 40, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(operator_deviation_joint(k, s.points, state.range(0)));
}
BENCHMARK(BM_JointDeviation)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
