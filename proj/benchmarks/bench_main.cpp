#include "bmsync/certify.hpp"
#include "bmsync/models.hpp"
#include "bmsync/solver.hpp"
#include "bmsync/spectral.hpp"

#include <benchmark/benchmark.h>

using namespace bmsync;

namespace {

void BM_MatvecSpikeNoise(benchmark::State& state) {
  const Index n = state.range(0);
  const Z2Instance inst = gen_z2(n, LambdaSnr{10.0}, 1);
  Rng rng = make_rng(2);
  const Matrix q = standard_normal(2 * n, rng).reshaped(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(inst.y.apply(q));
  state.SetItemsProcessed(state.iterations() * n * n * 2);
}
BENCHMARK(BM_MatvecSpikeNoise)->Arg(200)->Arg(1000)->Arg(2000);

void BM_MatvecCenteredSbm(benchmark::State& state) {
  const Index n = state.range(0);
  const SbmInstance inst = gen_sbm(n, DegreeParams{20.0, 2.0}, 1);
  Rng rng = make_rng(2);
  const Matrix q = standard_normal(2 * n, rng).reshaped(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(inst.centered.apply(q));
}
BENCHMARK(BM_MatvecCenteredSbm)->Arg(1000)->Arg(10000);

void BM_LanczosSmallest(benchmark::State& state) {
  const Index n = state.range(0);
  const Z2Instance inst = gen_z2(n, LambdaSnr{5.0}, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(extreme_eigenpair(inst.y, Extreme::smallest, EigenOptions{}));
  }
}
BENCHMARK(BM_LanczosSmallest)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_SolveRank2(benchmark::State& state) {
  const Index n = state.range(0);
  const Z2Instance inst = gen_z2(n, LambdaSnr{20.0}, 4);
  SolverConfig cfg;
  for (auto _ : state) {
    cfg.seed++;
    benchmark::DoNotOptimize(solve_rank2(inst.y, cfg));
  }
}
BENCHMARK(BM_SolveRank2)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_DualCertificate(benchmark::State& state) {
  const Index n = state.range(0);
  const Z2Instance inst = gen_z2(n, SigmaSnr{2.0}, 5);
  const SolveReport r = solve_rank2(inst.y, SolverConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(dual_certificate(inst.y, r.point));
}
BENCHMARK(BM_DualCertificate)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
