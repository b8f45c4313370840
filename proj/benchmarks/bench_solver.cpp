#include "nesscorr/model.hpp"
#include "nesscorr/spectral.hpp"
#include "nesscorr/steady_state.hpp"

#include <benchmark/benchmark.h>

using namespace nesscorr;

namespace {

NetworkModel chain(Index n) { return build_long_range_chain(n, 1.0, 1.5, 1.0, 1.0, 1000.0); }

void bm_decompose(benchmark::State& state) {
  const auto h = effective_hamiltonian(chain(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(decompose(h));
  state.SetComplexityN(state.range(0));
}

void bm_lyapunov(benchmark::State& state) {
  const auto model = chain(state.range(0));
  const auto spec = decompose(effective_hamiltonian(model));
  for (auto _ : state) benchmark::DoNotOptimize(lyapunov_steady_state(spec, model.gamma_plus));
  state.SetComplexityN(state.range(0));
}

void bm_formation(benchmark::State& state, FormationKernel kernel) {
  const auto model = chain(state.range(0));
  const auto spec = decompose(effective_hamiltonian(model));
  const auto pattern = dephasing_pattern(model);
  FormationOptions options;
  options.kernel = kernel;
  for (auto _ : state) {
    const auto d = form_restricted_superoperator(spec, model, pattern, options);
    state.counters["rank"] = static_cast<double>(d.info.factor_rank);
    benchmark::DoNotOptimize(d.entries.data());
  }
  state.SetComplexityN(state.range(0));
}

void bm_solve(benchmark::State& state) {
  const auto model = chain(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_steady_state(model));
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(bm_decompose)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK(bm_lyapunov)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK_CAPTURE(bm_formation, direct, FormationKernel::direct)
    ->RangeMultiplier(2)->Range(64, 256)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK_CAPTURE(bm_formation, factored, FormationKernel::factored)
    ->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK(bm_solve)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond)->Complexity();

BENCHMARK_MAIN();
