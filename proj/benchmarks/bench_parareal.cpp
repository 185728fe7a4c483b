#include <benchmark/benchmark.h>

#include "asyncpr/analysis.hpp"
#include "asyncpr/async_parareal.hpp"

using namespace asyncpr;

namespace {

struct Heat {
  AffinePropagator coarse;
  AffinePropagator fine;
  Vector u0;
};

Heat heat(std::size_t n) {
  const LinearIVP ivp = heat1d_system(n, 1.0, 0.0, 0.0, 1.0, 1.0);
  return {backward_euler_propagator(ivp, 0.2, 1), trapezoidal_propagator(ivp, 0.2, 100), ivp.initial};
}

void BM_SyncParareal(benchmark::State& state) {
  const Heat h = heat(static_cast<std::size_t>(state.range(0)));
  const auto p = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_parareal(h.coarse, h.fine, h.u0, p, 1e-6));
  }
}
BENCHMARK(BM_SyncParareal)->ArgsProduct({{8, 32}, {4, 16}});

void BM_AsyncParareal(benchmark::State& state) {
  const Heat h = heat(static_cast<std::size_t>(state.range(0)));
  const auto p = static_cast<std::size_t>(state.range(1));
  const AsyncSchedule sched{1, static_cast<std::size_t>(state.range(2)), ActivationPolicy::random_fair};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_async_parareal(h.coarse, h.fine, h.u0, p, sched, 1e-6, SimulationOptions{true, false}));
  }
}
BENCHMARK(BM_AsyncParareal)->ArgsProduct({{8, 32}, {4, 16}, {0, 2}});

void BM_SpectralNorm(benchmark::State& state) {
  const Heat h = heat(static_cast<std::size_t>(state.range(0)));
  const DenseMatrix diff = h.fine.matrix - h.coarse.matrix;
  for (auto _ : state) {
    benchmark::DoNotOptimize(operator_norm(diff, NormKind::spectral));
  }
}
BENCHMARK(BM_SpectralNorm)->Arg(8)->Arg(32)->Arg(64);

void BM_ContractionFactors(benchmark::State& state) {
  const Heat h = heat(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(contraction_factors(h.coarse, h.fine, 16, NormKind::spectral));
  }
}
BENCHMARK(BM_ContractionFactors)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
