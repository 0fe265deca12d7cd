#include <benchmark/benchmark.h>

#include "filterlab/filter.hpp"
#include "filterlab/lattice.hpp"
#include "filterlab/model.hpp"

namespace {

using namespace filterlab;

void sweep(benchmark::State& state, ExecutionPolicy policy) {
  const auto model = make_model("coupled");
  const auto g = make_test_function("shifted-sine");
  const BrownianLattice lattice = sample_lattice(1, 1, 1024, 1, 0);
  const ObservationPath y = brownian_observation(lattice);
  SweepOptions opt;
  opt.levels = {16, 64};
  opt.variance_I = state.range(1) != 0;
  opt.variance_II = state.range(1) != 0;
  opt.policy = policy;
  const auto M = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const SweepResult r = particle_sweep(*model, *g, y, M, 7, opt);
    benchmark::DoNotOptimize(r.w_ref.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SweepSerial(benchmark::State& state) { sweep(state, ExecutionPolicy::serial); }
void BM_SweepParallel(benchmark::State& state) { sweep(state, ExecutionPolicy::parallel); }

BENCHMARK(BM_SweepSerial)->Args({256, 0})->Args({256, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Args({256, 0})->Args({256, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
