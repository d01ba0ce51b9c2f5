#include <benchmark/benchmark.h>

#include "bpk/chaos.hpp"
#include "bpk/modem.hpp"

static void BM_LogisticGenerate(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto seq = bpk::generate({3.7, 0.3}, n);
        benchmark::DoNotOptimize(seq.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LogisticGenerate)->Arg(4096)->Arg(1 << 20);

static void BM_Modulate(benchmark::State& state) {
    const bpk::ModulationConfig cfg;
    const bpk::BitStream bits(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) {
        auto sig = bpk::modulate(bits, cfg, 0.3);
        benchmark::DoNotOptimize(sig.samples.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) *
                            static_cast<std::int64_t>(cfg.samples_per_bit));
}
BENCHMARK(BM_Modulate)->Arg(1)->Arg(16);

static void BM_BifurcationDiagram(benchmark::State& state) {
    for (auto _ : state) {
        auto points = bpk::bifurcation_diagram(2.8, 4.0, 120, 500, 100);
        benchmark::DoNotOptimize(points.data());
    }
}
BENCHMARK(BM_BifurcationDiagram);

BENCHMARK_MAIN();
