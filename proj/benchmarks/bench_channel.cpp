#include <benchmark/benchmark.h>

#include "bpk/channel.hpp"
#include "bpk/dataset.hpp"
#include "bpk/modem.hpp"
#include "bpk/rng.hpp"

static void BM_Awgn(benchmark::State& state) {
    const bpk::ModulationConfig cfg;
    const auto clean =
        bpk::modulate(bpk::BitStream(static_cast<std::size_t>(state.range(0)), 0),
                      cfg, 0.3);
    bpk::SeededGenerator g(1);
    for (auto _ : state) {
        auto noisy = bpk::awgn(clean, -13.0, g);
        benchmark::DoNotOptimize(noisy.samples.data());
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(clean.samples.size()));
}
BENCHMARK(BM_Awgn)->Arg(1)->Arg(16);

static void BM_GaussianDraws(benchmark::State& state) {
    bpk::SeededGenerator g(1);
    for (auto _ : state) {
        double acc = 0.0;
        for (int i = 0; i < 1024; ++i) acc += g.next_gaussian();
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_GaussianDraws);

static void BM_GenerateDatasetRecords(benchmark::State& state) {
    const bpk::ModulationConfig cfg;
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto d = bpk::generate_dataset(cfg, 20.0, {n, 1, 1}, 7);
        benchmark::DoNotOptimize(d.train.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateDatasetRecords)->Arg(64);

BENCHMARK_MAIN();
