#include <benchmark/benchmark.h>

#include "bpk/nn/adam.hpp"
#include "bpk/nn/model.hpp"
#include "bpk/rng.hpp"

using namespace bpk::nn;

namespace {

struct Fixture {
    Model<float> model;
    Gradients<float> grads;
    AdamState<float> adam;
    TrainWorkspace<float> ws;
    std::vector<float> x, y;
    std::size_t batch;

    explicit Fixture(std::size_t batch_size)
        : model(build_model<float>(ModelConfig{}, 1)),
          grads(Gradients<float>::like(model)),
          adam(AdamState<float>::like(model)),
          batch(batch_size) {
        bpk::SeededGenerator g(3);
        x.resize(batch * model.cfg.input_len);
        y.assign(batch * model.cfg.classes, 0.0f);
        for (auto& v : x) v = static_cast<float>(g.next_uniform());
        for (std::size_t b = 0; b < batch; ++b) y[b * 2 + (b & 1)] = 1.0f;
    }
};

} // namespace

static void BM_TrainStep(benchmark::State& state) {
    Fixture f(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        forward_backward(f.model, f.x.data(), f.batch, f.y.data(), f.grads,
                         f.ws);
        adam_step(f.model, f.grads, f.adam);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainStep)->Arg(32)->Unit(benchmark::kMillisecond)->Iterations(3);

static void BM_InferBatch(benchmark::State& state) {
    Fixture f(static_cast<std::size_t>(state.range(0)));
    std::vector<float> probs(f.batch * 2);
    for (auto _ : state) {
        predict_batch(f.model, f.x.data(), f.batch, probs.data(), f.ws);
        benchmark::DoNotOptimize(probs.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_InferBatch)->Arg(32)->Unit(benchmark::kMillisecond)->Iterations(5);

BENCHMARK_MAIN();
