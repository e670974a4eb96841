// Serial reference vs OpenMP batch inference.

#include <benchmark/benchmark.h>

#include <vector>

#include "memsnn/crossbar.hpp"
#include "memsnn/kernels.hpp"
#include "memsnn/rng.hpp"

using namespace memsnn;

namespace {

struct Workload {
    std::vector<std::vector<double>> inputs;
    std::vector<double> weights;
    CrossbarArray array;

    Workload(std::size_t samples, std::size_t dim)
        : weights(dim), array(10, 10, DeviceParams{}, 2230.4, 18913.3, 0.01, 5)
    {
        Rng rng(11);
        inputs.assign(samples, std::vector<double>(dim));
        for (auto& x : inputs)
            for (auto& v : x)
                v = rng.uniform();
        for (auto& w : weights)
            w = rng.uniform();
        array.randomize(rng);
    }
};

const Workload& workload()
{
    static const Workload w(256, 100);
    return w;
}

SnnBatch batch_for(const Workload& w, bool memristive, std::size_t steps)
{
    SnnBatch b;
    b.inputs = w.inputs;
    b.weights = memristive ? WeightSource::memristive(w.array, w.weights.size(), 9)
                           : WeightSource::software(w.weights);
    b.steps = steps;
    b.v_th = 50.0;
    b.encoder_seed = 1;
    return b;
}

void BM_Serial(benchmark::State& state)
{
    const auto b = batch_for(workload(), state.range(1) != 0, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(snn_infer_serial(b));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(b.inputs.size()));
}

void BM_Parallel(benchmark::State& state)
{
    const auto b = batch_for(workload(), state.range(1) != 0, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(snn_infer_parallel(b));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(b.inputs.size()));
}

} // namespace

BENCHMARK(BM_Serial)->ArgsProduct({{50, 1000}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Parallel)->ArgsProduct({{50, 1000}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
