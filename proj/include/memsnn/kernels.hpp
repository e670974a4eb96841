#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "memsnn/crossbar.hpp"
#include "memsnn/spiking.hpp"

namespace memsnn {

/// Where a sample's synaptic weights come from during batched inference.
///
/// Either a fixed software vector, or a frozen crossbar read once per sample
/// through that sample's own noise stream.
struct WeightSource {
    std::span<const double> fixed{};
    const CrossbarArray* array = nullptr;
    std::size_t synapses = 0;
    std::uint64_t noise_seed = 0;

    static WeightSource software(std::span<const double> weights)
    {
        return {weights, nullptr, weights.size(), 0};
    }
    static WeightSource memristive(const CrossbarArray& array, std::size_t synapses,
                                   std::uint64_t noise_seed)
    {
        return {{}, &array, synapses, noise_seed};
    }

    /// Writes the weights seen by `sample` into `out` (size = synapses).
    void weights_for(std::size_t sample, std::vector<double>& out) const;
};

/// Rate-coded inference of many samples. Sample i encodes with
/// Rng::stream(encoder_seed, encoder_stream, i), so results depend only on
/// the sample index, never on scheduling.
struct SnnBatch {
    std::span<const std::vector<double>> inputs; ///< x_c per sample
    WeightSource weights;
    std::size_t steps = 1000;
    double v_th = 50.0;
    std::uint64_t encoder_seed = 0;
    std::string encoder_stream = "encoder-eval";
};

/// Serial reference.
std::vector<InferenceResult> snn_infer_serial(const SnnBatch& batch);

/// OpenMP version; identical output to snn_infer_serial.
std::vector<InferenceResult> snn_infer_parallel(const SnnBatch& batch);

/// Per-thread buffers reused across samples.
struct SnnScratch {
    std::vector<double> current;
    std::vector<std::uint8_t> bits;
};

/// Fused encode + integrate for one sample: draws the same random matrix as
/// encode_poisson but keeps only one dimension of the spike train at a time.
InferenceResult snn_infer_one(std::span<const double> x_c, std::span<const double> weights,
                              std::size_t steps, double v_th, Rng& rng,
                              SnnScratch& scratch);

} // namespace memsnn
