#include "memsnn/kernels.hpp"

#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace memsnn {

void WeightSource::weights_for(std::size_t sample, std::vector<double>& out) const
{
    if (!array) {
        out.assign(fixed.begin(), fixed.end());
        return;
    }
    Rng noise = Rng::stream(noise_seed, "read-noise", sample);
    out = array->noisy_weights(noise);
    out.resize(synapses);
}

InferenceResult snn_infer_one(std::span<const double> x_c, std::span<const double> weights,
                              std::size_t steps, double v_th, Rng& rng,
                              SnnScratch& scratch)
{
    if (weights.size() != x_c.size())
        throw std::invalid_argument("snn_infer_one: weight/input size mismatch");
    // Same draw order as encode_poisson, one dimension at a time.
    auto& bits = scratch.bits;
    bits.resize(steps);
    scratch.current.assign(steps, 0.0);
    double* current = scratch.current.data();
    for (std::size_t d = 0; d < x_c.size(); ++d) {
        const double x = x_c[d];
        const double w = weights[d];
        for (std::size_t t = 0; t < steps; ++t)
            bits[t] = x > rng.uniform();
        for (std::size_t t = 0; t < steps; ++t)
            current[t] += w * bits[t];
    }
    double v = 0.0;
    bool fired = false;
    std::size_t spikes = 0;
    for (std::size_t t = 0; t < steps; ++t) {
        v += current[t] - (fired ? v_th : 0.0);
        fired = v >= v_th;
        spikes += fired;
    }
    return {static_cast<double>(spikes) / static_cast<double>(steps), v - (fired ? v_th : 0.0), v,
            spikes};
}

std::vector<InferenceResult> snn_infer_serial(const SnnBatch& batch)
{
    std::vector<InferenceResult> out(batch.inputs.size());
    std::vector<double> w;
    for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
        Rng rng = Rng::stream(batch.encoder_seed, batch.encoder_stream, i);
        batch.weights.weights_for(i, w);
        const SpikeTrain train = encode_poisson(batch.inputs[i], batch.steps, rng);
        out[i] = run_inference(w, train, batch.v_th);
    }
    return out;
}

std::vector<InferenceResult> snn_infer_parallel(const SnnBatch& batch)
{
    // Nothing may throw inside the parallel region.
    for (const auto& x : batch.inputs) {
        if (x.size() != batch.weights.synapses)
            throw std::invalid_argument("snn_infer_parallel: weight/input size mismatch");
        for (double v : x)
            if (!(v >= 0.0 && v <= 1.0))
                throw std::domain_error("snn_infer_parallel: input outside [0, 1]");
    }
    if (batch.steps == 0)
        throw std::invalid_argument("snn_infer_parallel: T must be >= 1");

    const auto n = static_cast<std::ptrdiff_t>(batch.inputs.size());
    std::vector<InferenceResult> out(batch.inputs.size());
#pragma omp parallel
    {
        std::vector<double> w;
        SnnScratch scratch;
#pragma omp for schedule(dynamic, 8)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            Rng rng = Rng::stream(batch.encoder_seed, batch.encoder_stream, idx);
            batch.weights.weights_for(idx, w);
            out[idx] = snn_infer_one(batch.inputs[idx], w, batch.steps, batch.v_th, rng, scratch);
        }
    }
    return out;
}

} // namespace memsnn
