#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "memsnn/rng.hpp"

namespace memsnn {

/// e x T binary spikes, stored row-major by input dimension.
class SpikeTrain {
public:
    SpikeTrain() = default;
    SpikeTrain(std::size_t dims, std::size_t steps);

    std::size_t dims() const { return dims_; }
    std::size_t steps() const { return steps_; }

    std::uint8_t at(std::size_t dim, std::size_t t) const { return bits_[dim * steps_ + t]; }
    void set(std::size_t dim, std::size_t t, bool spike) { bits_[dim * steps_ + t] = spike; }

    std::span<const std::uint8_t> row(std::size_t dim) const
    {
        return {bits_.data() + dim * steps_, steps_};
    }
    std::span<std::uint8_t> row(std::size_t dim) { return {bits_.data() + dim * steps_, steps_}; }

    /// Realized firing rate per dimension, (1/T) sum_t x_t.
    std::vector<double> mean_rates() const;

    /// Debug raster as CSV "t,neuron,bit".
    void write_raster_csv(std::ostream& out) const;

private:
    std::size_t dims_ = 0;
    std::size_t steps_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct LifNeuronState {
    double v = 0.0;         ///< membrane voltage
    double v_th = 1.0;      ///< threshold, > 0
    bool last_spike = false; ///< Z_{t-1}
};

/// P_t = 1 iff x_c > u_t, u_t ~ U[0, 1), the whole e x T random matrix drawn
/// up front in row-major order. Throws std::domain_error for x_c outside
/// [0, 1] and std::invalid_argument for steps == 0.
SpikeTrain encode_poisson(std::span<const double> x_c, std::size_t steps, Rng& rng);

/// V_t = V_{t-1} + input - Z_{t-1} V_th; Z_t = [V_t >= V_th].
struct LifStep {
    LifNeuronState state;
    bool spike;
};
LifStep lif_step(LifNeuronState state, double weighted_input);

struct InferenceResult {
    double rate;       ///< (sum_t Z_t) / T
    double final_v;    ///< V_T - Z_T V_th: membrane left once the last reset lands
    double membrane_v; ///< V_T as integrated, before that reset
    std::size_t spikes;
};

/// Runs one output neuron over the whole train, starting from V_0 = 0.
InferenceResult run_inference(std::span<const double> weights, const SpikeTrain& train,
                              double v_th);

/// Rate predicted from the integrated input:
/// V_c / v_th - (final_v - v0) / (v_th T).
double rate_estimate(double v_c, double v_th, double final_v, double v0, std::size_t steps);

/// Spike-rate decision rule.
inline bool snn_positive(double rate) { return rate > 0.5; }

/// Surrogate-gradient reference:
/// (y - label) (1/T) sum_t h'(V_t - V_th) x_t, with the box window
/// h' = 1/(2 V_th) on 0 < V_t < 2 V_th. Test oracle only; training uses the
/// closed-form gradients in netcore.
std::vector<double> surrogate_grad_oracle(std::span<const double> weights,
                                          const SpikeTrain& train, double v_th,
                                          double loss_delta);

/// True when every V_t of the run lies strictly inside (0, 2 V_th).
bool voltages_in_window(std::span<const double> weights, const SpikeTrain& train,
                        double v_th);

} // namespace memsnn
