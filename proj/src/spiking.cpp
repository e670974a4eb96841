#include "memsnn/spiking.hpp"

#include <ostream>
#include <stdexcept>
#include <string>

namespace memsnn {

SpikeTrain::SpikeTrain(std::size_t dims, std::size_t steps)
    : dims_(dims), steps_(steps), bits_(dims * steps, 0)
{
    if (steps == 0)
        throw std::invalid_argument("spike train needs T >= 1");
}

std::vector<double> SpikeTrain::mean_rates() const
{
    std::vector<double> rates(dims_, 0.0);
    for (std::size_t d = 0; d < dims_; ++d) {
        std::size_t count = 0;
        for (auto b : row(d))
            count += b;
        rates[d] = static_cast<double>(count) / static_cast<double>(steps_);
    }
    return rates;
}

void SpikeTrain::write_raster_csv(std::ostream& out) const
{
    out << "t,neuron,bit\n";
    for (std::size_t t = 0; t < steps_; ++t)
        for (std::size_t d = 0; d < dims_; ++d)
            out << t << ',' << d << ',' << static_cast<int>(at(d, t)) << '\n';
}

SpikeTrain encode_poisson(std::span<const double> x_c, std::size_t steps, Rng& rng)
{
    for (std::size_t d = 0; d < x_c.size(); ++d)
        if (!(x_c[d] >= 0.0 && x_c[d] <= 1.0))
            throw std::domain_error("encode_poisson: component " + std::to_string(d) +
                                    " = " + std::to_string(x_c[d]) + " outside [0, 1]");
    SpikeTrain train(x_c.size(), steps);
    for (std::size_t d = 0; d < x_c.size(); ++d) {
        auto bits = train.row(d);
        for (std::size_t t = 0; t < steps; ++t)
            bits[t] = x_c[d] > rng.uniform();
    }
    return train;
}

LifStep lif_step(LifNeuronState state, double weighted_input)
{
    state.v += weighted_input - (state.last_spike ? state.v_th : 0.0);
    state.last_spike = state.v >= state.v_th;
    return {state, state.last_spike};
}

namespace {

// Input current per step, sum_i w_i x_{i,t}.
std::vector<double> input_currents(std::span<const double> weights, const SpikeTrain& train)
{
    if (weights.size() != train.dims())
        throw std::invalid_argument("weight count " + std::to_string(weights.size()) +
                                    " does not match spike train dimension " +
                                    std::to_string(train.dims()));
    std::vector<double> current(train.steps(), 0.0);
    for (std::size_t d = 0; d < train.dims(); ++d) {
        const double w = weights[d];
        const auto bits = train.row(d);
        for (std::size_t t = 0; t < bits.size(); ++t)
            current[t] += w * bits[t];
    }
    return current;
}

} // namespace

InferenceResult run_inference(std::span<const double> weights, const SpikeTrain& train,
                              double v_th)
{
    const auto current = input_currents(weights, train);
    LifNeuronState state{0.0, v_th, false};
    std::size_t spikes = 0;
    for (double i : current) {
        const auto step = lif_step(state, i);
        state = step.state;
        spikes += step.spike;
    }
    const double residual = state.v - (state.last_spike ? v_th : 0.0);
    return {static_cast<double>(spikes) / static_cast<double>(train.steps()), residual,
            state.v, spikes};
}

double rate_estimate(double v_c, double v_th, double final_v, double v0, std::size_t steps)
{
    return v_c / v_th - (final_v - v0) / (v_th * static_cast<double>(steps));
}

std::vector<double> surrogate_grad_oracle(std::span<const double> weights,
                                          const SpikeTrain& train, double v_th,
                                          double loss_delta)
{
    const auto current = input_currents(weights, train);
    std::vector<double> grad(train.dims(), 0.0);
    LifNeuronState state{0.0, v_th, false};
    const double window = 1.0 / (2.0 * v_th);
    for (std::size_t t = 0; t < current.size(); ++t) {
        state = lif_step(state, current[t]).state;
        if (!(state.v > 0.0 && state.v < 2.0 * v_th))
            continue;
        for (std::size_t d = 0; d < train.dims(); ++d)
            grad[d] += window * train.at(d, t);
    }
    const double scale = loss_delta / static_cast<double>(train.steps());
    for (auto& g : grad)
        g *= scale;
    return grad;
}

bool voltages_in_window(std::span<const double> weights, const SpikeTrain& train,
                        double v_th)
{
    const auto current = input_currents(weights, train);
    LifNeuronState state{0.0, v_th, false};
    for (double i : current) {
        state = lif_step(state, i).state;
        if (!(state.v > 0.0 && state.v < 2.0 * v_th))
            return false;
    }
    return true;
}

} // namespace memsnn
