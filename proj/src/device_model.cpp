#include "memsnn/device_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace memsnn {

void DeviceParams::validate() const
{
    auto require = [](bool ok, const char* what) {
        if (!ok)
            throw std::invalid_argument(std::string("device: ") + what);
    };
    require(A_p > 0, "A_p must be > 0");
    require(A_n < 0, "A_n must be < 0");
    require(t_p > 0, "t_p must be > 0");
    require(t_n > 0, "t_n must be > 0");
    require(dt > 0, "dt must be > 0");
}

double boundary(const DeviceParams& params, double v)
{
    if (v > 0)
        return params.a0_p + params.a1_p * v;
    return params.a0_n + params.a1_n * v;
}

double switching_rate(const DeviceParams& params, DeviceState state, double v)
{
    const double r = state.resistance;
    const double edge = boundary(params, v);
    if (v > 0) {
        const double gap = edge - r;
        if (gap <= 0) // h(0) = 0
            return 0.0;
        return params.A_p * std::expm1(std::abs(v) / params.t_p) * gap * gap;
    }
    const double gap = r - edge;
    if (gap <= 0)
        return 0.0;
    return params.A_n * std::expm1(std::abs(v) / params.t_n) * gap * gap;
}

StepPlan plan_steps(const DeviceParams& params, const PulseSpec& pulse,
                    const IntegrationConfig& config)
{
    if (!(pulse.width > 0))
        throw std::invalid_argument("pulse width must be > 0");
    if (config.mode == IntegrationMode::Substeps) {
        const std::size_t n = config.substeps == 0 ? 1 : config.substeps;
        return {n, pulse.width / static_cast<double>(n)};
    }
    const double ratio = std::floor(pulse.width / params.dt);
    const std::size_t n = ratio < 1.0 ? 1 : static_cast<std::size_t>(ratio);
    return {n, params.dt};
}

DeviceState apply_pulse(const DeviceParams& params, DeviceState state,
                        const PulseSpec& pulse, const IntegrationConfig& config)
{
    const StepPlan plan = plan_steps(params, pulse, config);
    const double edge = boundary(params, pulse.voltage);
    const bool rising = pulse.voltage > 0;
    double r = state.resistance;
    for (std::size_t i = 0; i < plan.steps; ++i) {
        const double rate = switching_rate(params, DeviceState{r}, pulse.voltage);
        if (rate == 0.0)
            break;
        r += rate * plan.dt;
        if (rising ? r > edge : r < edge) {
            r = edge;
            break;
        }
    }
    return DeviceState{r};
}

} // namespace memsnn
