#pragma once

#include <cstddef>

namespace memsnn {

/// Fitted constants of the empirical bipolar switching model.
///
/// Positive bias drives the resistance up towards r_p(v), negative bias drives
/// it down towards r_n(v); the boundaries move linearly with the bias.
struct DeviceParams {
    double A_p = 0.21389;   ///< scale, positive branch (> 0)
    double A_n = -0.81302;  ///< scale, negative branch (< 0)
    double t_p = 1.6591;    ///< voltage constant, positive branch (V)
    double t_n = 1.5148;    ///< voltage constant, negative branch (V)
    double a0_p = 37087.0;  ///< boundary intercept, positive branch (ohm)
    double a1_p = -20193.0; ///< boundary slope, positive branch (ohm/V)
    double a0_n = 43430.0;  ///< boundary intercept, negative branch (ohm)
    double a1_n = 34333.0;  ///< boundary slope, negative branch (ohm/V)
    double dt = 1e-3;       ///< fixed integration step (s), literal mode only

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;
};

struct DeviceState {
    double resistance = 0.0; ///< ohm, > 0
};

struct PulseSpec {
    double voltage = 0.0; ///< V, signed, non-zero
    double width = 0.0;   ///< s, > 0
};

/// How a pulse width is turned into Euler steps.
enum class IntegrationMode {
    /// Fixed number of substeps per pulse; step = width / substeps.
    Substeps,
    /// N = max(1, floor(width / params.dt)) steps of params.dt.
    Literal,
};

struct IntegrationConfig {
    IntegrationMode mode = IntegrationMode::Substeps;
    std::size_t substeps = 100;
};

/// r_p(v) for v > 0, r_n(v) otherwise.
double boundary(const DeviceParams& params, double v);

/// dR/dt at the given state and bias. Exactly zero at v = 0 and once the
/// state sits on (or past) the active boundary.
double switching_rate(const DeviceParams& params, DeviceState state, double v);

/// Number of Euler steps and their length for a pulse under `config`.
struct StepPlan {
    std::size_t steps;
    double dt;
};
StepPlan plan_steps(const DeviceParams& params, const PulseSpec& pulse,
                    const IntegrationConfig& config);

/// Integrates a rectangular pulse with explicit Euler. The state never crosses
/// the active boundary; a step that would overshoot lands on it. Throws
/// std::invalid_argument for a non-positive width.
DeviceState apply_pulse(const DeviceParams& params, DeviceState state,
                        const PulseSpec& pulse,
                        const IntegrationConfig& config = {});

} // namespace memsnn
