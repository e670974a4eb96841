#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "memsnn/device_model.hpp"
#include "memsnn/rng.hpp"

namespace memsnn {

/// Raised when a resistance outside [r_min, r_max] reaches the weight codec.
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

/// Conductance-linear weight: 1 at r_min, 0 at r_max.
double weight_from_resistance(double r, double r_min, double r_max);

/// Inverse of weight_from_resistance. Throws std::domain_error for w outside
/// [0, 1].
double resistance_from_weight(double w, double r_min, double r_max);

/// Pulse candidates and stop conditions for the predict-write-verify loop.
struct ProgramPolicy {
    std::vector<PulseSpec> positive_pulses;
    std::vector<PulseSpec> negative_pulses;
    double r_tolerance = 0.0005;
    std::size_t max_n = 5;
    IntegrationConfig integration{};

    void validate() const;
};

/// Checks that each pulse list holds at least one pulse whose predicted
/// resistance change at `r` stays inside the tolerance margin. Whether a
/// policy can terminate on its tolerance at all depends on this.
struct FineStepCheck {
    bool positive_ok;
    bool negative_ok;
    double smallest_positive_step; ///< relative to r
    double smallest_negative_step; ///< relative to r
};
FineStepCheck check_fine_steps(const DeviceParams& params,
                               const ProgramPolicy& policy, double r);

/// R_min/R_max: the extreme boundaries reachable by the configured pulses.
struct ResistanceWindow {
    double r_min;
    double r_max;
};
ResistanceWindow resistance_window(const DeviceParams& params,
                                   const ProgramPolicy& policy);

struct ProgramReport {
    bool converged = false;
    bool skipped = false;          ///< within tolerance before any pulse
    std::size_t iterations = 0;    ///< pulses applied
    double final_relative_error = 0.0; ///< as seen by the last (noisy) read
    double true_relative_error = 0.0;  ///< against the noiseless state
};

/// One pulse of the programming loop, as written to the programming trace.
struct ProgramTraceRow {
    std::size_t row;
    std::size_t col;
    std::size_t iteration;
    double target;
    double read_before; ///< noisy read the prediction started from
    double voltage;
    double width;
    double predicted;
    double actual;      ///< noiseless state after the pulse
};

using WeightMatrix = std::vector<double>; ///< row-major, rows * cols

/// A rows x cols grid of devices sharing one parameter set.
///
/// Reads are noisy: every call to read() draws fresh multiplicative noise from
/// the array's own stream, so access is single-writer during programming.
/// For parallel inference, snapshot() hands out the noiseless state and
/// noisy_weights() reads it with a caller-owned stream.
class CrossbarArray {
public:
    CrossbarArray(std::size_t rows, std::size_t cols, DeviceParams params,
                  double r_min, double r_max, double read_noise,
                  std::uint64_t seed);

    /// Every device uniformly random in [r_min, r_max], drawn from `init`.
    void randomize(Rng& init);
    void fill(double resistance);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return states_.size(); }
    const DeviceParams& params() const { return params_; }
    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }
    double read_noise() const { return read_noise_; }
    void set_read_noise(double noise);

    /// Noiseless state, for inspection and tests.
    double resistance(std::size_t row, std::size_t col) const;
    void set_resistance(std::size_t row, std::size_t col, double r);
    const std::vector<DeviceState>& states() const { return states_; }

    /// R * (1 + u), u ~ U[-read_noise, +read_noise]. Throws std::out_of_range.
    double read(std::size_t row, std::size_t col);

    /// read() then the codec, elementwise, clamped to [0, 1].
    WeightMatrix read_weights();

    /// Codec of the noiseless state.
    WeightMatrix true_weights() const;

    /// read_weights() against a caller-owned stream; leaves the array's own
    /// stream untouched, so it is safe to call concurrently.
    WeightMatrix noisy_weights(Rng& noise) const;

    void apply(std::size_t row, std::size_t col, const PulseSpec& pulse,
               const IntegrationConfig& integration);

    ProgramReport program_device(std::size_t row, std::size_t col,
                                 double target_r, const ProgramPolicy& policy,
                                 std::vector<ProgramTraceRow>* trace = nullptr);

    /// Programs every element of `targets` (row-major, may be shorter than
    /// the array). Devices whose read-back is already in tolerance are left
    /// alone.
    std::vector<ProgramReport>
    program_weights(std::span<const double> targets, const ProgramPolicy& policy,
                    std::vector<ProgramTraceRow>* trace = nullptr);

    /// CSV "row,col,resistance_ohms".
    void write_csv(std::ostream& out) const;
    void read_csv(std::istream& in);

private:
    std::size_t index(std::size_t row, std::size_t col) const;
    double noisy(double r, Rng& rng) const;
    double clamped_weight(double r) const;

    std::size_t rows_;
    std::size_t cols_;
    DeviceParams params_;
    double r_min_;
    double r_max_;
    double read_noise_;
    std::vector<DeviceState> states_;
    Rng noise_;
};

void write_program_trace_csv(std::ostream& out,
                             std::span<const ProgramTraceRow> rows);

} // namespace memsnn
