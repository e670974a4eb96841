#include "memsnn/crossbar.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace memsnn {

namespace {

// Rounding slack for the codec range check; the inverse map can land a few
// ulps outside the window.
constexpr double kCodecSlack = 1e-12;

double relative_error(double target, double value)
{
    return std::abs(target - value) / target;
}

} // namespace

double weight_from_resistance(double r, double r_min, double r_max)
{
    if (!(r >= r_min * (1 - kCodecSlack) && r <= r_max * (1 + kCodecSlack))) {
        std::ostringstream msg;
        msg << "resistance " << r << " outside [" << r_min << ", " << r_max << "]";
        throw RangeError(msg.str());
    }
    const double g_min = 1.0 / r_max;
    const double g_max = 1.0 / r_min;
    const double w = (1.0 / r - g_min) / (g_max - g_min);
    return std::clamp(w, 0.0, 1.0);
}

double resistance_from_weight(double w, double r_min, double r_max)
{
    if (!(w >= 0.0 && w <= 1.0))
        throw std::domain_error("weight " + std::to_string(w) + " outside [0, 1]");
    return 1.0 / (w * (1.0 / r_min - 1.0 / r_max) + 1.0 / r_max);
}

void ProgramPolicy::validate() const
{
    auto require = [](bool ok, const std::string& what) {
        if (!ok)
            throw std::invalid_argument("program policy: " + what);
    };
    require(r_tolerance > 0, "r_tolerance must be > 0");
    require(max_n >= 1, "max_n must be >= 1");
    require(!positive_pulses.empty(), "positive pulse list is empty");
    require(!negative_pulses.empty(), "negative pulse list is empty");
    for (const auto& p : positive_pulses) {
        require(p.voltage > 0, "positive pulse with non-positive voltage");
        require(p.width > 0, "pulse width must be > 0");
    }
    for (const auto& p : negative_pulses) {
        require(p.voltage < 0, "negative pulse with non-negative voltage");
        require(p.width > 0, "pulse width must be > 0");
    }
}

FineStepCheck check_fine_steps(const DeviceParams& params,
                               const ProgramPolicy& policy, double r)
{
    auto smallest = [&](const std::vector<PulseSpec>& pulses) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : pulses) {
            const double after =
                apply_pulse(params, DeviceState{r}, p, policy.integration).resistance;
            const double step = std::abs(after - r) / r;
            if (step > 0)
                best = std::min(best, step);
        }
        return best;
    };
    FineStepCheck check{};
    check.smallest_positive_step = smallest(policy.positive_pulses);
    check.smallest_negative_step = smallest(policy.negative_pulses);
    check.positive_ok = check.smallest_positive_step < policy.r_tolerance;
    check.negative_ok = check.smallest_negative_step < policy.r_tolerance;
    return check;
}

ResistanceWindow resistance_window(const DeviceParams& params,
                                   const ProgramPolicy& policy)
{
    ResistanceWindow window{std::numeric_limits<double>::infinity(),
                            -std::numeric_limits<double>::infinity()};
    auto visit = [&](const std::vector<PulseSpec>& pulses) {
        for (const auto& p : pulses) {
            const double b = boundary(params, p.voltage);
            window.r_min = std::min(window.r_min, b);
            window.r_max = std::max(window.r_max, b);
        }
    };
    visit(policy.positive_pulses);
    visit(policy.negative_pulses);
    if (!(window.r_min > 0 && window.r_min < window.r_max))
        throw std::invalid_argument("pulse lists do not span a valid resistance window");
    return window;
}

CrossbarArray::CrossbarArray(std::size_t rows, std::size_t cols,
                             DeviceParams params, double r_min, double r_max,
                             double read_noise, std::uint64_t seed)
    : rows_(rows), cols_(cols), params_(params), r_min_(r_min), r_max_(r_max),
      read_noise_(0.0), states_(rows * cols, DeviceState{r_max}),
      noise_(Rng::stream(seed, "crossbar-noise"))
{
    params_.validate();
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("crossbar must have at least one device");
    if (!(r_min > 0 && r_min < r_max))
        throw std::invalid_argument("crossbar requires 0 < r_min < r_max");
    set_read_noise(read_noise);
}

void CrossbarArray::set_read_noise(double noise)
{
    if (!(noise >= 0.0 && noise < 1.0))
        throw std::invalid_argument("read noise must lie in [0, 1)");
    read_noise_ = noise;
}

void CrossbarArray::randomize(Rng& init)
{
    for (auto& s : states_)
        s.resistance = init.uniform(r_min_, r_max_);
}

void CrossbarArray::fill(double resistance)
{
    for (auto& s : states_)
        s.resistance = resistance;
}

std::size_t CrossbarArray::index(std::size_t row, std::size_t col) const
{
    if (row >= rows_ || col >= cols_)
        throw std::out_of_range("crossbar index (" + std::to_string(row) + ", " +
                                std::to_string(col) + ") out of range");
    return row * cols_ + col;
}

double CrossbarArray::resistance(std::size_t row, std::size_t col) const
{
    return states_[index(row, col)].resistance;
}

void CrossbarArray::set_resistance(std::size_t row, std::size_t col, double r)
{
    if (!(r > 0))
        throw std::invalid_argument("resistance must be > 0");
    states_[index(row, col)].resistance = r;
}

double CrossbarArray::noisy(double r, Rng& rng) const
{
    if (read_noise_ == 0.0)
        return r;
    return r * (1.0 + rng.uniform(-read_noise_, read_noise_));
}

double CrossbarArray::clamped_weight(double r) const
{
    return weight_from_resistance(std::clamp(r, r_min_, r_max_), r_min_, r_max_);
}

double CrossbarArray::read(std::size_t row, std::size_t col)
{
    return noisy(states_[index(row, col)].resistance, noise_);
}

WeightMatrix CrossbarArray::read_weights()
{
    WeightMatrix out(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i)
        out[i] = clamped_weight(noisy(states_[i].resistance, noise_));
    return out;
}

WeightMatrix CrossbarArray::true_weights() const
{
    WeightMatrix out(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i)
        out[i] = clamped_weight(states_[i].resistance);
    return out;
}

WeightMatrix CrossbarArray::noisy_weights(Rng& noise) const
{
    WeightMatrix out(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i)
        out[i] = clamped_weight(noisy(states_[i].resistance, noise));
    return out;
}

void CrossbarArray::apply(std::size_t row, std::size_t col, const PulseSpec& pulse,
                          const IntegrationConfig& integration)
{
    auto& s = states_[index(row, col)];
    s = apply_pulse(params_, s, pulse, integration);
}

ProgramReport CrossbarArray::program_device(std::size_t row, std::size_t col,
                                            double target_r,
                                            const ProgramPolicy& policy,
                                            std::vector<ProgramTraceRow>* trace)
{
    const std::size_t at = index(row, col);
    if (!(target_r >= r_min_ * (1 - kCodecSlack) && target_r <= r_max_ * (1 + kCodecSlack)))
        throw RangeError("program target outside [r_min, r_max]");

    ProgramReport report;
    auto finish = [&](bool converged, double seen) {
        report.converged = converged;
        report.final_relative_error = relative_error(target_r, seen);
        report.true_relative_error = relative_error(target_r, states_[at].resistance);
        return report;
    };

    for (std::size_t k = 0; k < policy.max_n; ++k) {
        // (a) read, (b) stop check
        const double seen = read(row, col);
        if (relative_error(target_r, seen) <= policy.r_tolerance) {
            report.skipped = (k == 0);
            return finish(true, seen);
        }

        // (c) predict every candidate from the read value, keep the closest;
        // ties go to the shorter pulse
        const auto& candidates =
            target_r > seen ? policy.positive_pulses : policy.negative_pulses;
        const PulseSpec* best = nullptr;
        double best_distance = std::numeric_limits<double>::infinity();
        double best_prediction = seen;
        for (const auto& p : candidates) {
            const double predicted =
                apply_pulse(params_, DeviceState{seen}, p, policy.integration).resistance;
            const double distance = std::abs(predicted - target_r);
            if (distance < best_distance ||
                (distance == best_distance && p.width < best->width)) {
                best = &p;
                best_distance = distance;
                best_prediction = predicted;
            }
        }

        // (d) write
        states_[at] = apply_pulse(params_, states_[at], *best, policy.integration);
        report.iterations = k + 1;
        if (trace)
            trace->push_back({row, col, k + 1, target_r, seen, best->voltage,
                              best->width, best_prediction, states_[at].resistance});

        // (e) verify with an independent read
        const double verified = read(row, col);
        if (relative_error(target_r, verified) <= policy.r_tolerance)
            return finish(true, verified);
        if (k + 1 == policy.max_n)
            return finish(false, verified);
    }
    return finish(false, read(row, col));
}

std::vector<ProgramReport>
CrossbarArray::program_weights(std::span<const double> targets,
                               const ProgramPolicy& policy,
                               std::vector<ProgramTraceRow>* trace)
{
    if (targets.size() > states_.size())
        throw std::invalid_argument("weight count " + std::to_string(targets.size()) +
                                    " exceeds crossbar capacity " +
                                    std::to_string(states_.size()));
    std::vector<ProgramReport> reports;
    reports.reserve(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double target = resistance_from_weight(targets[i], r_min_, r_max_);
        reports.push_back(program_device(i / cols_, i % cols_, target, policy, trace));
    }
    return reports;
}

void CrossbarArray::write_csv(std::ostream& out) const
{
    out << "row,col,resistance_ohms\n";
    out.precision(17);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            out << r << ',' << c << ',' << states_[r * cols_ + c].resistance << '\n';
}

void CrossbarArray::read_csv(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.rfind("row", 0) == 0)
            continue;
        std::istringstream fields(line);
        std::size_t r = 0, c = 0;
        double value = 0;
        char comma1 = 0, comma2 = 0;
        if (!(fields >> r >> comma1 >> c >> comma2 >> value) || comma1 != ',' ||
            comma2 != ',')
            throw std::runtime_error("crossbar csv: malformed line " +
                                     std::to_string(line_no));
        set_resistance(r, c, value);
    }
}

void write_program_trace_csv(std::ostream& out, std::span<const ProgramTraceRow> rows)
{
    out << "row,col,iteration,target_ohms,read_ohms,voltage,width_s,predicted_ohms,"
           "actual_ohms\n";
    out.precision(10);
    for (const auto& t : rows)
        out << t.row << ',' << t.col << ',' << t.iteration << ',' << t.target << ','
            << t.read_before << ',' << t.voltage << ',' << t.width << ','
            << t.predicted << ',' << t.actual << '\n';
}

} // namespace memsnn
