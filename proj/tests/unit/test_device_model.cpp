#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "memsnn/device_model.hpp"

using namespace memsnn;

namespace {
const DeviceParams kTable2{};
constexpr double us = 1e-6;
}

TEST_CASE("boundary evaluates both branches")
{
    CHECK(boundary(kTable2, 0.9) == doctest::Approx(18913.3).epsilon(1e-12));
    CHECK(boundary(kTable2, -1.2) == doctest::Approx(2230.4).epsilon(1e-12));
    CHECK(boundary(kTable2, 0.0) == 43430.0);
}

TEST_CASE("switching_rate values")
{
    CHECK(switching_rate(kTable2, {10000}, 0.0) == 0.0);
    CHECK(switching_rate(kTable2, {boundary(kTable2, 0.9)}, 0.9) == 0.0);
    CHECK(switching_rate(kTable2, {boundary(kTable2, -1.2)}, -1.2) == 0.0);
    // Reference values from an independent evaluation of the rate expression.
    CHECK(switching_rate(kTable2, {10000}, 0.9) == doctest::Approx(12238936.801365305).epsilon(1e-12));
    CHECK(switching_rate(kTable2, {10000}, -1.2) == doctest::Approx(-59298295.52105257).epsilon(1e-12));
    // Past the boundary the gate is closed.
    CHECK(switching_rate(kTable2, {20000}, 0.9) == 0.0);
    CHECK(switching_rate(kTable2, {2000}, -1.2) == 0.0);
}

TEST_CASE("zero bias is a fixed point everywhere")
{
    for (double r = 500; r < 60000; r *= 1.7)
        CHECK(switching_rate(kTable2, {r}, 0.0) == 0.0);
}

TEST_CASE("apply_pulse matches the reference integrator")
{
    struct Case {
        double r0, v, width, expected;
    };
    const Case cases[] = {
        {10000, 0.9, 10 * us, 10120.7478363247},
        {10000, 0.9, 100 * us, 11077.34885910903},
        {10000, -1.2, 10 * us, 9448.688053952508},
        {5000, -1.2, 1 * us, 4992.485314186667},
        {3000, 0.9, 50 * us, 4739.362525511275},
        {15000, -1.2, 5000 * us, 2421.343860086703},
    };
    for (const auto& c : cases) {
        CAPTURE(c.r0);
        CAPTURE(c.width);
        CHECK(apply_pulse(kTable2, {c.r0}, {c.v, c.width}).resistance ==
              doctest::Approx(c.expected).epsilon(1e-10));
    }
}

TEST_CASE("literal mode: one step of dt is clamped at the boundary")
{
    const IntegrationConfig literal{IntegrationMode::Literal, 100};
    const auto plan = plan_steps(kTable2, {0.9, kTable2.dt}, literal);
    CHECK(plan.steps == 1);
    CHECK(plan.dt == kTable2.dt);
    // 10000 + 1.2239e7 * 1e-3 would overshoot 18913.3.
    CHECK(apply_pulse(kTable2, {10000}, {0.9, kTable2.dt}, literal).resistance ==
          doctest::Approx(18913.3).epsilon(1e-12));
    // Baseline widths are shorter than dt: still one step.
    CHECK(plan_steps(kTable2, {0.9, 10 * us}, literal).steps == 1);
    CHECK(plan_steps(kTable2, {0.9, 2.5e-3}, literal).steps == 2);
}

TEST_CASE("substep mode divides the pulse evenly")
{
    const auto plan = plan_steps(kTable2, {0.9, 50 * us}, {IntegrationMode::Substeps, 100});
    CHECK(plan.steps == 100);
    CHECK(plan.dt == doctest::Approx(0.5 * us));
    CHECK_THROWS_AS(plan_steps(kTable2, {0.9, 0.0}, {}), std::invalid_argument);
}

TEST_CASE("long pulses converge to the boundary")
{
    // The gap closes like 1/t, so "long" means seconds of model time.
    const IntegrationConfig fine{IntegrationMode::Substeps, 1000000};
    const double up = apply_pulse(kTable2, {10000}, {0.9, 100.0}, fine).resistance;
    const double down = apply_pulse(kTable2, {10000}, {-1.2, 100.0}, fine).resistance;
    CHECK(std::abs(up - boundary(kTable2, 0.9)) <= 1.0);
    CHECK(std::abs(down - boundary(kTable2, -1.2)) <= 1.0);
}

TEST_CASE("pulses never cross the active boundary and move in the sign direction")
{
    for (double r = 2300; r < 18900; r += 731) {
        for (double w : {1 * us, 20 * us, 100 * us, 5000 * us}) {
            const double up = apply_pulse(kTable2, {r}, {0.9, w}).resistance;
            const double down = apply_pulse(kTable2, {r}, {-1.2, w}).resistance;
            CHECK(up > r);
            CHECK(up <= boundary(kTable2, 0.9));
            CHECK(down < r);
            CHECK(down >= boundary(kTable2, -1.2));
        }
    }
    // Starting on the boundary: unchanged.
    CHECK(apply_pulse(kTable2, {18913.3}, {0.9, 100 * us}).resistance == 18913.3);
}

TEST_CASE("halving the step changes the result by less than one step")
{
    for (double r : {3000.0, 8000.0, 15000.0}) {
        for (double v : {0.9, -1.2}) {
            const PulseSpec p{v, 20 * us};
            const double coarse = apply_pulse(kTable2, {r}, p, {IntegrationMode::Substeps, 100}).resistance;
            const double fine = apply_pulse(kTable2, {r}, p, {IntegrationMode::Substeps, 200}).resistance;
            const double last_step = std::abs(switching_rate(kTable2, {coarse}, v)) * p.width / 100;
            CAPTURE(r);
            CAPTURE(v);
            CHECK(std::abs(fine - coarse) < last_step);
        }
    }
}

TEST_CASE("parameter validation")
{
    DeviceParams p;
    CHECK_NOTHROW(p.validate());
    p.A_p = -1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.A_n = 0.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.dt = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
