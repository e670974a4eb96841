#include "doctest.h"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "memsnn/rng.hpp"
#include "memsnn/spiking.hpp"

using namespace memsnn;

namespace {

SpikeTrain constant_train(std::size_t dims, std::size_t steps, bool bit)
{
    SpikeTrain train(dims, steps);
    for (std::size_t d = 0; d < dims; ++d)
        for (std::size_t t = 0; t < steps; ++t)
            train.set(d, t, bit);
    return train;
}

SpikeTrain random_train(std::size_t dims, std::size_t steps, Rng& rng)
{
    std::vector<double> x(dims);
    for (auto& v : x)
        v = rng.uniform();
    return encode_poisson(x, steps, rng);
}

double v_c_of(const std::vector<double>& w, const SpikeTrain& train)
{
    const auto rates = train.mean_rates();
    double v = 0;
    for (std::size_t d = 0; d < w.size(); ++d)
        v += w[d] * rates[d];
    return v;
}

} // namespace

TEST_CASE("encode_poisson extremes and rate")
{
    Rng rng(1);
    const std::vector<double> ones{1.0, 1.0}, zeros{0.0, 0.0, 0.0}, half{0.5};
    const auto a = encode_poisson(ones, 100, rng);
    const auto b = encode_poisson(zeros, 100, rng);
    for (std::size_t t = 0; t < 100; ++t) {
        CHECK(a.at(0, t) == 1);
        CHECK(a.at(1, t) == 1);
        CHECK(b.at(2, t) == 0);
    }
    for (int rep = 0; rep < 20; ++rep) {
        const auto c = encode_poisson(half, 1000, rng);
        CHECK(std::abs(c.mean_rates()[0] - 0.5) <= 0.07);
    }
    CHECK(a.dims() == 2);
    CHECK(a.steps() == 100);
}

TEST_CASE("encode_poisson rejects inputs outside [0, 1]")
{
    Rng rng(1);
    const std::vector<double> bad{0.5, 1.2}, neg{-0.1}, nan{std::nan("")};
    CHECK_THROWS_AS(encode_poisson(bad, 10, rng), std::domain_error);
    CHECK_THROWS_AS(encode_poisson(neg, 10, rng), std::domain_error);
    CHECK_THROWS_AS(encode_poisson(nan, 10, rng), std::domain_error);
}

TEST_CASE("encoder is unbiased and converges like 1/sqrt(T)")
{
    Rng rng(2);
    const std::vector<double> x{0.1, 0.37, 0.8};
    for (std::size_t steps : {100u, 10000u}) {
        const auto train = encode_poisson(x, steps, rng);
        const auto rates = train.mean_rates();
        for (std::size_t d = 0; d < x.size(); ++d) {
            const double sigma = std::sqrt(x[d] * (1 - x[d]) / static_cast<double>(steps));
            CHECK(std::abs(rates[d] - x[d]) <= 5 * sigma);
        }
    }
}

TEST_CASE("lif_step examples")
{
    auto s = lif_step({0.0, 1.0, false}, 0.0);
    CHECK(s.state.v == 0.0);
    CHECK_FALSE(s.spike);

    // w = 1 every step, V_th = 2: spikes at t = 2, 4, ..., 10
    LifNeuronState st{0.0, 2.0, false};
    std::vector<int> fired;
    for (int t = 1; t <= 10; ++t) {
        const auto r = lif_step(st, 1.0);
        st = r.state;
        if (r.spike)
            fired.push_back(t);
    }
    CHECK(fired == std::vector<int>{2, 4, 6, 8, 10});
    CHECK(st.v == 2.0);

    // exact threshold fires
    CHECK(lif_step({0.0, 1.0, false}, 1.0).spike);
}

TEST_CASE("run_inference examples")
{
    const std::vector<double> one{1.0};
    const auto every = constant_train(1, 10, true);
    const auto r = run_inference(one, every, 2.0);
    CHECK(r.rate == 0.5);
    CHECK(r.spikes == 5);
    CHECK(r.final_v == 0.0);
    CHECK(r.membrane_v == 2.0);
    CHECK(snn_positive(run_inference(one, every, 1.0).rate));
    CHECK(run_inference(one, every, 1.0).rate == 1.0);
    CHECK(run_inference(one, constant_train(1, 10, false), 1.0).rate == 0.0);

    const std::vector<double> two{1.0, 1.0};
    CHECK_THROWS_AS(run_inference(two, every, 1.0), std::invalid_argument);
}

TEST_CASE("run_inference matches a reference simulation")
{
    // Reference values from an independent simulation of the same pattern.
    const std::vector<double> w{0.3, 0.7, 0.55, 0.9};
    SpikeTrain train(4, 40);
    for (std::size_t d = 0; d < 4; ++d)
        for (std::size_t t = 0; t < 40; ++t)
            train.set(d, t, (d * 7 + t * 3) % 5 < 2);
    const auto r = run_inference(w, train, 1.3);
    CHECK(r.spikes == 30);
    CHECK(r.rate == 0.75);
    CHECK(r.membrane_v == doctest::Approx(1.499999999999998).epsilon(1e-12));
    CHECK(r.final_v == doctest::Approx(0.19999999999999796).epsilon(1e-10));
}

TEST_CASE("rate_estimate examples")
{
    CHECK(rate_estimate(3.0, 3.0, 0.7, 0.7, 100) == 1.0);
    CHECK(rate_estimate(1.0, 2.0, 0.0, 0.0, 17) == 0.5);
    CHECK(rate_estimate(0.0, 2.0, 1.0, 0.0, 10) == doctest::Approx(-0.05));
}

TEST_CASE("rate relation holds for random trains")
{
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        const std::size_t dims = 1 + rng.below(8);
        const std::size_t steps = 1 + rng.below(300);
        std::vector<double> w(dims);
        for (auto& v : w)
            v = rng.uniform();
        const auto train = random_train(dims, steps, rng);
        const double v_th = rng.uniform(0.1, 4.0);
        const auto r = run_inference(w, train, v_th);
        const double vc = v_c_of(w, train);
        const double bound = 1.0 / static_cast<double>(steps);
        CHECK(std::abs(r.rate - rate_estimate(vc, v_th, r.final_v, 0.0, steps)) <= bound + 1e-12);
        CHECK(std::abs(r.rate - rate_estimate(vc, v_th, r.membrane_v, 0.0, steps)) <= bound + 1e-12);
        CHECK(r.rate >= 0.0);
        CHECK(r.rate <= 1.0);
    }
}

TEST_CASE("rate is non-increasing in the threshold")
{
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> w(6);
        for (auto& v : w)
            v = rng.uniform();
        const auto train = random_train(6, 200, rng);
        double prev = 2.0;
        for (double v_th = 0.2; v_th < 8; v_th *= 1.3) {
            const double rate = run_inference(w, train, v_th).rate;
            CHECK(rate <= prev);
            prev = rate;
        }
    }
}

TEST_CASE("surrogate gradient oracle")
{
    const std::vector<double> w{0.5, 0.5};
    const auto silent = constant_train(2, 20, false);
    for (double g : surrogate_grad_oracle(w, silent, 1.0, 0.3))
        CHECK(g == 0.0);

    // All voltages inside (0, 2 V_th): equals delta * mean spikes / (2 V_th).
    Rng rng(6);
    int checked = 0;
    for (int i = 0; i < 500 && checked < 50; ++i) {
        std::vector<double> wi(4);
        for (auto& v : wi)
            v = rng.uniform();
        const auto train = random_train(4, 50, rng);
        const double v_th = rng.uniform(1.0, 3.0);
        if (!voltages_in_window(wi, train, v_th))
            continue;
        ++checked;
        const double delta = rng.uniform(-1, 1);
        const auto g = surrogate_grad_oracle(wi, train, v_th, delta);
        const auto rates = train.mean_rates();
        for (std::size_t d = 0; d < 4; ++d)
            CHECK(std::abs(g[d] - delta * rates[d] / (2 * v_th)) <= 1e-12);
    }
    CHECK(checked >= 20);
}

TEST_CASE("voltages_in_window detects the open interval")
{
    const std::vector<double> one{1.0};
    CHECK(voltages_in_window(one, constant_train(1, 10, true), 1.0));
    // V_1 = 0 sits on the edge of the open window.
    CHECK_FALSE(voltages_in_window(one, constant_train(1, 10, false), 1.0));
    // Input 3 with V_th = 1 reaches 3 > 2 V_th.
    const std::vector<double> three{3.0};
    CHECK_FALSE(voltages_in_window(three, constant_train(1, 5, true), 1.0));
}

TEST_CASE("raster export")
{
    SpikeTrain t(2, 2);
    t.set(1, 0, true);
    std::ostringstream out;
    t.write_raster_csv(out);
    CHECK(out.str() == "t,neuron,bit\n0,0,0\n0,1,1\n1,0,0\n1,1,0\n");
}
