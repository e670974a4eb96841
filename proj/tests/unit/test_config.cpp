#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <functional>

#include "memsnn/config.hpp"

using namespace memsnn;

#ifndef MEMSNN_SOURCE_DIR
#error "MEMSNN_SOURCE_DIR must be defined"
#endif

namespace {

std::string field_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<no error>";
}

const std::string kRoot = MEMSNN_SOURCE_DIR;

} // namespace

TEST_CASE("baselines carry the reference values")
{
    const auto a1 = ExperimentConfig::approach1_baseline();
    CHECK(a1.approach == 1);
    CHECK(a1.offset == -25);
    CHECK(a1.v_th == 50);
    CHECK(a1.positive_widths_us == std::vector<double>{1, 2, 10, 20, 50, 100});
    CHECK(a1.negative_widths_us == std::vector<double>{1, 2, 10, 20, 100, 1000, 2000, 5000});
    CHECK(a1.train_size == 17500);
    CHECK(a1.validation_size == 7500);
    CHECK(a1.T == 1000);
    CHECK(a1.eta == 0.05);
    CHECK(a1.epsilon == 1e-8);
    CHECK(a1.r_tolerance == 0.0005);
    CHECK(a1.max_n == 5);
    CHECK(a1.array_rows * a1.array_cols == 100);

    const auto a2 = ExperimentConfig::approach2_baseline();
    CHECK(a2.approach == 2);
    CHECK(a2.offset == -0.5);
    CHECK(a2.v_th == 56.75);
    CHECK(a2.positive_widths_us == std::vector<double>{1, 2, 10, 20, 50});
    CHECK(a2.negative_widths_us == std::vector<double>{1, 2, 10, 20, 100});
}

TEST_CASE("shipped config files equal the baselines")
{
    auto a1 = ExperimentConfig::load(kRoot + "/configs/approach1.toml");
    auto a2 = ExperimentConfig::load(kRoot + "/configs/approach2.toml");
    CHECK(a1.fingerprint() == ExperimentConfig::approach1_baseline().fingerprint());
    CHECK(a2.fingerprint() == ExperimentConfig::approach2_baseline().fingerprint());
}

TEST_CASE("parse sections, comments, strings and lists")
{
    const auto c = ExperimentConfig::parse(R"(
# comment
[experiment]
approach = 2   # trailing comment
seed = 99

[data]
format = "tsv"
train_path = "a # not a comment.tsv"

[programming]
positive_widths_us = [3, 4.5]
integration = "literal"
)");
    CHECK(c.approach == 2);
    CHECK(c.seed == 99);
    CHECK(c.data_format == "tsv");
    CHECK(c.train_path == "a # not a comment.tsv");
    CHECK(c.positive_widths_us == std::vector<double>{3, 4.5});
    CHECK(c.integration == IntegrationMode::Literal);
}

TEST_CASE("errors name the offending field")
{
    CHECK(field_of([] { ExperimentConfig::parse("[experiment]\nbogus = 1\n"); }) == "experiment.bogus");
    CHECK(field_of([] { ExperimentConfig::parse("[network]\nT = abc\n"); }) == "network.T");
    CHECK(field_of([] { ExperimentConfig::parse("[network]\nT = -3\n"); }) == "network.T");
    CHECK(field_of([] { ExperimentConfig::parse("[experiment]\nuse_memristors = maybe\n"); }) ==
          "experiment.use_memristors");

    auto c = ExperimentConfig::approach1_baseline();
    CHECK(field_of([&] { c.validate(); }) == "data.imdb_dir");
    c.imdb_dir = "/definitely/not/here";
    CHECK(field_of([&] { c.validate(); }) == "data.imdb_dir");
    CHECK_NOTHROW(c.validate(false));

    auto d = ExperimentConfig::approach1_baseline();
    d.approach = 3;
    CHECK(field_of([&] { d.validate(false); }) == "experiment.approach");
    d = ExperimentConfig::approach1_baseline();
    d.read_noise = 1.5;
    CHECK(field_of([&] { d.validate(false); }) == "crossbar.read_noise");
    d = ExperimentConfig::approach1_baseline();
    d.positive_widths_us.clear();
    CHECK(field_of([&] { d.validate(false); }) == "programming.positive_widths_us");
    d = ExperimentConfig::approach1_baseline();
    d.embedding_dim = 101;
    CHECK(field_of([&] { d.validate(false); }) == "crossbar.rows");
    d = ExperimentConfig::approach1_baseline();
    d.data_format = "tsv";
    CHECK(field_of([&] { d.validate(); }) == "data.train_path");
}

TEST_CASE("overrides")
{
    auto c = ExperimentConfig::approach1_baseline();
    c.apply_override("network.T=4000");
    c.apply_override("programming.negative_widths_us = [1, 2]");
    c.apply_override("data.imdb_dir=\"/x y\"");
    CHECK(c.T == 4000);
    CHECK(c.negative_widths_us == std::vector<double>{1, 2});
    CHECK(c.imdb_dir == "/x y");
    CHECK(field_of([&] { c.apply_override("network.T"); }) == "network.T");
    CHECK(field_of([&] { c.apply_override("nope.key=1"); }) == "nope.key");
}

TEST_CASE("fingerprint is order independent and field sensitive")
{
    const auto a = ExperimentConfig::parse("[network]\nT = 200\nv_th = 40\n[experiment]\nseed = 5\n");
    const auto b = ExperimentConfig::parse("[experiment]\nseed = 5\n[network]\nv_th = 40\nT = 200\n");
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(a.fingerprint().size() == 16);

    const auto base = ExperimentConfig::approach1_baseline();
    for (const auto& key : ExperimentConfig::keys()) {
        auto changed = base;
        const auto value = base.resolved().at(key);
        std::string other;
        if (value == "true")
            other = "false";
        else if (value == "false")
            other = "true";
        else if (value.front() == '"')
            other = "\"something else\"";
        else if (value.front() == '[')
            other = "[7, 8]";
        else
            other = "3";
        if (key == "programming.integration")
            other = "\"literal\"";
        if (key == "data.format")
            other = "\"tsv\"";
        if (other == value)
            other = "4";
        changed.set(key, other);
        CAPTURE(key);
        CHECK(changed.fingerprint() != base.fingerprint());
    }
}

TEST_CASE("to_toml round trips exactly")
{
    auto c = ExperimentConfig::approach2_baseline();
    c.seed = 12345678901234ULL;
    c.read_noise = 0.1 + 0.2;
    c.device.A_p = 0.2138912345678901;
    const auto back = ExperimentConfig::parse(c.to_toml());
    CHECK(back.resolved() == c.resolved());
    CHECK(back.read_noise == c.read_noise);
    CHECK(back.device.A_p == c.device.A_p);
}

TEST_CASE("program policy converts microseconds")
{
    const auto p = ExperimentConfig::approach1_baseline().program_policy();
    REQUIRE(p.positive_pulses.size() == 6);
    CHECK(p.positive_pulses.back().width == doctest::Approx(100e-6));
    CHECK(p.negative_pulses.back().width == doctest::Approx(5e-3));
    CHECK(p.negative_pulses.back().voltage == -1.2);
}
