#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "memsnn/crossbar.hpp"
#include "memsnn/device_model.hpp"

namespace memsnn {

/// Field-level configuration problem; `field()` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field))
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Full parameterisation of one run. Defaults are the Approach 1 baseline.
struct ExperimentConfig {
    // [experiment]
    int approach = 1;
    std::uint64_t seed = 1;
    std::size_t epochs = 5;
    bool use_memristors = true; ///< Approach 2 only; false trains a software SNN
    std::size_t trace_every = 175;

    // [data]
    std::string data_format = "imdb"; ///< "imdb" or "tsv"
    std::string imdb_dir;
    std::string train_path; ///< tsv: training pool
    std::string test_path;  ///< tsv: test set
    std::string word_vectors;
    std::size_t train_size = 17500;
    std::size_t validation_size = 7500;
    std::size_t test_size = 0; ///< 0 keeps the whole test split
    std::size_t min_frequency = 10;
    std::size_t vocab_size = 20473; ///< expected size, checked loosely

    // [network]
    std::size_t embedding_dim = 100;
    std::size_t output_dim = 1;
    std::size_t batch_size = 1;
    double offset = -25.0;
    std::size_t T = 1000;
    double v_th = 50.0;
    double eta = 0.05;
    double epsilon = 1e-8;
    bool freeze_embedding = false;

    // [device]
    DeviceParams device{};

    // [programming]
    double positive_voltage = 0.9;
    std::vector<double> positive_widths_us{1, 2, 10, 20, 50, 100};
    double negative_voltage = -1.2;
    std::vector<double> negative_widths_us{1, 2, 10, 20, 100, 1000, 2000, 5000};
    double r_tolerance = 0.0005;
    std::size_t max_n = 5;
    IntegrationMode integration = IntegrationMode::Substeps;
    std::size_t substeps = 100;

    // [crossbar]
    std::size_t array_rows = 10;
    std::size_t array_cols = 10;
    double read_noise = 0.0;

    /// Reference baselines.
    static ExperimentConfig approach1_baseline();
    static ExperimentConfig approach2_baseline();

    /// TOML-style file: [section] headers, `key = value`, # comments,
    /// strings in double quotes, numeric lists in brackets. Unknown keys and
    /// bad values raise ConfigError naming the key.
    static ExperimentConfig load(const std::filesystem::path& path);
    static ExperimentConfig parse(std::string_view text);

    /// `section.key=value`, value in file syntax.
    void apply_override(std::string_view assignment);
    void set(std::string_view key, std::string_view value);

    /// Throws ConfigError for the first field that breaks its domain. Dataset
    /// paths are only checked when `check_data` is set.
    void validate(bool check_data = true) const;

    /// Every field, resolved, keyed "section.key", values canonical.
    std::map<std::string, std::string> resolved() const;
    std::string to_toml() const;

    /// Hex hash of resolved(); independent of field order in the file.
    std::string fingerprint() const;

    ProgramPolicy program_policy() const;
    IntegrationConfig integration_config() const { return {integration, substeps}; }

    static std::vector<std::string> keys();
};

} // namespace memsnn
