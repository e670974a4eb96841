#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "memsnn/config.hpp"
#include "memsnn/crossbar.hpp"
#include "memsnn/netcore.hpp"
#include "memsnn/textdata.hpp"

namespace memsnn {

/// Vocabulary plus the three encoded splits of one experiment.
struct Dataset {
    Vocabulary vocab;
    Corpus train;
    Corpus validation;
    Corpus test;
};

/// Loads per config.data_format, splits the training pool, and builds the
/// vocabulary from the training part only.
Dataset prepare_dataset(const ExperimentConfig& config);

/// Builds a dataset from raw samples already in memory.
Dataset prepare_dataset(const ExperimentConfig& config, std::span<const RawSample> train_pool,
                        std::span<const RawSample> test);

/// Embedding from config.word_vectors when given (min-max normalised per
/// column), uniform [0, 1] otherwise; [unk] rows at 0.5, [pad] at 0. Linear
/// weights uniform in [0, 1].
NetworkParams init_params(const ExperimentConfig& config, const Vocabulary& vocab);

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_accuracy = 0; ///< percent, online during the epoch
    double train_loss = 0;
    double validation_accuracy = 0;
    double validation_loss = 0;
};

struct WeightTraceRow {
    std::size_t epoch;
    std::size_t sample; ///< index within the epoch
    std::size_t synapse;
    double expected;    ///< Adagrad shadow weight
    double actual;      ///< codec of the noiseless device state
    double measured;    ///< codec of one noisy read
};

enum class EvalMode { Ann, Snn, SnnMemristor };
const char* to_string(EvalMode mode);

/// A trained network in deployable form.
struct Model {
    NetworkParams params;
    double offset = 0.0; ///< added before the sigmoid when a probability is needed
    double v_th = 50.0;
    std::size_t steps = 1000;
    std::optional<CrossbarArray> array; ///< holds the linear weights when present
};

struct EvalResult {
    double accuracy = 0; ///< percent
    double loss = 0;     ///< mean BCE of sigmoid(V_c or rate + offset)
    std::size_t samples = 0;
};

/// Accuracy on `corpus`. ANN: sigmoid(V_c + C) >= 0.5. SNN modes: rate > 0.5,
/// sample i encoded from Rng::stream(seed, "encoder-<tag>", i); memristor
/// mode also reads the crossbar with per-sample noise.
EvalResult evaluate(const Model& model, const Corpus& corpus, EvalMode mode,
                    std::uint64_t seed, const std::string& tag);

/// Best-validation-loss checkpoint and the per-epoch history behind it.
struct TrainedAnn {
    NetworkParams params;
    std::vector<EpochMetrics> history;
    std::size_t best_epoch = 0;
};

TrainedAnn train_ann(const ExperimentConfig& config, const Dataset& data);
TrainedAnn train_ann(const ExperimentConfig& config, const Dataset& data, NetworkParams initial);

/// Keeps the weights, drops the sigmoid: classification by rate > 0.5 with
/// the configured threshold and train length.
Model convert_to_snn(const NetworkParams& params, const ExperimentConfig& config);

struct MappingResult {
    std::vector<ProgramReport> reports;
    std::vector<ProgramTraceRow> trace;
    double weight_distance = 0; ///< Euclidean, target vs noiseless read-back
    double weight_rms = 0;      ///< root-mean-square of the same differences
};

/// Randomly initialised array, then program_weights with the configured
/// policy. Throws std::invalid_argument if the layer does not fit.
MappingResult map_to_memristors(Model& model, const ExperimentConfig& config);

struct ProgrammingStats {
    std::size_t calls = 0;
    std::size_t skipped = 0;
    std::size_t converged = 0;
    std::size_t pulses = 0;
    double max_true_error = 0;
};

struct TrainedSnn {
    Model model;                 ///< params.linear is the shadow copy
    std::vector<EpochMetrics> history;
    std::size_t best_epoch = 0;
    std::vector<WeightTraceRow> weight_trace;
    std::vector<ProgramTraceRow> programming_trace; ///< synapse 0 only
    ProgrammingStats programming;
};

/// Direct training of the rate-coded network, with the linear layer living
/// in the crossbar when config.use_memristors is set.
TrainedSnn train_snn_direct(const ExperimentConfig& config, const Dataset& data);
TrainedSnn train_snn_direct(const ExperimentConfig& config, const Dataset& data,
                            NetworkParams initial);

/// Everything a run reports.
struct RunMetrics {
    std::string fingerprint;
    std::uint64_t seed = 0;
    int approach = 1;
    std::vector<EpochMetrics> history;
    std::size_t best_epoch = 0;
    std::map<std::string, double> test_accuracy; ///< keyed by EvalMode name
    std::vector<WeightTraceRow> weight_trace;
    std::vector<ProgramTraceRow> programming_trace;
    ProgrammingStats programming;
    std::optional<double> weight_distance;
    std::size_t vocab_size = 0;
    double seconds = 0;
};

/// Artifacts a run leaves behind besides its metrics.
struct RunArtifacts {
    std::optional<NetworkParams> params;
    std::optional<CrossbarArray> array;
};

/// Full Approach 1 or 2 chain on `data`.
RunMetrics run_experiment(const ExperimentConfig& config, const Dataset& data,
                          RunArtifacts* artifacts = nullptr);

void write_metrics_csv(std::ostream& out, const RunMetrics& metrics);
void write_summary_json(std::ostream& out, const RunMetrics& metrics);
void write_weight_trace_csv(std::ostream& out, const std::vector<WeightTraceRow>& rows);

} // namespace memsnn
