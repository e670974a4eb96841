#include "memsnn/pipelines.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

#include "memsnn/kernels.hpp"
#include "memsnn/spiking.hpp"

namespace memsnn {

namespace {

double percent(std::size_t correct, std::size_t total)
{
    return total ? 100.0 * static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

CrossbarArray make_array(const ExperimentConfig& config)
{
    const auto window = resistance_window(config.device, config.program_policy());
    CrossbarArray array(config.array_rows, config.array_cols, config.device, window.r_min,
                        window.r_max, config.read_noise, config.seed);
    Rng init = Rng::stream(config.seed, "crossbar-init");
    array.randomize(init);
    return array;
}

void check_capacity(const ExperimentConfig& config, std::size_t synapses)
{
    const std::size_t capacity = config.array_rows * config.array_cols;
    if (synapses > capacity)
        throw std::invalid_argument("linear layer of " + std::to_string(synapses) +
                                    " weights exceeds the " + std::to_string(capacity) +
                                    "-device crossbar");
}

std::vector<double> first(const std::vector<double>& v, std::size_t n)
{
    return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)};
}

} // namespace

const char* to_string(EvalMode mode)
{
    switch (mode) {
    case EvalMode::Ann:
        return "ann";
    case EvalMode::Snn:
        return "snn";
    case EvalMode::SnnMemristor:
        return "snn_memristor";
    }
    return "?";
}

Dataset prepare_dataset(const ExperimentConfig& config)
{
    std::vector<RawSample> pool, test;
    if (config.data_format == "imdb") {
        pool = load_imdb_split(config.imdb_dir, "train");
        test = load_imdb_split(config.imdb_dir, "test");
    } else {
        pool = load_tsv(config.train_path);
        test = load_tsv(config.test_path);
    }
    if (config.test_size > 0 && config.test_size < test.size())
        test = subsample(test, config.test_size, config.seed);
    return prepare_dataset(config, pool, test);
}

Dataset prepare_dataset(const ExperimentConfig& config, std::span<const RawSample> train_pool,
                        std::span<const RawSample> test)
{
    if (train_pool.empty())
        throw std::runtime_error("training pool is empty");
    if (test.empty())
        throw std::runtime_error("test set is empty");
    auto parts = split_dataset(train_pool, config.train_size, config.validation_size, config.seed);

    std::vector<std::vector<std::string>> tokens;
    tokens.reserve(parts.train.size());
    for (const auto& s : parts.train)
        tokens.push_back(tokenize(s.text));

    Dataset data;
    data.vocab = Vocabulary::build(tokens, config.min_frequency);
    data.train.split = Split::Train;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto ids = data.vocab.encode(tokens[i]);
        if (!ids.empty())
            data.train.samples.push_back({std::move(ids), parts.train[i].label});
    }
    data.validation = make_corpus(parts.validation, data.vocab, Split::Validation);
    data.test = make_corpus(test, data.vocab, Split::Test);
    if (data.train.samples.empty())
        throw std::runtime_error("no usable training samples");
    return data;
}

NetworkParams init_params(const ExperimentConfig& config, const Vocabulary& vocab)
{
    const std::size_t dim = config.embedding_dim;
    NetworkParams params(vocab.size(), dim, config.eta, config.epsilon, Vocabulary::kPad);
    Rng init = Rng::stream(config.seed, "init");

    std::vector<bool> found(vocab.size(), false);
    if (!config.word_vectors.empty()) {
        auto wv = load_word_vectors(config.word_vectors, vocab, dim);
        minmax_normalize_columns(wv.raw, wv.found);
        params.embedding = std::move(wv.raw);
        found = std::move(wv.found);
    }
    for (std::size_t r = 0; r < vocab.size(); ++r) {
        auto row = params.embedding.row(r);
        for (auto& v : row) {
            // Draw for every row so the stream does not depend on coverage.
            const double u = init.uniform();
            if (!found[r])
                v = u;
        }
    }
    for (auto& v : params.embedding.row(Vocabulary::kUnk))
        v = 0.5;
    for (auto& v : params.embedding.row(Vocabulary::kPad))
        v = 0.0;
    for (auto& w : params.linear)
        w = init.uniform();
    return params;
}

EvalResult evaluate(const Model& model, const Corpus& corpus, EvalMode mode, std::uint64_t seed,
                    const std::string& tag)
{
    EvalResult result;
    result.samples = corpus.samples.size();
    if (corpus.samples.empty())
        return result;

    std::vector<std::vector<double>> inputs;
    inputs.reserve(corpus.samples.size());
    for (const auto& s : corpus.samples)
        inputs.push_back(embed_and_pool(s.ids, model.params));

    std::size_t correct = 0;
    double loss = 0.0;
    if (mode == EvalMode::Ann) {
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const double y =
                output_probability(linear_forward(inputs[i], model.params.linear), model.offset);
            const int label = corpus.samples[i].label;
            correct += (y >= 0.5) == (label == 1);
            loss += bce_loss(y, label);
        }
    } else {
        SnnBatch batch;
        batch.inputs = inputs;
        batch.steps = model.steps;
        batch.v_th = model.v_th;
        batch.encoder_seed = seed;
        batch.encoder_stream = "encoder-" + tag;
        if (mode == EvalMode::SnnMemristor) {
            if (!model.array)
                throw std::invalid_argument("memristor evaluation needs a programmed crossbar");
            const auto noise_seed = Rng::stream(seed, "read-noise-" + tag).next_u64();
            batch.weights = WeightSource::memristive(*model.array, model.params.dim(), noise_seed);
        } else {
            batch.weights = WeightSource::software(model.params.linear);
        }
        const auto results = snn_infer_parallel(batch);
        for (std::size_t i = 0; i < results.size(); ++i) {
            const int label = corpus.samples[i].label;
            correct += snn_positive(results[i].rate) == (label == 1);
            loss += bce_loss(output_probability(results[i].rate, model.offset), label);
        }
    }
    result.accuracy = percent(correct, corpus.samples.size());
    result.loss = loss / static_cast<double>(corpus.samples.size());
    return result;
}

TrainedAnn train_ann(const ExperimentConfig& config, const Dataset& data)
{
    return train_ann(config, data, init_params(config, data.vocab));
}

TrainedAnn train_ann(const ExperimentConfig& config, const Dataset& data, NetworkParams initial)
{
    if (data.train.samples.empty())
        throw std::runtime_error("train_ann: empty training set");
    TrainedAnn out;
    NetworkParams params = std::move(initial);
    out.params = params;
    Rng shuffle = Rng::stream(config.seed, "shuffle");
    std::vector<std::size_t> order(data.train.samples.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;

    double best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle.shuffle(order.begin(), order.end());
        std::size_t correct = 0;
        double loss = 0.0;
        for (std::size_t i : order) {
            const auto& s = data.train.samples[i];
            const auto x = embed_and_pool(s.ids, params);
            const double y = output_probability(linear_forward(x, params.linear), config.offset);
            loss += bce_loss(y, s.label);
            correct += (y >= 0.5) == (s.label == 1);
            const auto g_s = grad_linear(y, s.label, x);
            std::vector<RowGradient> g_e;
            if (!config.freeze_embedding)
                g_e = grad_embedding(y, s.label, params.linear, s.ids, params.pad_id);
            adagrad_update(params, g_s, g_e);
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.train_accuracy = percent(correct, order.size());
        m.train_loss = loss / static_cast<double>(order.size());
        const Model current{params, config.offset, config.v_th, config.T, std::nullopt};
        const auto val = evaluate(current, data.validation, EvalMode::Ann, config.seed, "validation");
        m.validation_accuracy = val.accuracy;
        m.validation_loss = val.loss;
        out.history.push_back(m);
        // Without a validation split the last epoch is kept.
        const double score = data.validation.samples.empty() ? -static_cast<double>(epoch) : val.loss;
        if (score < best_loss) {
            best_loss = score;
            out.params = params;
            out.best_epoch = epoch;
        }
    }
    return out;
}

Model convert_to_snn(const NetworkParams& params, const ExperimentConfig& config)
{
    Model model;
    model.params = params;
    model.params.validate();
    // Only used for reporting a loss; decisions come from the rate alone.
    model.offset = -0.5;
    model.v_th = config.v_th;
    model.steps = config.T;
    return model;
}

MappingResult map_to_memristors(Model& model, const ExperimentConfig& config)
{
    const auto& weights = model.params.linear;
    check_capacity(config, weights.size());
    const auto policy = config.program_policy();
    policy.validate();
    CrossbarArray array = make_array(config);

    MappingResult result;
    result.reports = array.program_weights(weights, policy, &result.trace);
    const auto back = array.true_weights();
    double sq = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        sq += (back[i] - weights[i]) * (back[i] - weights[i]);
    result.weight_distance = std::sqrt(sq);
    result.weight_rms = std::sqrt(sq / static_cast<double>(weights.size()));
    model.array = std::move(array);
    return result;
}

TrainedSnn train_snn_direct(const ExperimentConfig& config, const Dataset& data)
{
    return train_snn_direct(config, data, init_params(config, data.vocab));
}

TrainedSnn train_snn_direct(const ExperimentConfig& config, const Dataset& data,
                            NetworkParams initial)
{
    if (data.train.samples.empty())
        throw std::runtime_error("train_snn_direct: empty training set");
    const std::size_t dim = initial.dim();
    const auto policy = config.program_policy();
    policy.validate();

    Model model;
    model.params = std::move(initial);
    model.offset = config.offset;
    model.v_th = config.v_th;
    model.steps = config.T;
    if (config.use_memristors) {
        check_capacity(config, dim);
        model.array = make_array(config);
        model.params.linear = first(model.array->true_weights(), dim);
    }
    NetworkParams& params = model.params;

    TrainedSnn out;
    out.model = model;
    Rng encoder = Rng::stream(config.seed, "encoder-train");
    Rng shuffle = Rng::stream(config.seed, "shuffle");
    Rng trace_noise = Rng::stream(config.seed, "trace-noise");
    std::vector<std::size_t> order(data.train.samples.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;

    SnnScratch scratch;
    std::vector<ProgramTraceRow> step_trace;
    double best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle.shuffle(order.begin(), order.end());
        std::size_t correct = 0;
        double loss = 0.0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            const auto& s = data.train.samples[order[k]];
            const auto x = embed_and_pool(s.ids, params);
            const std::vector<double> w =
                model.array ? first(model.array->read_weights(), dim) : params.linear;
            const auto res = snn_infer_one(x, w, config.T, config.v_th, encoder, scratch);
            const double y = output_probability(res.rate, config.offset);
            loss += bce_loss(y, s.label);
            correct += snn_positive(res.rate) == (s.label == 1);

            const auto g_s = grad_linear(y, s.label, x);
            std::vector<RowGradient> g_e;
            if (!config.freeze_embedding)
                g_e = grad_embedding(y, s.label, w, s.ids, params.pad_id);
            adagrad_update(params, g_s, g_e);

            if (model.array) {
                step_trace.clear();
                const auto reports = model.array->program_weights(params.linear, policy, &step_trace);
                for (const auto& r : reports) {
                    ++out.programming.calls;
                    out.programming.skipped += r.skipped;
                    out.programming.converged += r.converged;
                    out.programming.pulses += r.iterations;
                    out.programming.max_true_error =
                        std::max(out.programming.max_true_error, r.true_relative_error);
                }
                for (const auto& t : step_trace)
                    if (t.row == 0 && t.col == 0)
                        out.programming_trace.push_back(t);
            }

            if (k % config.trace_every == 0) {
                const auto actual =
                    model.array ? model.array->true_weights() : params.linear;
                const auto measured =
                    model.array ? model.array->noisy_weights(trace_noise) : params.linear;
                for (std::size_t j = 0; j < dim; ++j)
                    out.weight_trace.push_back(
                        {epoch, k, j, params.linear[j], actual[j], measured[j]});
            }
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.train_accuracy = percent(correct, order.size());
        m.train_loss = loss / static_cast<double>(order.size());
        const auto mode = model.array ? EvalMode::SnnMemristor : EvalMode::Snn;
        const auto val = evaluate(model, data.validation, mode, config.seed, "validation");
        m.validation_accuracy = val.accuracy;
        m.validation_loss = val.loss;
        out.history.push_back(m);
        const double score = data.validation.samples.empty() ? -static_cast<double>(epoch) : val.loss;
        if (score < best_loss) {
            best_loss = score;
            out.model = model;
            out.best_epoch = epoch;
        }
    }
    return out;
}

RunMetrics run_experiment(const ExperimentConfig& config, const Dataset& data,
                          RunArtifacts* artifacts)
{
    const auto start = std::chrono::steady_clock::now();
    RunMetrics metrics;
    metrics.fingerprint = config.fingerprint();
    metrics.seed = config.seed;
    metrics.approach = config.approach;
    metrics.vocab_size = data.vocab.size();

    if (config.approach == 1) {
        auto trained = train_ann(config, data);
        metrics.history = trained.history;
        metrics.best_epoch = trained.best_epoch;
        const Model ann{trained.params, config.offset, config.v_th, config.T, std::nullopt};
        metrics.test_accuracy["ann"] =
            evaluate(ann, data.test, EvalMode::Ann, config.seed, "test").accuracy;
        Model snn = convert_to_snn(trained.params, config);
        metrics.test_accuracy["snn"] =
            evaluate(snn, data.test, EvalMode::Snn, config.seed, "test").accuracy;
        auto mapping = map_to_memristors(snn, config);
        metrics.test_accuracy["snn_memristor"] =
            evaluate(snn, data.test, EvalMode::SnnMemristor, config.seed, "test").accuracy;
        for (const auto& r : mapping.reports) {
            ++metrics.programming.calls;
            metrics.programming.skipped += r.skipped;
            metrics.programming.converged += r.converged;
            metrics.programming.pulses += r.iterations;
            metrics.programming.max_true_error =
                std::max(metrics.programming.max_true_error, r.true_relative_error);
        }
        metrics.programming_trace = std::move(mapping.trace);
        metrics.weight_distance = mapping.weight_distance;
        if (artifacts) {
            artifacts->params = trained.params;
            artifacts->array = snn.array;
        }
    } else {
        auto trained = train_snn_direct(config, data);
        metrics.history = trained.history;
        metrics.best_epoch = trained.best_epoch;
        metrics.test_accuracy["snn"] =
            evaluate(trained.model, data.test, EvalMode::Snn, config.seed, "test").accuracy;
        if (trained.model.array)
            metrics.test_accuracy["snn_memristor"] =
                evaluate(trained.model, data.test, EvalMode::SnnMemristor, config.seed, "test")
                    .accuracy;
        metrics.weight_trace = std::move(trained.weight_trace);
        metrics.programming_trace = std::move(trained.programming_trace);
        metrics.programming = trained.programming;
        if (artifacts) {
            artifacts->params = trained.model.params;
            artifacts->array = trained.model.array;
        }
    }
    metrics.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return metrics;
}

namespace {

std::string fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

double round2(double v)
{
    return std::round(v * 100.0) / 100.0;
}

} // namespace

void write_metrics_csv(std::ostream& out, const RunMetrics& metrics)
{
    out << "epoch,train_accuracy,train_loss,validation_accuracy,validation_loss,best\n";
    for (const auto& m : metrics.history)
        out << m.epoch << ',' << fixed(m.train_accuracy, 2) << ',' << fixed(m.train_loss, 6) << ','
            << fixed(m.validation_accuracy, 2) << ',' << fixed(m.validation_loss, 6) << ','
            << (m.epoch == metrics.best_epoch ? 1 : 0) << '\n';
}

void write_summary_json(std::ostream& out, const RunMetrics& metrics)
{
    nlohmann::ordered_json j;
    j["fingerprint"] = metrics.fingerprint;
    j["seed"] = metrics.seed;
    j["approach"] = metrics.approach;
    j["vocab_size"] = metrics.vocab_size;
    j["best_epoch"] = metrics.best_epoch;
    auto& acc = j["test_accuracy"];
    acc = nlohmann::ordered_json::object();
    for (const auto& [mode, value] : metrics.test_accuracy)
        acc[mode] = round2(value);
    auto& epochs = j["epochs"];
    epochs = nlohmann::ordered_json::array();
    for (const auto& m : metrics.history)
        epochs.push_back({{"epoch", m.epoch},
                          {"train_accuracy", round2(m.train_accuracy)},
                          {"train_loss", m.train_loss},
                          {"validation_accuracy", round2(m.validation_accuracy)},
                          {"validation_loss", m.validation_loss}});
    j["programming"] = {{"calls", metrics.programming.calls},
                        {"skipped", metrics.programming.skipped},
                        {"converged", metrics.programming.converged},
                        {"pulses", metrics.programming.pulses},
                        {"max_true_relative_error", metrics.programming.max_true_error}};
    if (metrics.weight_distance)
        j["weight_distance"] = *metrics.weight_distance;
    j["seconds"] = metrics.seconds;
    out << j.dump(2) << '\n';
}

void write_weight_trace_csv(std::ostream& out, const std::vector<WeightTraceRow>& rows)
{
    out << "epoch,sample,synapse,expected,actual,measured\n";
    for (const auto& r : rows)
        out << r.epoch << ',' << r.sample << ',' << r.synapse << ',' << fixed(r.expected, 8) << ','
            << fixed(r.actual, 8) << ',' << fixed(r.measured, 8) << '\n';
}

} // namespace memsnn
