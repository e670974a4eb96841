// Command-line harness: train, eval, convert, map and sweep.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "memsnn/config.hpp"
#include "memsnn/pipelines.hpp"

namespace fs = std::filesystem;
using namespace memsnn;

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config_path, "Experiment config file")->required();
    cmd->add_option("--seed", c.seed, "Master seed (overrides experiment.seed)");
    cmd->add_option("--out", c.out, "Output directory");
    cmd->add_option("--override", c.overrides, "section.key=value, repeatable");
}

ExperimentConfig load_config(const Common& c, bool check_data)
{
    auto config = ExperimentConfig::load(c.config_path);
    for (const auto& o : c.overrides)
        config.apply_override(o);
    if (c.seed)
        config.seed = *c.seed;
    config.validate(check_data);
    return config;
}

std::ofstream open_out(const fs::path& dir, const std::string& name)
{
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out)
        throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
}

std::string fmt2(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

NetworkParams read_params(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open params file " + path);
    return NetworkParams::load(in);
}

void write_run(const fs::path& dir, const ExperimentConfig& config, const RunMetrics& metrics,
               const RunArtifacts& artifacts)
{
    auto m = open_out(dir, "metrics.csv");
    write_metrics_csv(m, metrics);
    auto s = open_out(dir, "summary.json");
    write_summary_json(s, metrics);
    auto w = open_out(dir, "weights_trace.csv");
    write_weight_trace_csv(w, metrics.weight_trace);
    auto p = open_out(dir, "programming_trace.csv");
    write_program_trace_csv(p, metrics.programming_trace);
    auto c = open_out(dir, "config.toml");
    c << config.to_toml();
    if (artifacts.params) {
        auto f = open_out(dir, "params.txt");
        artifacts.params->save(f);
    }
    if (artifacts.array) {
        auto f = open_out(dir, "crossbar.csv");
        artifacts.array->write_csv(f);
    }
}

int cmd_train(const Common& c)
{
    const auto config = load_config(c, true);
    const auto data = prepare_dataset(config);
    RunArtifacts artifacts;
    const auto metrics = run_experiment(config, data, &artifacts);
    write_run(c.out, config, metrics, artifacts);
    std::cout << "fingerprint " << metrics.fingerprint << '\n';
    for (const auto& [mode, acc] : metrics.test_accuracy)
        std::cout << "test " << mode << ' ' << fmt2(acc) << '\n';
    return 0;
}

/// Rebuilds the dataset from the config and checks it matches the parameters.
Dataset dataset_for(const ExperimentConfig& config, const NetworkParams& params)
{
    auto data = prepare_dataset(config);
    if (data.vocab.size() != params.vocab_size())
        throw std::runtime_error("params vocabulary (" + std::to_string(params.vocab_size()) +
                                 ") does not match the dataset vocabulary (" +
                                 std::to_string(data.vocab.size()) + ")");
    return data;
}

int cmd_eval(const Common& c, const std::string& params_path, const std::string& crossbar_path,
             const std::vector<std::string>& modes)
{
    const auto config = load_config(c, true);
    Model model;
    model.params = read_params(params_path);
    model.offset = config.offset;
    model.v_th = config.v_th;
    model.steps = config.T;
    if (!crossbar_path.empty()) {
        const auto window = resistance_window(config.device, config.program_policy());
        CrossbarArray array(config.array_rows, config.array_cols, config.device, window.r_min,
                            window.r_max, config.read_noise, config.seed);
        std::ifstream in(crossbar_path);
        if (!in)
            throw std::runtime_error("cannot open crossbar file " + crossbar_path);
        array.read_csv(in);
        model.array = std::move(array);
    }
    const auto data = dataset_for(config, model.params);

    nlohmann::ordered_json j;
    j["fingerprint"] = config.fingerprint();
    j["seed"] = config.seed;
    auto out = open_out(c.out, "eval.csv");
    out << "mode,accuracy,loss,samples\n";
    for (const auto& name : modes) {
        EvalMode mode;
        if (name == "ann")
            mode = EvalMode::Ann;
        else if (name == "snn")
            mode = EvalMode::Snn;
        else if (name == "snn_memristor")
            mode = EvalMode::SnnMemristor;
        else
            throw std::invalid_argument("unknown mode '" + name + "'");
        const auto r = evaluate(model, data.test, mode, config.seed, "test");
        out << name << ',' << fmt2(r.accuracy) << ',' << r.loss << ',' << r.samples << '\n';
        j["test_accuracy"][name] = std::stod(fmt2(r.accuracy));
        std::cout << "test " << name << ' ' << fmt2(r.accuracy) << '\n';
    }
    auto s = open_out(c.out, "summary.json");
    s << j.dump(2) << '\n';
    return 0;
}

int cmd_convert(const Common& c, const std::string& params_path)
{
    const auto config = load_config(c, true);
    const auto params = read_params(params_path);
    const auto data = dataset_for(config, params);
    const Model ann{params, config.offset, config.v_th, config.T, std::nullopt};
    const Model snn = convert_to_snn(params, config);
    const auto a = evaluate(ann, data.test, EvalMode::Ann, config.seed, "test");
    const auto s = evaluate(snn, data.test, EvalMode::Snn, config.seed, "test");

    nlohmann::ordered_json j;
    j["fingerprint"] = config.fingerprint();
    j["seed"] = config.seed;
    j["v_th"] = config.v_th;
    j["T"] = config.T;
    j["weights"] = snn.params.linear;
    j["test_accuracy"] = {{"ann", std::stod(fmt2(a.accuracy))},
                          {"snn", std::stod(fmt2(s.accuracy))}};
    auto out = open_out(c.out, "summary.json");
    out << j.dump(2) << '\n';
    std::cout << "test ann " << fmt2(a.accuracy) << "\ntest snn " << fmt2(s.accuracy) << '\n';
    return 0;
}

int cmd_map(const Common& c, const std::string& params_path)
{
    const auto config = load_config(c, false);
    Model model = convert_to_snn(read_params(params_path), config);
    const auto mapping = map_to_memristors(model, config);

    std::size_t converged = 0, pulses = 0;
    double worst = 0;
    for (const auto& r : mapping.reports) {
        converged += r.converged;
        pulses += r.iterations;
        worst = std::max(worst, r.true_relative_error);
    }
    nlohmann::ordered_json j;
    j["fingerprint"] = config.fingerprint();
    j["seed"] = config.seed;
    j["devices"] = mapping.reports.size();
    j["converged"] = converged;
    j["pulses"] = pulses;
    j["max_true_relative_error"] = worst;
    j["weight_distance"] = mapping.weight_distance;
    j["weight_rms"] = mapping.weight_rms;
    auto s = open_out(c.out, "summary.json");
    s << j.dump(2) << '\n';
    auto p = open_out(c.out, "programming_trace.csv");
    write_program_trace_csv(p, mapping.trace);
    auto a = open_out(c.out, "crossbar.csv");
    model.array->write_csv(a);
    std::cout << "weight_distance " << mapping.weight_distance << "\nconverged " << converged
              << '/' << mapping.reports.size() << '\n';
    return 0;
}

struct Axis {
    std::string key;
    std::vector<std::string> values;
};

std::string sweep_key(const std::string& name)
{
    if (name == "T")
        return "network.T";
    if (name == "r_tolerance")
        return "programming.r_tolerance";
    if (name == "read_noise")
        return "crossbar.read_noise";
    throw std::invalid_argument("sweep parameter must be T, r_tolerance or read_noise, got '" +
                                name + "'");
}

int cmd_sweep(const Common& c, const std::string& p1, const std::vector<std::string>& v1,
              const std::string& p2, const std::vector<std::string>& v2)
{
    const auto base = load_config(c, true);
    std::vector<Axis> axes{{sweep_key(p1), v1}};
    if (!p2.empty())
        axes.push_back({sweep_key(p2), v2});
    for (const auto& axis : axes) {
        if (axis.values.empty())
            throw ConfigError(axis.key, "sweep value list is empty");
        for (const auto& v : axis.values) {
            auto probe = base;
            probe.set(axis.key, v);
            probe.validate(false);
        }
    }

    std::vector<std::vector<std::string>> cells;
    for (const auto& a : axes[0].values) {
        if (axes.size() == 1)
            cells.push_back({a});
        else
            for (const auto& b : axes[1].values)
                cells.push_back({a, b});
    }

    // Data does not depend on any swept parameter.
    const auto data = prepare_dataset(base);
    auto out = open_out(c.out, "sweep.csv");
    for (const auto& axis : axes)
        out << axis.key << ',';
    out << "status,fingerprint,best_epoch,ann,snn,snn_memristor,weight_distance,error\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        auto config = base;
        for (std::size_t k = 0; k < axes.size(); ++k)
            config.set(axes[k].key, cells[i][k]);
        for (const auto& v : cells[i])
            out << v << ',';
        try {
            RunArtifacts artifacts;
            const auto metrics = run_experiment(config, data, &artifacts);
            write_run(fs::path(c.out) / ("cell_" + std::to_string(i)), config, metrics, artifacts);
            auto acc = [&](const char* mode) {
                const auto it = metrics.test_accuracy.find(mode);
                return it == metrics.test_accuracy.end() ? std::string() : fmt2(it->second);
            };
            out << "ok," << metrics.fingerprint << ',' << metrics.best_epoch << ',' << acc("ann")
                << ',' << acc("snn") << ',' << acc("snn_memristor") << ','
                << (metrics.weight_distance ? std::to_string(*metrics.weight_distance) : "")
                << ",\n";
        } catch (const std::exception& e) {
            std::string msg = e.what();
            for (auto& ch : msg)
                if (ch == ',' || ch == '\n')
                    ch = ';';
            out << "failed," << config.fingerprint() << ",,,,,," << msg << '\n';
            std::cerr << "cell " << i << " failed: " << e.what() << '\n';
        }
        out.flush();
    }
    std::cout << cells.size() << " cells written to " << (fs::path(c.out) / "sweep.csv").string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Memristor-backed spiking sentiment classifier"};
    app.require_subcommand(1);

    Common common;
    auto* train = app.add_subcommand("train", "Run the configured approach end to end");
    add_common(train, common);

    std::string params_path, crossbar_path;
    std::vector<std::string> modes{"ann", "snn"};
    auto* eval = app.add_subcommand("eval", "Evaluate saved parameters on the test split");
    add_common(eval, common);
    eval->add_option("--params", params_path, "params.txt from a train run")->required();
    eval->add_option("--crossbar", crossbar_path, "crossbar.csv holding the linear weights");
    eval->add_option("--modes", modes, "ann, snn, snn_memristor");

    auto* convert = app.add_subcommand("convert", "Convert saved ANN parameters to an SNN");
    add_common(convert, common);
    convert->add_option("--params", params_path, "params.txt from a train run")->required();

    auto* map = app.add_subcommand("map", "Program saved weights into a fresh crossbar");
    add_common(map, common);
    map->add_option("--params", params_path, "params.txt from a train run")->required();

    std::string p1, p2;
    std::vector<std::string> v1, v2;
    auto* sweep = app.add_subcommand("sweep", "One run per value; two parameters give a shmoo");
    add_common(sweep, common);
    sweep->add_option("--param", p1, "T, r_tolerance or read_noise")->required();
    sweep->add_option("--values", v1, "Values for --param")->required()->delimiter(',');
    sweep->add_option("--param2", p2, "Second parameter for a shmoo grid");
    sweep->add_option("--values2", v2, "Values for --param2")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed())
            return cmd_train(common);
        if (eval->parsed())
            return cmd_eval(common, params_path, crossbar_path, modes);
        if (convert->parsed())
            return cmd_convert(common, params_path);
        if (map->parsed())
            return cmd_map(common, params_path);
        if (!p2.empty() && v2.empty())
            throw ConfigError("--values2", "sweep value list is empty");
        return cmd_sweep(common, p1, v1, p2, v2);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
