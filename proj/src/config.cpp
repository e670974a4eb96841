#include "memsnn/config.hpp"

#include <algorithm>
#include <charconv>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "memsnn/rng.hpp"

namespace memsnn {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string format_double(double v)
{
    // Shortest representation that round-trips.
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

double parse_double(const std::string& key, std::string_view text)
{
    const std::string s(trim(text));
    if (s.empty())
        throw ConfigError(key, "expected a number");
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE)
        throw ConfigError(key, "expected a number, got '" + s + "'");
    return v;
}

std::uint64_t parse_unsigned(const std::string& key, std::string_view text)
{
    const std::string s(trim(text));
    if (s.empty() || s.front() == '-')
        throw ConfigError(key, "expected a non-negative integer, got '" + s + "'");
    char* end = nullptr;
    errno = 0;
    const auto v = std::strtoull(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE)
        throw ConfigError(key, "expected a non-negative integer, got '" + s + "'");
    return v;
}

bool parse_bool(const std::string& key, std::string_view text)
{
    const auto s = trim(text);
    if (s == "true")
        return true;
    if (s == "false")
        return false;
    throw ConfigError(key, "expected true or false, got '" + std::string(s) + "'");
}

std::string parse_string(const std::string& key, std::string_view text)
{
    auto s = trim(text);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return std::string(s.substr(1, s.size() - 2));
    if (s.find('"') != std::string_view::npos)
        throw ConfigError(key, "unbalanced quotes");
    return std::string(s); // bare words are accepted from --override
}

std::vector<double> parse_list(const std::string& key, std::string_view text)
{
    auto s = trim(text);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw ConfigError(key, "expected a list like [1, 2, 3]");
    s = trim(s.substr(1, s.size() - 2));
    std::vector<double> out;
    while (!s.empty()) {
        const auto comma = s.find(',');
        out.push_back(parse_double(key, s.substr(0, comma)));
        if (comma == std::string_view::npos)
            break;
        s = trim(s.substr(comma + 1));
    }
    return out;
}

std::string format_list(const std::vector<double>& values)
{
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out += ", ";
        out += format_double(values[i]);
    }
    return out + "]";
}

struct Field {
    const char* key;
    std::function<void(ExperimentConfig&, const std::string&, std::string_view)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Field unsigned_field(const char* key, T ExperimentConfig::*member)
{
    return {key,
            [member](ExperimentConfig& c, const std::string& k, std::string_view v) {
                c.*member = static_cast<T>(parse_unsigned(k, v));
            },
            [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(const char* key, double ExperimentConfig::*member)
{
    return {key,
            [member](ExperimentConfig& c, const std::string& k, std::string_view v) {
                c.*member = parse_double(k, v);
            },
            [member](const ExperimentConfig& c) { return format_double(c.*member); }};
}

Field device_field(const char* key, double DeviceParams::*member)
{
    return {key,
            [member](ExperimentConfig& c, const std::string& k, std::string_view v) {
                c.device.*member = parse_double(k, v);
            },
            [member](const ExperimentConfig& c) { return format_double(c.device.*member); }};
}

Field bool_field(const char* key, bool ExperimentConfig::*member)
{
    return {key,
            [member](ExperimentConfig& c, const std::string& k, std::string_view v) {
                c.*member = parse_bool(k, v);
            },
            [member](const ExperimentConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field string_field(const char* key, std::string ExperimentConfig::*member)
{
    return {key,
            [member](ExperimentConfig& c, const std::string& k, std::string_view v) {
                c.*member = parse_string(k, v);
            },
            [member](const ExperimentConfig& c) { return "\"" + c.*member + "\""; }};
}

Field list_field(const char* key, std::vector<double> ExperimentConfig::*member)
{
    return {key,
            [member](ExperimentConfig& c, const std::string& k, std::string_view v) {
                c.*member = parse_list(k, v);
            },
            [member](const ExperimentConfig& c) { return format_list(c.*member); }};
}

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = {
        {"experiment.approach",
         [](ExperimentConfig& c, const std::string& k, std::string_view v) {
             c.approach = static_cast<int>(parse_unsigned(k, v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.approach); }},
        unsigned_field("experiment.seed", &ExperimentConfig::seed),
        unsigned_field("experiment.epochs", &ExperimentConfig::epochs),
        bool_field("experiment.use_memristors", &ExperimentConfig::use_memristors),
        unsigned_field("experiment.trace_every", &ExperimentConfig::trace_every),

        string_field("data.format", &ExperimentConfig::data_format),
        string_field("data.imdb_dir", &ExperimentConfig::imdb_dir),
        string_field("data.train_path", &ExperimentConfig::train_path),
        string_field("data.test_path", &ExperimentConfig::test_path),
        string_field("data.word_vectors", &ExperimentConfig::word_vectors),
        unsigned_field("data.train_size", &ExperimentConfig::train_size),
        unsigned_field("data.validation_size", &ExperimentConfig::validation_size),
        unsigned_field("data.test_size", &ExperimentConfig::test_size),
        unsigned_field("data.min_frequency", &ExperimentConfig::min_frequency),
        unsigned_field("data.vocab_size", &ExperimentConfig::vocab_size),

        unsigned_field("network.embedding_dim", &ExperimentConfig::embedding_dim),
        unsigned_field("network.output_dim", &ExperimentConfig::output_dim),
        unsigned_field("network.batch_size", &ExperimentConfig::batch_size),
        double_field("network.offset", &ExperimentConfig::offset),
        unsigned_field("network.T", &ExperimentConfig::T),
        double_field("network.v_th", &ExperimentConfig::v_th),
        double_field("network.eta", &ExperimentConfig::eta),
        double_field("network.epsilon", &ExperimentConfig::epsilon),
        bool_field("network.freeze_embedding", &ExperimentConfig::freeze_embedding),

        device_field("device.A_p", &DeviceParams::A_p),
        device_field("device.A_n", &DeviceParams::A_n),
        device_field("device.t_p", &DeviceParams::t_p),
        device_field("device.t_n", &DeviceParams::t_n),
        device_field("device.a0_p", &DeviceParams::a0_p),
        device_field("device.a1_p", &DeviceParams::a1_p),
        device_field("device.a0_n", &DeviceParams::a0_n),
        device_field("device.a1_n", &DeviceParams::a1_n),
        device_field("device.dt", &DeviceParams::dt),

        double_field("programming.positive_voltage", &ExperimentConfig::positive_voltage),
        list_field("programming.positive_widths_us", &ExperimentConfig::positive_widths_us),
        double_field("programming.negative_voltage", &ExperimentConfig::negative_voltage),
        list_field("programming.negative_widths_us", &ExperimentConfig::negative_widths_us),
        double_field("programming.r_tolerance", &ExperimentConfig::r_tolerance),
        unsigned_field("programming.max_n", &ExperimentConfig::max_n),
        {"programming.integration",
         [](ExperimentConfig& c, const std::string& k, std::string_view v) {
             const auto s = parse_string(k, v);
             if (s == "substeps")
                 c.integration = IntegrationMode::Substeps;
             else if (s == "literal")
                 c.integration = IntegrationMode::Literal;
             else
                 throw ConfigError(k, "expected \"substeps\" or \"literal\", got '" + s + "'");
         },
         [](const ExperimentConfig& c) {
             return std::string(c.integration == IntegrationMode::Substeps ? "\"substeps\""
                                                                           : "\"literal\"");
         }},
        unsigned_field("programming.substeps", &ExperimentConfig::substeps),

        unsigned_field("crossbar.rows", &ExperimentConfig::array_rows),
        unsigned_field("crossbar.cols", &ExperimentConfig::array_cols),
        double_field("crossbar.read_noise", &ExperimentConfig::read_noise),
    };
    return table;
}

const Field* find_field(std::string_view key)
{
    for (const auto& f : fields())
        if (key == f.key)
            return &f;
    return nullptr;
}

// Drops a trailing '# comment' that is not inside a string.
std::string_view strip_comment(std::string_view line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"')
            quoted = !quoted;
        else if (line[i] == '#' && !quoted)
            return line.substr(0, i);
    }
    return line;
}

} // namespace

ExperimentConfig ExperimentConfig::approach1_baseline()
{
    return ExperimentConfig{};
}

ExperimentConfig ExperimentConfig::approach2_baseline()
{
    ExperimentConfig c;
    c.approach = 2;
    c.offset = -0.5;
    c.v_th = 56.75;
    c.positive_widths_us = {1, 2, 10, 20, 50};
    c.negative_widths_us = {1, 2, 10, 20, 100};
    return c;
}

void ExperimentConfig::set(std::string_view key, std::string_view value)
{
    const Field* f = find_field(key);
    if (!f)
        throw ConfigError(std::string(key), "unknown key");
    f->set(*this, std::string(key), value);
}

void ExperimentConfig::apply_override(std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError(std::string(assignment), "override must look like section.key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

ExperimentConfig ExperimentConfig::parse(std::string_view text)
{
    ExperimentConfig c;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(strip_comment(raw));
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no), "malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no), "expected key = value");
        const auto key = trim(line.substr(0, eq));
        const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
        c.set(full, line.substr(eq + 1));
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", "cannot open " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse(text.str());
}

void ExperimentConfig::validate(bool check_data) const
{
    auto require = [](bool ok, const char* field, const std::string& message) {
        if (!ok)
            throw ConfigError(field, message);
    };
    require(approach == 1 || approach == 2, "experiment.approach", "must be 1 or 2");
    require(epochs >= 1, "experiment.epochs", "must be >= 1");
    require(trace_every >= 1, "experiment.trace_every", "must be >= 1");

    require(data_format == "imdb" || data_format == "tsv", "data.format",
            "must be \"imdb\" or \"tsv\"");
    namespace fs = std::filesystem;
    if (check_data && data_format == "imdb") {
        require(!imdb_dir.empty(), "data.imdb_dir", "dataset path is required");
        require(fs::is_directory(imdb_dir), "data.imdb_dir",
                "directory '" + imdb_dir + "' does not exist");
    } else if (check_data) {
        require(!train_path.empty(), "data.train_path", "dataset path is required");
        require(fs::exists(train_path), "data.train_path",
                "file '" + train_path + "' does not exist");
        require(!test_path.empty(), "data.test_path", "dataset path is required");
        require(fs::exists(test_path), "data.test_path",
                "file '" + test_path + "' does not exist");
    }
    if (check_data && !word_vectors.empty())
        require(fs::exists(word_vectors), "data.word_vectors",
                "file '" + word_vectors + "' does not exist");
    require(train_size >= 1, "data.train_size", "must be >= 1");
    require(validation_size >= 1, "data.validation_size",
            "must be >= 1 (checkpoint selection needs a validation split)");
    require(min_frequency >= 1, "data.min_frequency", "must be >= 1");

    require(embedding_dim >= 1, "network.embedding_dim", "must be >= 1");
    require(output_dim == 1, "network.output_dim", "only a single output neuron is supported");
    require(batch_size == 1, "network.batch_size", "only batch size 1 is supported");
    require(T >= 1, "network.T", "must be >= 1");
    require(v_th > 0, "network.v_th", "must be > 0");
    require(eta > 0, "network.eta", "must be > 0");
    require(epsilon >= 0, "network.epsilon", "must be >= 0");

    try {
        device.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("device", e.what());
    }

    require(positive_voltage > 0, "programming.positive_voltage", "must be > 0");
    require(negative_voltage < 0, "programming.negative_voltage", "must be < 0");
    require(!positive_widths_us.empty(), "programming.positive_widths_us", "must not be empty");
    require(!negative_widths_us.empty(), "programming.negative_widths_us", "must not be empty");
    for (double w : positive_widths_us)
        require(w > 0, "programming.positive_widths_us", "widths must be > 0");
    for (double w : negative_widths_us)
        require(w > 0, "programming.negative_widths_us", "widths must be > 0");
    require(r_tolerance > 0, "programming.r_tolerance", "must be > 0");
    require(max_n >= 1, "programming.max_n", "must be >= 1");
    require(substeps >= 1, "programming.substeps", "must be >= 1");

    require(array_rows >= 1, "crossbar.rows", "must be >= 1");
    require(array_cols >= 1, "crossbar.cols", "must be >= 1");
    require(array_rows * array_cols >= embedding_dim, "crossbar.rows",
            "array of " + std::to_string(array_rows * array_cols) + " devices cannot hold " +
                std::to_string(embedding_dim) + " synapses");
    require(read_noise >= 0 && read_noise < 1, "crossbar.read_noise", "must lie in [0, 1)");
    try {
        (void)resistance_window(device, program_policy());
    } catch (const std::invalid_argument& e) {
        throw ConfigError("programming", e.what());
    }
}

std::map<std::string, std::string> ExperimentConfig::resolved() const
{
    std::map<std::string, std::string> out;
    for (const auto& f : fields())
        out.emplace(f.key, f.get(*this));
    return out;
}

std::string ExperimentConfig::to_toml() const
{
    std::string out;
    std::string section;
    for (const auto& f : fields()) {
        const std::string_view key(f.key);
        const auto dot = key.find('.');
        const std::string sec(key.substr(0, dot));
        if (sec != section) {
            if (!section.empty())
                out += '\n';
            out += "[" + sec + "]\n";
            section = sec;
        }
        out += std::string(key.substr(dot + 1)) + " = " + f.get(*this) + "\n";
    }
    return out;
}

std::string ExperimentConfig::fingerprint() const
{
    std::uint64_t h = fnv1a64("");
    for (const auto& [k, v] : resolved()) {
        h = fnv1a64(k, h);
        h = fnv1a64("=", h);
        h = fnv1a64(v, h);
        h = fnv1a64("\n", h);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ProgramPolicy ExperimentConfig::program_policy() const
{
    ProgramPolicy p;
    for (double w : positive_widths_us)
        p.positive_pulses.push_back({positive_voltage, w * 1e-6});
    for (double w : negative_widths_us)
        p.negative_pulses.push_back({negative_voltage, w * 1e-6});
    p.r_tolerance = r_tolerance;
    p.max_n = max_n;
    p.integration = integration_config();
    return p;
}

std::vector<std::string> ExperimentConfig::keys()
{
    std::vector<std::string> out;
    for (const auto& f : fields())
        out.emplace_back(f.key);
    return out;
}

} // namespace memsnn
