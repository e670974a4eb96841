#include "memsnn/netcore.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace memsnn {

NetworkParams::NetworkParams(std::size_t vocab, std::size_t dim, double eta_, double epsilon_,
                             WordId pad)
    : embedding(vocab, dim, 0.0), linear(dim, 0.0), adagrad_s_embedding(vocab, dim, 0.0),
      adagrad_s_linear(dim, 0.0), eta(eta_), epsilon(epsilon_), pad_id(pad)
{
}

void NetworkParams::validate() const
{
    auto in_box = [](double w) { return w >= 0.0 && w <= 1.0; };
    if (!std::all_of(embedding.data.begin(), embedding.data.end(), in_box))
        throw std::invalid_argument("embedding weights must lie in [0, 1]");
    if (!std::all_of(linear.begin(), linear.end(), in_box))
        throw std::invalid_argument("linear weights must lie in [0, 1]");
    if (linear.size() != embedding.cols)
        throw std::invalid_argument("linear layer size does not match embedding dimension");
    if (!(eta > 0))
        throw std::invalid_argument("eta must be > 0");
}

namespace {

void write_row(std::ostream& out, std::span<const double> values)
{
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out << ',';
        out << values[i];
    }
    out << '\n';
}

std::vector<double> read_row(std::istream& in, std::size_t expected, const char* what)
{
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(std::string("params: truncated ") + what);
    std::vector<double> values;
    values.reserve(expected);
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ','))
        values.push_back(std::stod(cell));
    if (values.size() != expected)
        throw std::runtime_error(std::string("params: wrong width in ") + what);
    return values;
}

} // namespace

void NetworkParams::save(std::ostream& out) const
{
    const auto old_precision = out.precision(17);
    out << "memsnn-params v1 " << embedding.rows << ' ' << embedding.cols << " 1\n";
    out << eta << ' ' << epsilon << ' ' << pad_id << '\n';
    for (std::size_t r = 0; r < embedding.rows; ++r)
        write_row(out, embedding.row(r));
    for (std::size_t r = 0; r < adagrad_s_embedding.rows; ++r)
        write_row(out, adagrad_s_embedding.row(r));
    write_row(out, linear);
    write_row(out, adagrad_s_linear);
    out.precision(old_precision);
}

NetworkParams NetworkParams::load(std::istream& in)
{
    std::string magic, version;
    std::size_t vocab = 0, dim = 0, outputs = 0;
    if (!(in >> magic >> version >> vocab >> dim >> outputs) || magic != "memsnn-params")
        throw std::runtime_error("params: bad header");
    if (version != "v1")
        throw std::runtime_error("params: unsupported format " + version);
    if (outputs != 1)
        throw std::runtime_error("params: only single-output networks are supported");
    NetworkParams p(vocab, dim, 0.0, 0.0, 0);
    if (!(in >> p.eta >> p.epsilon >> p.pad_id))
        throw std::runtime_error("params: bad optimizer line");
    in >> std::ws;
    for (std::size_t r = 0; r < vocab; ++r) {
        auto row = read_row(in, dim, "embedding");
        std::copy(row.begin(), row.end(), p.embedding.row(r).begin());
    }
    for (std::size_t r = 0; r < vocab; ++r) {
        auto row = read_row(in, dim, "embedding accumulator");
        std::copy(row.begin(), row.end(), p.adagrad_s_embedding.row(r).begin());
    }
    p.linear = read_row(in, dim, "linear");
    p.adagrad_s_linear = read_row(in, dim, "linear accumulator");
    return p;
}

std::vector<double> embed_and_pool(std::span<const WordId> ids, const NetworkParams& params)
{
    const std::size_t dim = params.dim();
    std::vector<double> x(dim, 0.0);
    std::size_t count = 0;
    for (WordId id : ids) {
        if (id >= params.vocab_size())
            throw std::out_of_range("word id " + std::to_string(id) + " outside vocabulary of " +
                                    std::to_string(params.vocab_size()));
        if (id == params.pad_id)
            continue;
        const auto row = params.embedding.row(id);
        for (std::size_t d = 0; d < dim; ++d)
            x[d] += row[d];
        ++count;
    }
    if (count == 0)
        throw DegenerateInput("sentence has no non-pad tokens");
    const double inv = 1.0 / static_cast<double>(count);
    for (auto& v : x)
        v = std::clamp(v * inv, 0.0, 1.0);
    return x;
}

double linear_forward(std::span<const double> x_c, std::span<const double> weights)
{
    if (x_c.size() != weights.size())
        throw std::invalid_argument("linear_forward: size mismatch");
    double v = 0.0;
    for (std::size_t i = 0; i < x_c.size(); ++i)
        v += weights[i] * x_c[i];
    return v;
}

double output_probability(double v, double offset)
{
    const double a = v + offset;
    if (a >= 0)
        return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

double bce_loss(double y, int label)
{
    // log of exactly 0 or 1 would be infinite; the sigmoid never returns them
    // for finite inputs but rounding can.
    constexpr double tiny = std::numeric_limits<double>::min();
    const double p = std::clamp(y, tiny, 1.0 - std::numeric_limits<double>::epsilon() / 2);
    return label ? -std::log(p) : -std::log1p(-p);
}

std::vector<double> grad_linear(double y, int label, std::span<const double> x_c)
{
    const double delta = y - static_cast<double>(label);
    std::vector<double> g(x_c.size());
    for (std::size_t i = 0; i < x_c.size(); ++i)
        g[i] = delta * x_c[i];
    return g;
}

std::vector<RowGradient> grad_embedding(double y, int label, std::span<const double> weights,
                                        std::span<const WordId> ids, WordId pad_id)
{
    std::map<WordId, std::size_t> occurrences;
    std::size_t length = 0;
    for (WordId id : ids) {
        if (id == pad_id)
            continue;
        ++occurrences[id];
        ++length;
    }
    std::vector<RowGradient> out;
    if (length == 0)
        return out;
    const double delta = y - static_cast<double>(label);
    out.reserve(occurrences.size());
    for (const auto& [id, n] : occurrences) {
        const double scale = delta * static_cast<double>(n) / static_cast<double>(length);
        RowGradient rg{id, std::vector<double>(weights.size())};
        for (std::size_t d = 0; d < weights.size(); ++d)
            rg.grad[d] = scale * weights[d];
        out.push_back(std::move(rg));
    }
    return out;
}

void adagrad_step(std::span<double> theta, std::span<double> accum, std::span<const double> grad,
                  double eta, double epsilon)
{
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = grad[i];
        if (g == 0.0)
            continue;
        accum[i] += g * g;
        theta[i] = std::clamp(theta[i] - eta * g / (std::sqrt(accum[i]) + epsilon), 0.0, 1.0);
    }
}

void adagrad_update(NetworkParams& params, std::span<const double> g_linear,
                    std::span<const RowGradient> g_embedding)
{
    if (!g_linear.empty())
        adagrad_step(params.linear, params.adagrad_s_linear, g_linear, params.eta, params.epsilon);
    for (const auto& rg : g_embedding)
        adagrad_step(params.embedding.row(rg.row), params.adagrad_s_embedding.row(rg.row),
                     rg.grad, params.eta, params.epsilon);
}

void minmax_normalize_columns(Matrix& raw, const std::vector<bool>& present)
{
    for (std::size_t c = 0; c < raw.cols; ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t r = 0; r < raw.rows; ++r) {
            if (!present[r])
                continue;
            lo = std::min(lo, raw(r, c));
            hi = std::max(hi, raw(r, c));
        }
        if (!(hi >= lo))
            continue;
        for (std::size_t r = 0; r < raw.rows; ++r) {
            if (!present[r])
                continue;
            raw(r, c) = hi > lo ? (raw(r, c) - lo) / (hi - lo) : 0.5;
        }
    }
}

} // namespace memsnn
