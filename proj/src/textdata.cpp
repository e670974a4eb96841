#include "memsnn/textdata.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "memsnn/rng.hpp"

namespace memsnn {

std::vector<std::string> tokenize(std::string_view text)
{
    // Quotes go first so that a tag split by one still matches below.
    std::string clean;
    clean.reserve(text.size());
    for (char ch : text) {
        if (ch == '"')
            continue;
        clean.push_back(ch >= 'A' && ch <= 'Z' ? static_cast<char>(ch - 'A' + 'a') : ch);
    }

    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    };
    static constexpr std::string_view kBreak = "<br />";
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const char ch = clean[i];
        if (ch == '<' && std::string_view(clean).substr(i, kBreak.size()) == kBreak) {
            flush();
            i += kBreak.size() - 1;
            continue;
        }
        switch (ch) {
        case '\'':
        case '.':
        case ',':
        case '(':
        case ')':
        case '!':
        case '?':
            flush();
            tokens.emplace_back(1, ch);
            break;
        case ';':
        case ':':
        case ' ':
        case '\t':
        case '\n':
        case '\r':
        case '\f':
        case '\v':
            flush();
            break;
        default:
            current.push_back(ch);
        }
    }
    flush();
    return tokens;
}

Vocabulary::Vocabulary()
{
    add(std::string(kUnkToken), 0);
    add(std::string(kPadToken), 0);
}

void Vocabulary::add(std::string token, std::size_t count)
{
    const auto id = static_cast<WordId>(tokens_.size());
    index_.emplace(token, id);
    tokens_.push_back(std::move(token));
    counts_.push_back(count);
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> texts,
                             std::size_t min_frequency)
{
    std::unordered_map<std::string, std::size_t> freq;
    for (const auto& text : texts)
        for (const auto& tok : text)
            ++freq[tok];

    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [tok, n] : freq)
        if (n >= min_frequency && tok != kUnkToken && tok != kPadToken)
            kept.emplace_back(tok, n);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    Vocabulary vocab;
    vocab.min_frequency_ = min_frequency;
    for (auto& [tok, n] : kept)
        vocab.add(std::move(tok), n);
    return vocab;
}

WordId Vocabulary::id(std::string_view token) const
{
    const auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const
{
    return index_.count(std::string(token)) != 0;
}

std::vector<WordId> Vocabulary::encode(std::span<const std::string> tokens) const
{
    std::vector<WordId> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens)
        ids.push_back(id(t));
    return ids;
}

std::vector<std::string> Vocabulary::decode(std::span<const WordId> ids) const
{
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (WordId i : ids)
        out.push_back(token(i));
    return out;
}

void Vocabulary::write_tsv(std::ostream& out) const
{
    for (std::size_t i = 0; i < tokens_.size(); ++i)
        out << tokens_[i] << '\t' << i << '\t' << counts_[i] << '\n';
}

Corpus make_corpus(std::span<const RawSample> raw, const Vocabulary& vocab, Split split)
{
    Corpus corpus;
    corpus.split = split;
    corpus.samples.reserve(raw.size());
    for (const auto& r : raw) {
        auto ids = vocab.encode(tokenize(r.text));
        if (ids.empty())
            continue;
        corpus.samples.push_back({std::move(ids), r.label});
    }
    return corpus;
}

std::vector<RawSample> load_tsv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open corpus file " + path.string());
    std::vector<RawSample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const auto tab = line.find('\t');
        const std::string label = line.substr(0, tab);
        if (tab == std::string::npos || (label != "0" && label != "1"))
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected '<0|1>\\t<text>'");
        out.push_back({line.substr(tab + 1), label == "1" ? 1 : 0});
    }
    return out;
}

std::vector<RawSample> load_imdb_split(const std::filesystem::path& root, std::string_view split)
{
    namespace fs = std::filesystem;
    std::vector<RawSample> out;
    for (const auto& [sub, label] : {std::pair{"neg", 0}, std::pair{"pos", 1}}) {
        const fs::path dir = root / std::string(split) / sub;
        if (!fs::is_directory(dir))
            throw std::runtime_error("missing IMDB directory " + dir.string());
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".txt")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            std::ifstream in(f, std::ios::binary);
            std::ostringstream text;
            text << in.rdbuf();
            out.push_back({text.str(), label});
        }
    }
    if (out.empty())
        throw std::runtime_error("no reviews under " + (root / std::string(split)).string());
    return out;
}

namespace {

// Indices of each class, shuffled with the given stream.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
shuffled_by_class(std::span<const RawSample> pool, Rng& rng)
{
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < pool.size(); ++i)
        (pool[i].label ? pos : neg).push_back(i);
    rng.shuffle(pos.begin(), pos.end());
    rng.shuffle(neg.begin(), neg.end());
    return {std::move(pos), std::move(neg)};
}

// Positives to put in a part of `size` so its class ratio tracks the pool's.
std::size_t positive_share(std::size_t size, std::size_t positives, std::size_t total)
{
    return static_cast<std::size_t>(
        static_cast<double>(size) * static_cast<double>(positives) / static_cast<double>(total) +
        0.5);
}

} // namespace

SplitResult split_dataset(std::span<const RawSample> pool, std::size_t train_size,
                          std::size_t validation_size, std::uint64_t seed)
{
    if (train_size + validation_size > pool.size())
        throw std::invalid_argument("split sizes " + std::to_string(train_size) + " + " +
                                    std::to_string(validation_size) + " exceed pool of " +
                                    std::to_string(pool.size()));
    Rng rng = Rng::stream(seed, "split");
    auto [pos, neg] = shuffled_by_class(pool, rng);
    const std::size_t used = train_size + validation_size;
    // Positives drawn overall, then divided between the parts in proportion.
    std::size_t pos_used = std::min(pos.size(), positive_share(used, pos.size(), pool.size()));
    if (used - pos_used > neg.size())
        pos_used = used - neg.size();
    std::size_t pos_train = std::min(pos_used, positive_share(train_size, pos_used, used));
    if (train_size - pos_train > used - pos_used)
        pos_train = train_size - (used - pos_used);
    if (pos_used - pos_train > validation_size)
        pos_train = pos_used - validation_size;

    SplitResult out;
    std::size_t p = 0, n = 0;
    for (std::size_t i = 0; i < pos_train; ++i)
        out.train.push_back(pool[pos[p++]]);
    for (std::size_t i = pos_train; i < train_size; ++i)
        out.train.push_back(pool[neg[n++]]);
    for (std::size_t i = pos_train; i < pos_used; ++i)
        out.validation.push_back(pool[pos[p++]]);
    while (out.validation.size() < validation_size)
        out.validation.push_back(pool[neg[n++]]);
    rng.shuffle(out.train.begin(), out.train.end());
    rng.shuffle(out.validation.begin(), out.validation.end());
    return out;
}

std::vector<RawSample> subsample(std::span<const RawSample> pool, std::size_t count,
                                 std::uint64_t seed)
{
    auto parts = split_dataset(pool, count, 0, seed);
    return std::move(parts.train);
}

WordVectors load_word_vectors(std::istream& in, const Vocabulary& vocab, std::size_t dim)
{
    WordVectors wv{Matrix(vocab.size(), dim, 0.0), std::vector<bool>(vocab.size(), false), 0};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream fields(line);
        std::string token;
        fields >> token;
        std::vector<double> values;
        values.reserve(dim);
        std::string cell;
        while (fields >> cell) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(cell, &used));
                if (used != cell.size())
                    throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw std::runtime_error("word vectors line " + std::to_string(line_no) +
                                         ": malformed value '" + cell + "'");
            }
        }
        if (values.size() != dim)
            throw std::runtime_error("word vectors line " + std::to_string(line_no) + " ('" +
                                     token + "'): expected " + std::to_string(dim) +
                                     " values, got " + std::to_string(values.size()));
        if (!vocab.contains(token))
            continue;
        const WordId id = vocab.id(token);
        std::copy(values.begin(), values.end(), wv.raw.row(id).begin());
        if (!wv.found[id]) {
            wv.found[id] = true;
            ++wv.found_count;
        }
    }
    return wv;
}

WordVectors load_word_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                              std::size_t dim)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open word vectors " + path.string());
    return load_word_vectors(in, vocab, dim);
}

} // namespace memsnn
