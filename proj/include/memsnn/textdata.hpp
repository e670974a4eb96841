#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "memsnn/netcore.hpp"

namespace memsnn {

/// Lowercases, drops <br /> tags and double quotes, splits . , ( ) ! ? and '
/// into their own tokens, treats ; and : as spaces, then splits on
/// whitespace.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
public:
    static constexpr WordId kUnk = 0;
    static constexpr WordId kPad = 1;
    static constexpr std::string_view kUnkToken = "[unk]";
    static constexpr std::string_view kPadToken = "[pad]";

    /// Only the two special tokens.
    Vocabulary();

    /// Counts tokens over `texts`; keeps those seen at least `min_frequency`
    /// times, ordered by descending count and then lexicographically.
    static Vocabulary build(std::span<const std::vector<std::string>> texts,
                            std::size_t min_frequency = 10);

    std::size_t size() const { return tokens_.size(); }
    std::size_t min_frequency() const { return min_frequency_; }

    WordId id(std::string_view token) const;
    bool contains(std::string_view token) const;
    const std::string& token(WordId id) const { return tokens_.at(id); }
    std::size_t count(WordId id) const { return counts_.at(id); }

    std::vector<WordId> encode(std::span<const std::string> tokens) const;
    std::vector<std::string> decode(std::span<const WordId> ids) const;

    /// "token \t id \t count" lines.
    void write_tsv(std::ostream& out) const;

private:
    void add(std::string token, std::size_t count);

    std::unordered_map<std::string, WordId> index_;
    std::vector<std::string> tokens_;
    std::vector<std::size_t> counts_;
    std::size_t min_frequency_ = 0;
};

struct Sample {
    std::vector<WordId> ids;
    int label = 0;
};

struct RawSample {
    std::string text;
    int label = 0;
};

enum class Split { Train, Validation, Test };

struct Corpus {
    Split split = Split::Train;
    std::vector<Sample> samples;
};

/// Tokenizes and encodes; samples that come out empty are dropped.
Corpus make_corpus(std::span<const RawSample> raw, const Vocabulary& vocab, Split split);

/// "label \t text" per line, label 0/1. Throws on malformed lines.
std::vector<RawSample> load_tsv(const std::filesystem::path& path);

/// `<root>/<split>/{pos,neg}/*.txt`, files read in sorted order.
std::vector<RawSample> load_imdb_split(const std::filesystem::path& root, std::string_view split);

/// Stratified, seed-deterministic partition of `pool` into disjoint train and
/// validation parts of the requested sizes.
struct SplitResult {
    std::vector<RawSample> train;
    std::vector<RawSample> validation;
};
SplitResult split_dataset(std::span<const RawSample> pool, std::size_t train_size,
                          std::size_t validation_size, std::uint64_t seed);

/// Seed-deterministic, label-stratified subsample.
std::vector<RawSample> subsample(std::span<const RawSample> pool, std::size_t count,
                                 std::uint64_t seed);

/// Word vectors in "token v1 ... v_e" text format, aligned to `vocab`.
struct WordVectors {
    Matrix raw;               ///< vocab x e; rows of missing tokens are 0
    std::vector<bool> found;  ///< per vocabulary row
    std::size_t found_count = 0;
};

/// Throws std::runtime_error naming the line on a malformed entry or a
/// dimension mismatch. Tokens outside the vocabulary are ignored.
WordVectors load_word_vectors(std::istream& in, const Vocabulary& vocab, std::size_t dim);
WordVectors load_word_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                              std::size_t dim);

} // namespace memsnn
