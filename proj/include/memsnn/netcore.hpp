#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace memsnn {

using WordId = std::uint32_t;

/// Thrown when a sentence has no usable tokens left to pool.
class DegenerateInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Embedding (vocab x e) and single-output linear layer (e), both in [0, 1],
/// plus their Adagrad accumulators.
struct NetworkParams {
    Matrix embedding;
    std::vector<double> linear;
    Matrix adagrad_s_embedding;
    std::vector<double> adagrad_s_linear;
    double eta = 0.05;
    double epsilon = 1e-8;
    WordId pad_id = 1;

    NetworkParams() = default;
    NetworkParams(std::size_t vocab, std::size_t dim, double eta_, double epsilon_, WordId pad);

    std::size_t vocab_size() const { return embedding.rows; }
    std::size_t dim() const { return embedding.cols; }

    void validate() const;

    /// Header "memsnn-params v1 <vocab> <e> <o>", then eta/epsilon/pad and
    /// one CSV line per matrix row (embedding, accumulators, linear).
    void save(std::ostream& out) const;
    static NetworkParams load(std::istream& in);
};

struct ForwardTrace {
    std::vector<double> x_c;
    double activation; ///< a = v + C
    double y;          ///< sigmoid(a)
    double v;          ///< V_c (ANN mode) or firing rate (SNN mode)
};

/// Mean of the embedding rows of the non-pad tokens. Throws DegenerateInput
/// if nothing is left, std::out_of_range for ids past the vocabulary.
std::vector<double> embed_and_pool(std::span<const WordId> ids, const NetworkParams& params);

/// V_c = sum_i w_i x_i.
double linear_forward(std::span<const double> x_c, std::span<const double> weights);

/// sigmoid(v + offset).
double output_probability(double v, double offset);

/// Offset for the ANN path: minus the expected V_c for weights and inputs at
/// their midpoint, -0.25 e.
inline double ann_offset(std::size_t dim) { return -0.25 * static_cast<double>(dim); }

/// Binary cross-entropy of probability y against label in {0, 1}.
double bce_loss(double y, int label);

/// g_s = (y - label) x_c.
std::vector<double> grad_linear(double y, int label, std::span<const double> x_c);

/// Sparse embedding gradient: one entry per distinct participating row.
struct RowGradient {
    WordId row;
    std::vector<double> grad;
};

/// Each non-pad occurrence of a word adds (y - label) w / L to its row, L the
/// non-pad length.
std::vector<RowGradient> grad_embedding(double y, int label, std::span<const double> weights,
                                        std::span<const WordId> ids, WordId pad_id);

/// s += g^2; theta -= eta g / (sqrt(s) + eps); theta clipped to [0, 1].
void adagrad_step(std::span<double> theta, std::span<double> accum,
                  std::span<const double> grad, double eta, double epsilon);

/// Applies both gradients to `params`.
void adagrad_update(NetworkParams& params, std::span<const double> g_linear,
                    std::span<const RowGradient> g_embedding);

/// Rescales each column of `raw` into [0, 1] over the rows flagged in
/// `present`. Constant columns map to 0.5.
void minmax_normalize_columns(Matrix& raw, const std::vector<bool>& present);

} // namespace memsnn
