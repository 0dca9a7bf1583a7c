#pragma once

// Shared domain types for the semantic link simulator: embeddings, labeled
// datasets, codebooks, the seeded random source and the L2 distortion.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace semcom {

/// Caller violated a precondition (bad argument, dimension mismatch, ...).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or truncated input file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Embedding = std::vector<float>;
using Bits = std::vector<std::uint8_t>;  // one bit (0/1) per element
using EmbeddingView = std::span<const float>;

/// Dense row-major float matrix; one embedding per row.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) throw UsageError("matrix data size does not match shape");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    EmbeddingView row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<float> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    void append_row(EmbeddingView values) {
        if (rows_ == 0 && cols_ == 0) cols_ = values.size();
        if (values.size() != cols_) throw UsageError("row dimension mismatch");
        data_.insert(data_.end(), values.begin(), values.end());
        ++rows_;
    }

    const std::vector<float>& data() const noexcept { return data_; }
    std::vector<float>& data() noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<float> data_;
};

inline bool all_finite(std::span<const float> values) {
    return std::all_of(values.begin(), values.end(), [](float v) { return std::isfinite(v); });
}

/// N embeddings of dimension p with class labels in [0, n_class).
struct LabeledDataset {
    Matrix embeddings;
    std::vector<std::uint16_t> labels;
    std::uint32_t n_class = 0;

    std::size_t size() const noexcept { return embeddings.rows(); }
    std::size_t dim() const noexcept { return embeddings.cols(); }
    EmbeddingView row(std::size_t i) const { return embeddings.row(i); }

    void validate() const {
        if (size() == 0) throw UsageError("dataset must hold at least one embedding");
        if (dim() == 0) throw UsageError("embedding dimension must be >= 1");
        if (labels.size() != size()) throw UsageError("label count does not match embedding count");
        if (n_class == 0 || n_class > 65536u) throw UsageError("n_class out of range");
        for (auto l : labels)
            if (l >= n_class) throw UsageError("label " + std::to_string(l) + " >= n_class");
        if (!all_finite(embeddings.data())) throw UsageError("dataset contains non-finite values");
    }

    /// Rows [first, first + count) as a new dataset.
    LabeledDataset slice(std::size_t first, std::size_t count) const {
        if (first + count > size()) throw UsageError("slice out of range");
        LabeledDataset out;
        out.n_class = n_class;
        std::vector<float> data(embeddings.data().begin() + static_cast<std::ptrdiff_t>(first * dim()),
                                embeddings.data().begin() + static_cast<std::ptrdiff_t>((first + count) * dim()));
        out.embeddings = Matrix(count, dim(), std::move(data));
        out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(first),
                          labels.begin() + static_cast<std::ptrdiff_t>(first + count));
        return out;
    }

    friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

/// Bits needed to address M codewords: max(1, ceil(log2 M)).
constexpr unsigned index_bit_width(std::uint64_t M) {
    if (M == 0) throw UsageError("codebook size must be >= 1");
    unsigned w = 0;
    while (w < 64 && (std::uint64_t{1} << w) < M) ++w;
    return std::max(1u, w);
}

/// Ordered list of codewords. Memory-based codebooks remember which dataset
/// row each entry came from; learned ones do not.
struct Codebook {
    Matrix entries;
    std::optional<std::vector<std::uint32_t>> source_ids;

    std::size_t size() const noexcept { return entries.rows(); }
    std::size_t dim() const noexcept { return entries.cols(); }
    EmbeddingView entry(std::size_t i) const { return entries.row(i); }
    unsigned bit_width() const { return index_bit_width(size()); }

    void validate() const {
        if (size() == 0) throw UsageError("codebook must hold at least one entry");
        if (source_ids && source_ids->size() != size()) throw UsageError("source id count mismatch");
        if (!all_finite(entries.data())) throw UsageError("codebook contains non-finite values");
    }

    friend bool operator==(const Codebook&, const Codebook&) = default;
};

inline double squared_l2_distance(EmbeddingView a, EmbeddingView b) {
    if (a.size() != b.size())
        throw UsageError("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        sum += d * d;
    }
    return sum;
}

/// Semantic distortion between two embeddings.
inline double l2_distance(EmbeddingView a, EmbeddingView b) { return std::sqrt(squared_l2_distance(a, b)); }

// SplitMix64 finalizer, used only to derive engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Deterministic random source: std::mt19937_64 seeded through SplitMix64.
/// Substreams are keyed by (seed, stream, index) so parallel work draws
/// the same numbers regardless of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    static Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
        return Rng(splitmix64(splitmix64(seed ^ splitmix64(stream)) + index));
    }
    Rng derive(std::uint64_t stream, std::uint64_t index = 0) const { return substream(seed_, stream, index); }

    std::uint64_t seed() const noexcept { return seed_; }
    std::mt19937_64& engine() noexcept { return engine_; }

    double normal(double mean = 0.0, double stddev = 1.0) { return mean + stddev * std_normal_(engine_); }
    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    std::size_t uniform_index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }
    std::uint64_t next() { return engine_(); }

    template <class It>
    void shuffle(It first, It last) {
        std::shuffle(first, last, engine_);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> std_normal_;
};

// Stream ids shared across modules.
namespace streams {
inline constexpr std::uint64_t synthetic = 1;
inline constexpr std::uint64_t affinity = 2;
inline constexpr std::uint64_t vqae = 3;
inline constexpr std::uint64_t classifier = 4;
inline constexpr std::uint64_t channel = 5;
inline constexpr std::uint64_t text = 6;
}  // namespace streams

/// Gaussian blobs around unit-norm class centers spaced >= 0.5 apart.
inline LabeledDataset generate_synthetic(std::uint32_t n_class, std::size_t per_class, std::size_t p, double spread,
                                         std::uint64_t seed) {
    if (n_class < 2) throw UsageError("n_class must be >= 2");
    if (n_class > 65536u) throw UsageError("n_class must fit in 16-bit labels");
    if (per_class < 1) throw UsageError("per_class must be >= 1");
    if (p < 2) throw UsageError("p must be >= 2");
    if (!(spread > 0.0) || !std::isfinite(spread)) throw UsageError("spread must be > 0");

    constexpr double min_center_distance = 0.5;
    constexpr int retry_budget = 1000;

    Rng rng = Rng::substream(seed, streams::synthetic);
    std::vector<std::vector<double>> centers;
    centers.reserve(n_class);
    for (std::uint32_t c = 0; c < n_class; ++c) {
        bool placed = false;
        for (int attempt = 0; attempt < retry_budget && !placed; ++attempt) {
            std::vector<double> v(p);
            double norm = 0.0;
            for (auto& x : v) {
                x = rng.normal();
                norm += x * x;
            }
            norm = std::sqrt(norm);
            if (norm == 0.0) continue;
            for (auto& x : v) x /= norm;
            placed = std::all_of(centers.begin(), centers.end(), [&](const std::vector<double>& other) {
                double d2 = 0.0;
                for (std::size_t i = 0; i < p; ++i) d2 += (v[i] - other[i]) * (v[i] - other[i]);
                return std::sqrt(d2) >= min_center_distance;
            });
            if (placed) centers.push_back(std::move(v));
        }
        if (!placed)
            throw UsageError("could not place " + std::to_string(n_class) + " class centers " +
                             std::to_string(min_center_distance) + " apart after " + std::to_string(retry_budget) +
                             " attempts; use a larger p");
    }

    LabeledDataset ds;
    ds.n_class = n_class;
    ds.embeddings = Matrix(static_cast<std::size_t>(n_class) * per_class, p);
    ds.labels.resize(ds.embeddings.rows());
    std::size_t r = 0;
    for (std::uint32_t c = 0; c < n_class; ++c) {
        for (std::size_t k = 0; k < per_class; ++k, ++r) {
            auto row = ds.embeddings.row(r);
            for (std::size_t i = 0; i < p; ++i) row[i] = static_cast<float>(centers[c][i] + rng.normal(0.0, spread));
            ds.labels[r] = static_cast<std::uint16_t>(c);
        }
    }
    return ds;
}

/// Deterministic row permutation (keeps labels aligned).
inline LabeledDataset shuffled(const LabeledDataset& ds, Rng& rng) {
    std::vector<std::size_t> order(ds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order.begin(), order.end());
    LabeledDataset out;
    out.n_class = ds.n_class;
    out.embeddings = Matrix(0, ds.dim());
    out.labels.reserve(ds.size());
    for (auto i : order) {
        out.embeddings.append_row(ds.row(i));
        out.labels.push_back(ds.labels[i]);
    }
    return out;
}

}  // namespace semcom
