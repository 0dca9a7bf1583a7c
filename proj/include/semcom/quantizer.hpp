#pragma once

// Memory-based semantic quantization: past embeddings are the codebook and
// each fresh embedding is sent as the index of its nearest codeword.

#include <string>

#include "semcom/core.hpp"

namespace semcom {

struct Assignment {
    std::size_t index = 0;
    double distortion = 0.0;
};

inline Codebook build_identity_codebook(const LabeledDataset& ds) {
    ds.validate();
    Codebook cb;
    cb.entries = ds.embeddings;
    std::vector<std::uint32_t> ids(ds.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint32_t>(i);
    cb.source_ids = std::move(ids);
    return cb;
}

/// Exhaustive nearest-codeword search; ties go to the lowest index.
inline Assignment assign_index(const Codebook& cb, EmbeddingView q) {
    if (cb.size() == 0) throw UsageError("empty codebook");
    if (q.size() != cb.dim())
        throw UsageError("query dimension " + std::to_string(q.size()) + " != codebook dimension " +
                         std::to_string(cb.dim()));
    Assignment best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < cb.size(); ++i) {
        const double d2 = squared_l2_distance(cb.entry(i), q);
        if (d2 < best.distortion) best = {i, d2};
    }
    best.distortion = std::sqrt(best.distortion);
    return best;
}

inline EmbeddingView reconstruct(const Codebook& cb, std::size_t index) {
    if (index >= cb.size())
        throw UsageError("index " + std::to_string(index) + " out of range for codebook of " +
                         std::to_string(cb.size()));
    return cb.entry(index);
}

/// Received indices may exceed M - 1 when M is not a power of two.
inline std::size_t clamp_index(std::uint64_t received, std::size_t codebook_size) {
    return received >= codebook_size ? codebook_size - 1 : static_cast<std::size_t>(received);
}

/// Information bits for transmitting `n_messages` fixed-width indices.
inline std::uint64_t information_bits(std::uint64_t n_messages, std::uint64_t codebook_size) {
    return n_messages * index_bit_width(codebook_size);
}

}  // namespace semcom
