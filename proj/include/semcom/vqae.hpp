#pragma once

// Learning-based semantic codebook: alpha-scaled dense encoder, latent
// vector quantization against a learned codebook, mirrored decoder.
//
// Training objective per sample:
//   ||q - q_hat||^2 + ||sg[z] - e||^2 + beta * ||z - sg[e]||^2
// with the reconstruction gradient copied from e straight through to z.

#include <chrono>
#include <numeric>

#include "semcom/neural.hpp"

namespace semcom {

struct VqaeConfig {
    std::size_t alpha = 4;
    std::size_t latent_dim = 16;
    std::size_t codebook_size = 63;
    double beta = 0.25;
    TrainConfig train{128, 50, 0.01, 0.97, 0.9, 0.999, 1e-8, 0};

    /// Image-scale defaults (1000-sample codebook data).
    static VqaeConfig stl10_like() { return {}; }
    /// Text-scale defaults (10000-sample codebook data).
    static VqaeConfig agnews_like() {
        VqaeConfig c;
        c.latent_dim = 64;
        c.codebook_size = 944;
        c.train.epochs = 30;
        c.train.initial_lr = 0.005;
        return c;
    }

    void validate(std::size_t p) const {
        if (alpha < 2) throw UsageError("alpha must be >= 2");
        if (latent_dim < 1) throw UsageError("latent dimension must be >= 1");
        if (latent_dim >= p) throw UsageError("latent dimension must be smaller than the embedding dimension");
        if (codebook_size < 1) throw UsageError("codebook size must be >= 1");
        if (!(beta > 0.0)) throw UsageError("beta must be > 0");
        train.validate();
    }
};

/// Encoder widths after the input: alpha^j, alpha^(j-1), ..., alpha^jt, K where
/// j is the largest exponent with alpha^j < p and jt the smallest with K < alpha^jt.
/// Falls back to a single K-wide layer when j < jt.
inline std::vector<std::size_t> plan_architecture(std::size_t p, std::size_t alpha, std::size_t K) {
    if (alpha < 2) throw UsageError("alpha must be >= 2");
    if (K < 1) throw UsageError("latent dimension must be >= 1");
    if (K >= p) throw UsageError("latent dimension K must be smaller than p");

    std::vector<std::size_t> powers{1};  // alpha^0, alpha^1, ... while < p
    while (powers.back() * alpha < p) powers.push_back(powers.back() * alpha);
    const std::size_t j = powers.size() - 1;

    std::size_t jt = 0;
    for (std::size_t v = 1; !(K < v); v *= alpha) ++jt;

    if (j < jt) return {K};
    std::vector<std::size_t> widths;
    for (std::size_t t = j + 1; t-- > jt;) widths.push_back(powers[t]);
    widths.push_back(K);
    return widths;
}

struct VqaeModel {
    DenseNet encoder;
    DenseNet decoder;
    std::size_t latent_dim = 0;
    std::vector<double> codebook;  // codebook_size x latent_dim

    std::size_t codebook_size() const { return latent_dim ? codebook.size() / latent_dim : 0; }
    std::span<const double> code(std::size_t m) const { return {codebook.data() + m * latent_dim, latent_dim}; }
    std::span<double> code(std::size_t m) { return {codebook.data() + m * latent_dim, latent_dim}; }
    std::size_t input_dim() const { return encoder.input_dim(); }
};

/// Untrained model with the planned architecture; codebook left empty.
inline VqaeModel make_vqae(std::size_t p, const VqaeConfig& cfg, Rng& rng) {
    cfg.validate(p);
    const auto widths = plan_architecture(p, cfg.alpha, cfg.latent_dim);
    std::vector<std::size_t> enc_dims{p};
    enc_dims.insert(enc_dims.end(), widths.begin(), widths.end());
    std::vector<std::size_t> dec_dims(enc_dims.rbegin(), enc_dims.rend());
    VqaeModel m;
    m.latent_dim = cfg.latent_dim;
    m.encoder = make_dense_net(enc_dims, Activation::relu, Activation::identity, rng);
    m.decoder = make_dense_net(dec_dims, Activation::relu, Activation::identity, rng);
    return m;
}

inline std::vector<double> encode(const VqaeModel& model, EmbeddingView q) {
    if (q.size() != model.input_dim()) throw UsageError("embedding dimension does not match encoder");
    const auto x = to_double(q);
    return predict(model.encoder, x);
}

struct LatentAssignment {
    std::size_t index = 0;
    std::vector<double> code;
};

/// Nearest codebook row to z, lowest index on ties.
inline LatentAssignment quantize_latent(std::span<const double> codebook, std::size_t latent_dim,
                                        std::span<const double> z) {
    if (latent_dim == 0 || z.size() != latent_dim || codebook.size() % latent_dim != 0 || codebook.empty())
        throw UsageError("latent codebook shape mismatch");
    const std::size_t M = codebook.size() / latent_dim;
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < M; ++m) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < latent_dim; ++k) {
            const double d = z[k] - codebook[m * latent_dim + k];
            d2 += d * d;
        }
        if (d2 < best_d2) {
            best_d2 = d2;
            best = m;
        }
    }
    return {best, {codebook.begin() + static_cast<std::ptrdiff_t>(best * latent_dim),
                   codebook.begin() + static_cast<std::ptrdiff_t>((best + 1) * latent_dim)}};
}

inline LatentAssignment quantize_latent(const VqaeModel& model, std::span<const double> z) {
    return quantize_latent(model.codebook, model.latent_dim, z);
}

inline std::vector<double> decode_code(const VqaeModel& model, std::size_t index) {
    if (index >= model.codebook_size()) throw UsageError("codebook index out of range");
    return predict(model.decoder, model.code(index));
}

/// Float embedding reconstructed from a received codebook index.
inline Embedding reconstruct(const VqaeModel& model, std::size_t index) {
    const auto y = decode_code(model, index);
    return {y.begin(), y.end()};
}

struct VqaeLossTerms {
    double reconstruction = 0.0;
    double codebook = 0.0;
    double commitment = 0.0;  // unscaled ||z - sg[e]||^2
    double beta = 0.25;
    std::size_t index = 0;
    std::vector<double> q_hat;

    double total() const { return reconstruction + codebook + beta * commitment; }
};

inline VqaeLossTerms vqae_loss(EmbeddingView q, const VqaeModel& model, double beta) {
    const auto x = to_double(q);
    const auto z = predict(model.encoder, x);
    const auto a = quantize_latent(model, z);
    VqaeLossTerms t;
    t.beta = beta;
    t.index = a.index;
    t.q_hat = predict(model.decoder, a.code);
    t.reconstruction = mse(t.q_hat, x).loss;
    t.codebook = mse(a.code, z).loss;
    t.commitment = mse(z, a.code).loss;
    return t;
}

struct VqaeGradients {
    NetGradients encoder;
    NetGradients decoder;
    std::vector<double> codebook;

    static VqaeGradients zeros_like(const VqaeModel& m) {
        return {NetGradients::zeros_like(m.encoder), NetGradients::zeros_like(m.decoder),
                std::vector<double>(m.codebook.size(), 0.0)};
    }
};

/// Selects which loss terms contribute gradients (all by default).
struct LossTermMask {
    bool reconstruction = true;
    bool codebook = true;
    bool commitment = true;
};

/// Accumulates one sample's gradients; returns its loss terms.
inline VqaeLossTerms vqae_accumulate_gradients(EmbeddingView q, const VqaeModel& model, double beta,
                                               VqaeGradients& grads, LossTermMask mask = {}) {
    const auto x = to_double(q);
    const auto enc = forward(model.encoder, x);
    const auto& z = enc.output;
    const auto a = quantize_latent(model, z);
    const auto dec = forward(model.decoder, a.code);

    VqaeLossTerms t;
    t.beta = beta;
    t.index = a.index;
    t.q_hat = dec.output;
    const auto rec = mse(dec.output, x);
    const auto cb = mse(a.code, z);  // d/de with z held constant
    const auto com = mse(z, a.code);  // d/dz with e held constant
    t.reconstruction = rec.loss;
    t.codebook = cb.loss;
    t.commitment = com.loss;

    std::vector<double> dz(model.latent_dim, 0.0);
    if (mask.reconstruction) {
        const auto de = backward_into(model.decoder, dec.cache, rec.grad, grads.decoder);
        for (std::size_t k = 0; k < dz.size(); ++k) dz[k] += de[k];  // straight-through
    }
    if (mask.codebook) {
        auto* g = grads.codebook.data() + a.index * model.latent_dim;
        for (std::size_t k = 0; k < model.latent_dim; ++k) g[k] += cb.grad[k];
    }
    if (mask.commitment)
        for (std::size_t k = 0; k < dz.size(); ++k) dz[k] += beta * com.grad[k];
    if (mask.reconstruction || mask.commitment) backward_into(model.encoder, enc.cache, dz, grads.encoder);
    return t;
}

struct VqaeTrainResult {
    VqaeModel model;
    double t_train_s = 0.0;
    std::vector<double> epoch_loss;  // mean total loss per sample
    std::size_t dead_codes = 0;      // entries never selected in the final epoch
};

inline VqaeTrainResult train_vqae(const LabeledDataset& ds, const VqaeConfig& cfg) {
    ds.validate();
    cfg.validate(ds.dim());
    if (cfg.codebook_size > ds.size())
        throw UsageError("codebook size " + std::to_string(cfg.codebook_size) + " exceeds the " +
                         std::to_string(ds.size()) + " training embeddings");

    const auto start = std::chrono::steady_clock::now();
    Rng init_rng = Rng::substream(cfg.train.seed, streams::vqae, 0);
    Rng shuffle_rng = Rng::substream(cfg.train.seed, streams::vqae, 1);

    VqaeTrainResult res;
    res.model = make_vqae(ds.dim(), cfg, init_rng);
    auto& model = res.model;

    // Codebook starts at the encodings of distinct data rows.
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    init_rng.shuffle(order.begin(), order.end());
    model.codebook.reserve(cfg.codebook_size * cfg.latent_dim);
    for (std::size_t m = 0; m < cfg.codebook_size; ++m) {
        const auto z = encode(model, ds.row(order[m]));
        model.codebook.insert(model.codebook.end(), z.begin(), z.end());
    }

    std::vector<std::span<double>> params = parameter_blocks(model.encoder);
    for (auto b : parameter_blocks(model.decoder)) params.push_back(b);
    params.emplace_back(model.codebook);
    AdamState adam;
    std::vector<std::size_t> usage(cfg.codebook_size, 0);

    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < cfg.train.epochs; ++epoch) {
        const double lr = exponential_lr(cfg.train.initial_lr, cfg.train.scheduler_gamma, epoch);
        shuffle_rng.shuffle(order.begin(), order.end());
        std::fill(usage.begin(), usage.end(), 0);
        double epoch_loss = 0.0;
        for (std::size_t first = 0; first < order.size(); first += cfg.train.batch_size) {
            const std::size_t last = std::min(order.size(), first + cfg.train.batch_size);
            auto grads = VqaeGradients::zeros_like(model);
            for (std::size_t b = first; b < last; ++b) {
                const auto t = vqae_accumulate_gradients(ds.row(order[b]), model, cfg.beta, grads);
                if (!std::isfinite(t.total()))
                    throw std::runtime_error("VQ-AE loss is not finite (epoch " + std::to_string(epoch) + ", batch " +
                                             std::to_string(first / cfg.train.batch_size) + ")");
                epoch_loss += t.total();
                ++usage[t.index];
            }
            const double inv = 1.0 / static_cast<double>(last - first);
            grads.encoder.scale(inv);
            grads.decoder.scale(inv);
            for (auto& g : grads.codebook) g *= inv;
            auto gblocks = gradient_blocks(grads.encoder);
            for (auto b : gradient_blocks(grads.decoder)) gblocks.push_back(b);
            gblocks.emplace_back(grads.codebook);
            adam_step(params, gblocks, adam, lr, cfg.train);
        }
        if (!model.encoder.finite() || !model.decoder.finite())
            throw std::runtime_error("VQ-AE parameters diverged (epoch " + std::to_string(epoch) + ")");
        res.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    res.dead_codes = static_cast<std::size_t>(std::count(usage.begin(), usage.end(), std::size_t{0}));
    res.t_train_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

/// Latent codebook as an SCBK codebook (its p field holds K).
inline Codebook latent_codebook(const VqaeModel& model) {
    Codebook cb;
    std::vector<float> data(model.codebook.begin(), model.codebook.end());
    cb.entries = Matrix(model.codebook_size(), model.latent_dim, std::move(data));
    return cb;
}

inline void set_latent_codebook(VqaeModel& model, const Codebook& cb) {
    model.latent_dim = cb.dim();
    model.codebook.assign(cb.entries.data().begin(), cb.entries.data().end());
}

}  // namespace semcom
