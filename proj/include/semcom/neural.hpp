#pragma once

// Small dense-network engine: affine layers with relu/identity activations,
// reverse-mode gradients, Adam, exponential LR decay and the two losses the
// classifier and the VQ autoencoder need. Parameters are double precision.

#include <cmath>
#include <string>
#include <vector>

#include "semcom/core.hpp"
#include "semcom/io.hpp"

namespace semcom {

enum class Activation : std::uint8_t { identity = 0, relu = 1 };

struct DenseLayer {
    Activation activation = Activation::identity;
    std::size_t out = 0;
    std::size_t in = 0;
    std::vector<double> weights;  // out x in, row-major
    std::vector<double> bias;     // out

    double& w(std::size_t o, std::size_t i) { return weights[o * in + i]; }
    double w(std::size_t o, std::size_t i) const { return weights[o * in + i]; }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct DenseNet {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().out; }

    void validate() const {
        if (layers.empty()) throw UsageError("network has no layers");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& L = layers[l];
            if (L.weights.size() != L.out * L.in || L.bias.size() != L.out)
                throw UsageError("layer " + std::to_string(l) + " parameter shape mismatch");
            if (l > 0 && layers[l - 1].out != L.in)
                throw UsageError("layer " + std::to_string(l) + " input does not chain with previous output");
        }
    }

    bool finite() const {
        for (const auto& L : layers) {
            for (double v : L.weights)
                if (!std::isfinite(v)) return false;
            for (double v : L.bias)
                if (!std::isfinite(v)) return false;
        }
        return true;
    }

    friend bool operator==(const DenseNet&, const DenseNet&) = default;
};

/// Layer widths [d0, d1, ..., dn]; hidden layers use `hidden`, the last one `output`.
/// Weights ~ U(+-sqrt(6 / (fan_in + fan_out))), biases zero.
inline DenseNet make_dense_net(const std::vector<std::size_t>& dims, Activation hidden, Activation output, Rng& rng) {
    if (dims.size() < 2) throw UsageError("network needs an input and at least one layer width");
    DenseNet net;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer L;
        L.in = dims[l];
        L.out = dims[l + 1];
        if (L.in == 0 || L.out == 0) throw UsageError("layer widths must be >= 1");
        L.activation = (l + 2 == dims.size()) ? output : hidden;
        const double limit = std::sqrt(6.0 / static_cast<double>(L.in + L.out));
        L.weights.resize(L.out * L.in);
        for (auto& w : L.weights) w = rng.uniform(-limit, limit);
        L.bias.assign(L.out, 0.0);
        net.layers.push_back(std::move(L));
    }
    return net;
}

/// Per-layer inputs and pre-activations recorded by forward().
struct ForwardCache {
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> pre;
};

struct ForwardResult {
    std::vector<double> output;
    ForwardCache cache;
};

inline ForwardResult forward(const DenseNet& net, std::span<const double> x) {
    if (net.layers.empty()) throw UsageError("network has no layers");
    if (x.size() != net.input_dim())
        throw UsageError("input dimension " + std::to_string(x.size()) + " != network input " +
                         std::to_string(net.input_dim()));
    ForwardResult res;
    res.cache.inputs.reserve(net.layers.size());
    res.cache.pre.reserve(net.layers.size());
    std::vector<double> cur(x.begin(), x.end());
    for (const auto& L : net.layers) {
        std::vector<double> z(L.bias);
        for (std::size_t o = 0; o < L.out; ++o) {
            const double* row = L.weights.data() + o * L.in;
            double acc = 0.0;
            for (std::size_t i = 0; i < L.in; ++i) acc += row[i] * cur[i];
            z[o] += acc;
        }
        std::vector<double> y(z);
        if (L.activation == Activation::relu)
            for (auto& v : y) v = v > 0.0 ? v : 0.0;
        res.cache.inputs.push_back(std::move(cur));
        res.cache.pre.push_back(std::move(z));
        cur = std::move(y);
    }
    res.output = std::move(cur);
    return res;
}

inline std::vector<double> predict(const DenseNet& net, std::span<const double> x) { return forward(net, x).output; }

/// Gradients shaped like a DenseNet's parameters.
struct NetGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;

    static NetGradients zeros_like(const DenseNet& net) {
        NetGradients g;
        for (const auto& L : net.layers) {
            g.weights.emplace_back(L.weights.size(), 0.0);
            g.bias.emplace_back(L.bias.size(), 0.0);
        }
        return g;
    }
    void scale(double f) {
        for (auto& v : weights)
            for (auto& x : v) x *= f;
        for (auto& v : bias)
            for (auto& x : v) x *= f;
    }
    bool all_zero() const {
        for (const auto& v : weights)
            for (double x : v)
                if (x != 0.0) return false;
        for (const auto& v : bias)
            for (double x : v)
                if (x != 0.0) return false;
        return true;
    }
};

/// Accumulates parameter gradients into `grads` and returns dL/dx.
/// relu'(0) is taken as 0.
inline std::vector<double> backward_into(const DenseNet& net, const ForwardCache& cache, std::span<const double> dy,
                                         NetGradients& grads) {
    if (cache.inputs.size() != net.layers.size() || cache.pre.size() != net.layers.size())
        throw UsageError("forward cache does not match network depth");
    if (grads.weights.size() != net.layers.size()) throw UsageError("gradient buffer does not match network");
    if (dy.size() != net.output_dim()) throw UsageError("output gradient dimension mismatch");

    std::vector<double> delta(dy.begin(), dy.end());
    for (std::size_t l = net.layers.size(); l-- > 0;) {
        const auto& L = net.layers[l];
        const auto& in = cache.inputs[l];
        const auto& z = cache.pre[l];
        if (in.size() != L.in || z.size() != L.out) throw UsageError("stale forward cache");
        if (L.activation == Activation::relu)
            for (std::size_t o = 0; o < L.out; ++o)
                if (!(z[o] > 0.0)) delta[o] = 0.0;
        auto& gw = grads.weights[l];
        auto& gb = grads.bias[l];
        std::vector<double> prev(L.in, 0.0);
        for (std::size_t o = 0; o < L.out; ++o) {
            const double d = delta[o];
            gb[o] += d;
            if (d == 0.0) continue;
            const double* row = L.weights.data() + o * L.in;
            double* grow = gw.data() + o * L.in;
            for (std::size_t i = 0; i < L.in; ++i) {
                grow[i] += d * in[i];
                prev[i] += d * row[i];
            }
        }
        delta = std::move(prev);
    }
    return delta;
}

struct BackwardResult {
    NetGradients grads;
    std::vector<double> input_grad;
};

inline BackwardResult backward(const DenseNet& net, const ForwardCache& cache, std::span<const double> dy) {
    BackwardResult res{NetGradients::zeros_like(net), {}};
    res.input_grad = backward_into(net, cache, dy, res.grads);
    return res;
}

struct TrainConfig {
    std::size_t batch_size = 128;
    std::size_t epochs = 15;
    double initial_lr = 0.001;
    double scheduler_gamma = 0.75;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (batch_size < 1) throw UsageError("batch_size must be >= 1");
        if (epochs < 1) throw UsageError("epochs must be >= 1");
        if (!(initial_lr > 0.0)) throw UsageError("initial_lr must be > 0");
        if (!(scheduler_gamma > 0.0 && scheduler_gamma <= 1.0)) throw UsageError("scheduler_gamma must lie in (0, 1]");
        if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
            throw UsageError("Adam betas must lie in [0, 1)");
        if (!(adam_eps > 0.0)) throw UsageError("adam_eps must be > 0");
    }
};

inline double exponential_lr(double initial_lr, double gamma, std::size_t epoch) {
    return initial_lr * std::pow(gamma, static_cast<double>(epoch));
}

/// Moment buffers for a list of parameter blocks.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::uint64_t step = 0;
};

inline void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
                      AdamState& state, double lr, const TrainConfig& cfg) {
    if (params.size() != grads.size()) throw UsageError("parameter/gradient block count mismatch");
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.emplace_back(p.size(), 0.0);
            state.v.emplace_back(p.size(), 0.0);
        }
    }
    if (state.m.size() != params.size()) throw UsageError("Adam state does not match parameters");
    ++state.step;
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto p = params[b];
        auto g = grads[b];
        auto& m = state.m[b];
        auto& v = state.v[b];
        if (p.size() != g.size() || m.size() != p.size()) throw UsageError("Adam block shape mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
        }
    }
}

inline std::vector<std::span<double>> parameter_blocks(DenseNet& net) {
    std::vector<std::span<double>> blocks;
    for (auto& L : net.layers) {
        blocks.emplace_back(L.weights);
        blocks.emplace_back(L.bias);
    }
    return blocks;
}

inline std::vector<std::span<const double>> gradient_blocks(const NetGradients& g) {
    std::vector<std::span<const double>> blocks;
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
        blocks.emplace_back(g.weights[l]);
        blocks.emplace_back(g.bias[l]);
    }
    return blocks;
}

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

/// Log-sum-exp cross-entropy; gradient softmax(logits) - onehot(label).
inline LossGrad softmax_cross_entropy(std::span<const double> logits, std::size_t label) {
    if (label >= logits.size()) throw UsageError("label out of range for logits");
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    LossGrad out;
    out.loss = lse - logits[label];
    out.grad.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out.grad[i] = std::exp(logits[i] - lse);
    out.grad[label] -= 1.0;
    return out;
}

/// Squared L2 norm of (a - b), sum convention; gradient with respect to a.
inline LossGrad mse(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw UsageError("mse dimension mismatch");
    LossGrad out;
    out.grad.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        out.loss += d * d;
        out.grad[i] = 2.0 * d;
    }
    return out;
}

inline std::vector<double> to_double(EmbeddingView v) { return {v.begin(), v.end()}; }

// SNET checkpoint: "SNET" u8 version=1 u8 layer_count, then per layer
// u8 activation, u32 out, u32 in, out*in float32 weights, out float32 bias.
inline std::vector<char> encode_net(const DenseNet& net) {
    net.validate();
    if (net.layers.size() > 255) throw UsageError("SNET supports at most 255 layers");
    detail::ByteWriter w;
    w.put_magic("SNET");
    w.put<std::uint8_t>(1);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(net.layers.size()));
    for (const auto& L : net.layers) {
        w.put<std::uint8_t>(static_cast<std::uint8_t>(L.activation));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(L.out));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(L.in));
        for (double v : L.weights) w.put<float>(static_cast<float>(v));
        for (double v : L.bias) w.put<float>(static_cast<float>(v));
    }
    return w.bytes();
}

inline DenseNet decode_net(std::vector<char> bytes, const std::string& what = "SNET") {
    detail::ByteReader r(std::move(bytes), what);
    r.expect_magic("SNET");
    if (r.get<std::uint8_t>("version") != 1) r.fail("unsupported version", "version");
    const auto count = r.get<std::uint8_t>("layer_count");
    if (count == 0) r.fail("no layers", "layer_count");
    DenseNet net;
    for (unsigned l = 0; l < count; ++l) {
        DenseLayer L;
        const auto act = r.get<std::uint8_t>("activation");
        if (act > 1) r.fail("unknown activation", "activation");
        L.activation = static_cast<Activation>(act);
        L.out = r.get<std::uint32_t>("out");
        L.in = r.get<std::uint32_t>("in");
        auto wf = r.get_floats(L.out * L.in, "weights");
        auto bf = r.get_floats(L.out, "bias");
        L.weights.assign(wf.begin(), wf.end());
        L.bias.assign(bf.begin(), bf.end());
        net.layers.push_back(std::move(L));
    }
    if (r.remaining() != 0) r.fail("trailing bytes", "end");
    try {
        net.validate();
    } catch (const UsageError& e) {
        throw FormatError(what + ": " + e.what());
    }
    return net;
}

inline void save_net(const DenseNet& net, const std::string& path) { detail::write_file(path, encode_net(net)); }
inline DenseNet load_net(const std::string& path) { return decode_net(detail::read_file(path), path); }

}  // namespace semcom
