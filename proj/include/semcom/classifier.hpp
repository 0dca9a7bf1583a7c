#pragma once

// Receiver-side classification block: p -> 128 -> 32 -> n_class.

#include <chrono>
#include <numeric>

#include "semcom/neural.hpp"

namespace semcom {

struct ClassifierModel {
    DenseNet net;
    std::size_t p = 0;
    std::uint32_t n_class = 0;
};

inline constexpr std::size_t classifier_hidden1 = 128;
inline constexpr std::size_t classifier_hidden2 = 32;

inline ClassifierModel build_classifier(std::size_t p, std::uint32_t n_class, std::uint64_t seed) {
    if (p < 1) throw UsageError("classifier input dimension must be >= 1");
    if (n_class < 2) throw UsageError("classifier needs at least two classes");
    Rng rng = Rng::substream(seed, streams::classifier, 0);
    ClassifierModel m;
    m.p = p;
    m.n_class = n_class;
    m.net = make_dense_net({p, classifier_hidden1, classifier_hidden2, n_class}, Activation::relu,
                           Activation::identity, rng);
    return m;
}

inline ClassifierModel classifier_from_net(DenseNet net) {
    net.validate();
    if (net.layers.size() != 3 || net.layers[0].out != classifier_hidden1 || net.layers[1].out != classifier_hidden2)
        throw UsageError("network is not a 128/32/n_class classifier");
    ClassifierModel m;
    m.p = net.input_dim();
    m.n_class = static_cast<std::uint32_t>(net.output_dim());
    m.net = std::move(net);
    return m;
}

/// Argmax over logits, lowest index on ties.
inline std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

inline std::vector<double> classifier_logits(const ClassifierModel& model, EmbeddingView q) {
    if (q.size() != model.p)
        throw UsageError("embedding dimension " + std::to_string(q.size()) + " != classifier input " +
                         std::to_string(model.p));
    const auto x = to_double(q);
    return predict(model.net, x);
}

inline std::size_t classify(const ClassifierModel& model, EmbeddingView q) {
    return argmax(classifier_logits(model, q));
}

struct TrainStats {
    double t_train_s = 0.0;
    std::vector<double> epoch_loss;  // mean per-sample loss
};

/// Minibatch Adam on softmax cross-entropy with per-epoch exponential LR decay.
inline TrainStats train_classifier(ClassifierModel& model, const LabeledDataset& train, const TrainConfig& cfg) {
    cfg.validate();
    train.validate();
    if (train.dim() != model.p) throw UsageError("training data dimension does not match classifier");
    if (train.n_class > model.n_class) throw UsageError("training data has more classes than the classifier");

    const auto start = std::chrono::steady_clock::now();
    Rng rng = Rng::substream(cfg.seed, streams::classifier, 1);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    AdamState adam;
    TrainStats stats;
    const auto params = parameter_blocks(model.net);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = exponential_lr(cfg.initial_lr, cfg.scheduler_gamma, epoch);
        rng.shuffle(order.begin(), order.end());
        double epoch_loss = 0.0;
        for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
            const std::size_t last = std::min(order.size(), first + cfg.batch_size);
            auto grads = NetGradients::zeros_like(model.net);
            for (std::size_t b = first; b < last; ++b) {
                const auto idx = order[b];
                const auto x = to_double(train.row(idx));
                const auto fw = forward(model.net, x);
                const auto ce = softmax_cross_entropy(fw.output, train.labels[idx]);
                if (!std::isfinite(ce.loss))
                    throw std::runtime_error("classifier loss is not finite (epoch " + std::to_string(epoch) +
                                             ", batch " + std::to_string(first / cfg.batch_size) + ")");
                epoch_loss += ce.loss;
                backward_into(model.net, fw.cache, ce.grad, grads);
            }
            grads.scale(1.0 / static_cast<double>(last - first));
            const auto gblocks = gradient_blocks(grads);
            adam_step(params, gblocks, adam, lr, cfg);
            if (!model.net.finite())
                throw std::runtime_error("classifier parameters diverged (epoch " + std::to_string(epoch) + ")");
        }
        stats.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    stats.t_train_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return stats;
}

inline double classification_accuracy(const ClassifierModel& model, const LabeledDataset& ds) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) correct += classify(model, ds.row(i)) == ds.labels[i];
    return ds.size() ? static_cast<double>(correct) / static_cast<double>(ds.size()) : 0.0;
}

}  // namespace semcom
