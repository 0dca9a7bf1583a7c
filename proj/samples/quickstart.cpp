// Minimal end-to-end use of the library: cluster a codebook dataset with
// affinity propagation, send test indices over a noisy link, classify the
// reconstructions.

#include <iostream>

#include "semcom/semcom.hpp"

int main() {
    using namespace semcom;

    const auto all = generate_synthetic(4, 300, 32, 0.15, 7);
    Rng split_rng(7);
    const auto data = shuffled(all, split_rng);
    const auto codebook_data = data.slice(0, 400);
    const auto train = data.slice(400, 400);
    const auto test = data.slice(800, 400);

    auto clf = build_classifier(train.dim(), train.n_class, 7);
    train_classifier(clf, train, TrainConfig{});

    const auto ap = run_affinity(codebook_data, APConfig{}, 7);
    const auto cb = build_centroid_codebook(codebook_data, ap);
    std::cout << ap << "\nbits per message: " << cb.bit_width() << '\n';

    std::vector<std::uint64_t> sent;
    for (std::size_t i = 0; i < test.size(); ++i) sent.push_back(assign_index(cb, test.row(i)).index);

    for (double snr : {0.0, 5.0, 10.0}) {
        const auto link = transmit_indices(sent, cb.bit_width(), ChannelConfig{ChannelKind::awgn, snr, 7, 0.0});
        std::size_t correct = 0;
        for (std::size_t i = 0; i < test.size(); ++i)
            correct += classify(clf, reconstruct(cb, clamp_index(link.indices[i], cb.size()))) == test.labels[i];
        std::cout << "snr " << snr << " dB: accuracy " << double(correct) / double(test.size()) << ", pre-FEC BER "
                  << link.stats.pre_fec_ber() << '\n';
    }
}
