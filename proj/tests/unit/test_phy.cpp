#include <gtest/gtest.h>

#include "semcom/phy.hpp"
#include "support/oracles.hpp"

using namespace semcom;

TEST(Packing, SingleIndexPadsToOneBlock) {
    const std::vector<std::uint64_t> idx{5};
    const auto bits = pack_indices(idx, 4);
    ASSERT_EQ(bits.size(), 125u);
    EXPECT_EQ((Bits(bits.begin(), bits.begin() + 4)), (Bits{0, 1, 0, 1}));
    for (std::size_t i = 4; i < bits.size(); ++i) EXPECT_EQ(bits[i], 0);
}

TEST(Packing, TableScaleBitCount) {
    const std::vector<std::uint64_t> idx(2000, 9999);
    const auto bits = pack_indices(idx, 14);
    EXPECT_EQ(bits.size() % 125, 0u);
    EXPECT_GE(bits.size(), 28000u);
    EXPECT_LT(bits.size(), 28000u + 125);
}

TEST(Packing, RoundTripAndErrors) {
    Rng rng(1);
    std::vector<std::uint64_t> idx(333);
    for (auto& v : idx) v = rng.uniform_index(1u << 11);
    EXPECT_EQ(unpack_indices(pack_indices(idx, 11), idx.size(), 11), idx);
    EXPECT_THROW(pack_indices(std::vector<std::uint64_t>{16}, 4), UsageError);
    EXPECT_THROW(pack_indices(idx, 0), UsageError);
    EXPECT_THROW(unpack_indices(Bits(10), 3, 4), UsageError);
}

TEST(Qpsk, GrayConstellation) {
    const double s = 1.0 / std::sqrt(2.0);
    const auto x = qpsk_modulate(Bits{0, 0, 0, 1, 1, 1, 1, 0});
    ASSERT_EQ(x.size(), 4u);
    EXPECT_NEAR(std::abs(x[0] - Symbol(s, s)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(x[1] - Symbol(-s, s)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(x[2] - Symbol(-s, -s)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(x[3] - Symbol(s, -s)), 0.0, 1e-15);
    for (auto v : x) EXPECT_NEAR(std::norm(v), 1.0, 1e-15);
}

TEST(Qpsk, OddLengthPadded) {
    const auto x = qpsk_modulate(Bits{1, 1, 1});
    ASSERT_EQ(x.size(), 2u);
    EXPECT_EQ(qpsk_demodulate(x), (Bits{1, 1, 1, 0}));
}

TEST(Qpsk, HardDecision) {
    const std::vector<Symbol> y{{0.9, -1.1}};
    EXPECT_EQ(qpsk_demodulate(y), (Bits{1, 0}));
}

TEST(Qpsk, NoiselessRoundTrip) {
    Rng rng(2);
    Bits b(1000);
    for (auto& v : b) v = static_cast<std::uint8_t>(rng.uniform_index(2));
    EXPECT_EQ(qpsk_demodulate(qpsk_modulate(b)), b);
}

TEST(Channel, NoiseVarianceFromSnr) {
    ChannelConfig c;
    c.snr_db = 10;
    EXPECT_NEAR(c.noise_variance(), 0.1, 1e-15);
    c.snr_db = std::numeric_limits<double>::infinity();
    EXPECT_EQ(c.noise_variance(), 0.0);
    c.snr_db = std::nan("");
    EXPECT_THROW(c.validate(), UsageError);
}

TEST(Channel, PureInversionIsExactWithoutNoise) {
    Rng rng(4);
    ChannelConfig c{ChannelKind::rayleigh_inverted, std::numeric_limits<double>::infinity(), 0, 0.0};
    const auto tx = qpsk_modulate(Bits{0, 1, 1, 0, 1, 1, 0, 0});
    const auto rx = channel(tx, c, rng);
    for (std::size_t i = 0; i < tx.size(); ++i) EXPECT_NEAR(std::abs(rx[i] - tx[i]), 0.0, 1e-12);
}

TEST(Channel, ClippedFadesAreCountedAndDerotated) {
    Rng rng(5);
    ChannelConfig c{ChannelKind::rayleigh_inverted, std::numeric_limits<double>::infinity(), 0, 0.5};
    std::vector<Symbol> tx(10000, Symbol(1.0, 0.0));
    ChannelStats st;
    const auto rx = channel(tx, c, rng, &st);
    // P(|h| < r) = 1 - exp(-r^2) for unit-power Rayleigh.
    EXPECT_NEAR(double(st.clipped_symbols) / 1e4, 1.0 - std::exp(-0.25), 0.02);
    for (const auto& y : rx) {
        EXPECT_NEAR(y.imag(), 0.0, 1e-12);
        EXPECT_GT(y.real(), 0.0);
    }
}

TEST(Link, NoiselessIdentity) {
    Rng rng(6);
    std::vector<std::uint64_t> idx(500);
    for (auto& v : idx) v = rng.uniform_index(1000);
    ChannelConfig c{ChannelKind::awgn, std::numeric_limits<double>::infinity(), 1, 0.0};
    const auto r = transmit_indices(idx, 10, c);
    EXPECT_EQ(r.indices, idx);
    EXPECT_EQ(r.stats.information_bits, 5000u);
    EXPECT_EQ(r.stats.rs_blocks, 40u);
    EXPECT_EQ(r.stats.coded_bits, 40u * 155u);
    EXPECT_EQ(r.stats.pre_fec_bit_errors, 0u);
}

TEST(Link, HighSnrIsNearlyClean) {
    Rng rng(7);
    std::vector<std::uint64_t> idx(2000);
    for (auto& v : idx) v = rng.uniform_index(1000);
    ChannelConfig c{ChannelKind::awgn, 15.0, 2, 0.0};
    const auto r = transmit_indices(idx, 10, c);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) wrong += r.indices[i] != idx[i];
    EXPECT_LT(double(wrong) / double(idx.size()), 1e-3);
}

TEST(Link, SeedsAndStreamsAreReproducible) {
    std::vector<std::uint64_t> idx(400, 3);
    ChannelConfig c{ChannelKind::awgn, 0.0, 9, 0.0};
    const auto a = transmit_indices(idx, 4, c), b = transmit_indices(idx, 4, c);
    EXPECT_EQ(a.indices, b.indices);
    EXPECT_EQ(a.stats.pre_fec_bit_errors, b.stats.pre_fec_bit_errors);
    bool differs = false;
    for (std::uint64_t s = 1; s <= 3; ++s) {
        const auto d = transmit_indices(idx, 4, c, s);
        differs |= d.indices != a.indices || d.stats.pre_fec_bit_errors != a.stats.pre_fec_bit_errors;
    }
    EXPECT_TRUE(differs);
}

TEST(Link, AnalyticSerAgreesWithOracle) {
    for (double snr : {0.0, 6.0, 10.0, 14.0}) EXPECT_NEAR(qpsk_ser_theory(snr), oracle::qpsk_ser(snr), 1e-15);
}

TEST(ChannelKindNames, RoundTrip) {
    EXPECT_EQ(parse_channel_kind(to_string(ChannelKind::rayleigh_inverted)), ChannelKind::rayleigh_inverted);
    EXPECT_EQ(parse_channel_kind("awgn"), ChannelKind::awgn);
    EXPECT_THROW(parse_channel_kind("rician"), UsageError);
}
