#include <gtest/gtest.h>

#include <set>

#include "semcom/rs.hpp"
#include "support/oracles.hpp"

using namespace semcom;

namespace {

rs::Message random_message(Rng& rng) {
    rs::Message m{};
    for (auto& s : m) s = Gf32(static_cast<unsigned>(rng.uniform_index(32)));
    return m;
}

/// Flips `weight` distinct symbols by nonzero offsets.
rs::Codeword corrupt(rs::Codeword cw, std::size_t weight, Rng& rng) {
    std::set<std::size_t> pos;
    while (pos.size() < weight) pos.insert(rng.uniform_index(rs::n));
    for (auto p : pos) cw[p] = cw[p] + Gf32(1 + static_cast<unsigned>(rng.uniform_index(31)));
    return cw;
}

}  // namespace

TEST(Gf32, FullMultiplicationTableMatchesOracle) {
    for (unsigned a = 0; a < 32; ++a)
        for (unsigned b = 0; b < 32; ++b) ASSERT_EQ(gf32_mul(Gf32(a), Gf32(b)).value, oracle::gf32_mul(a, b)) << a << "*" << b;
}

TEST(Gf32, Examples) {
    EXPECT_EQ(gf32_mul(Gf32(16), Gf32(2)).value, 5u);  // x^5 = x^2 + 1
    EXPECT_EQ((Gf32(7) + Gf32(7)).value, 0u);
    for (unsigned a = 1; a < 32; ++a) EXPECT_EQ(gf32::mul(Gf32(a), gf32::inv(Gf32(a))).value, 1u);
    // alpha has order 31.
    std::set<unsigned> powers;
    for (int e = 0; e < 31; ++e) powers.insert(gf32::alpha_pow(e).value);
    EXPECT_EQ(powers.size(), 31u);
    EXPECT_EQ(gf32::alpha_pow(31).value, 1u);
}

TEST(ReedSolomon, ZeroMessageGivesZeroCodeword) {
    const rs::Message m{};
    for (auto s : rs_encode(m)) EXPECT_EQ(s.value, 0u);
}

TEST(ReedSolomon, SystematicAndRootsAtAlphaOneToSix) {
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        const auto m = random_message(rng);
        const auto cw = rs_encode(m);
        for (std::size_t i = 0; i < rs::k; ++i) ASSERT_EQ(cw[i], m[i]);
        std::vector<unsigned> coeffs;
        for (auto s : cw) coeffs.push_back(s.value);
        for (unsigned j = 1; j <= 6; ++j) ASSERT_EQ(oracle::poly_eval(coeffs, oracle::gf32_pow(2, j)), 0u);
    }
}

TEST(ReedSolomon, WrongLengthRejected) {
    EXPECT_THROW(rs_encode(std::vector<Gf32>(24)), UsageError);
    EXPECT_THROW(rs_decode(std::vector<Gf32>(30)), UsageError);
}

TEST(ReedSolomon, CleanCodewordDecodesUnchanged) {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        const auto m = random_message(rng);
        const auto d = rs_decode(rs_encode(m));
        EXPECT_FALSE(d.failed);
        EXPECT_EQ(d.corrected, 0);
        EXPECT_EQ(d.message, m);
    }
}

TEST(ReedSolomon, CorrectsUpToThreeErrors) {
    Rng rng(7);
    for (std::size_t w = 1; w <= 3; ++w)
        for (int t = 0; t < 1000; ++t) {
            const auto m = random_message(rng);
            const auto d = rs_decode(corrupt(rs_encode(m), w, rng));
            ASSERT_FALSE(d.failed) << "weight " << w;
            ASSERT_EQ(d.corrected, static_cast<int>(w));
            ASSERT_EQ(d.message, m);
        }
}

TEST(ReedSolomon, HeavyCorruptionNeverCrashes) {
    Rng rng(9);
    std::size_t flagged = 0;
    for (std::size_t w = 4; w <= 31; ++w)
        for (int t = 0; t < 100; ++t) {
            const auto m = random_message(rng);
            const auto d = rs_decode(corrupt(rs_encode(m), w, rng));
            flagged += d.failed;
            // Either flagged, or decoded to some codeword within distance 3.
            if (!d.failed) {
                EXPECT_LE(d.corrected, 3);
            }
        }
    EXPECT_GT(flagged, 0u);
}

TEST(ReedSolomon, FailureReturnsRawSystematicSymbols) {
    Rng rng(13);
    for (int t = 0; t < 200; ++t) {
        const auto m = random_message(rng);
        const auto rx = corrupt(rs_encode(m), 10, rng);
        const auto d = rs_decode(rx);
        if (!d.failed) continue;
        for (std::size_t i = 0; i < rs::k; ++i) EXPECT_EQ(d.message[i], rx[i]);
    }
}
