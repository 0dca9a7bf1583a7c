#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "semcom/experiment.hpp"

using namespace semcom;

namespace {

std::string random_text(Rng& rng, std::size_t max_len, std::string_view alphabet) {
    std::string s(rng.uniform_index(max_len + 1), ' ');
    for (auto& c : s) c = alphabet[rng.uniform_index(alphabet.size())];
    return s;
}

std::vector<std::string> random_corpus(Rng& rng, std::size_t n) {
    std::vector<std::string> c(n);
    for (auto& s : c) s = random_text(rng, 60, "aaaabbbcdeeeee ");
    return c;
}

}  // namespace

TEST(Huffman, SingleSymbolCorpusGivesOneBitCodes) {
    const auto t = build_huffman({"abcabcabc"});
    ASSERT_EQ(t.size(), 2u);
    for (const auto& [sym, c] : t.codes()) EXPECT_EQ(c.length, 1u);
    EXPECT_EQ(huffman_encode(t, "abcabc").size(), 2u);
}

TEST(Huffman, EmptyCorpusRejected) { EXPECT_THROW(build_huffman({}), UsageError); }

TEST(Huffman, KraftAndPrefixFreeOnRandomCorpora) {
    Rng rng(1);
    for (int t = 0; t < 30; ++t) {
        const auto table = build_huffman(random_corpus(rng, 50));
        EXPECT_LE(table.kraft_sum(), 1.0 + 1e-12);
        EXPECT_NEAR(table.kraft_sum(), 1.0, 1e-12);  // full binary tree
        EXPECT_TRUE(table.prefix_free());
        EXPECT_TRUE(table.contains(escape_symbol));
    }
}

TEST(Huffman, AverageLengthWithinEntropyPlusOne) {
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
        const auto corpus = random_corpus(rng, 80);
        const auto table = build_huffman(corpus);
        std::map<std::uint32_t, double> freq;
        for (const auto& s : corpus)
            for (auto g : detail::text_groups(s)) freq[g] += 1;
        freq[escape_symbol] += 1;
        double total = 0, entropy = 0, avg = 0;
        for (const auto& [sym, f] : freq) total += f;
        for (const auto& [sym, f] : freq) {
            const double p = f / total;
            entropy -= p * std::log2(p);
            avg += p * table.code(sym).length;
        }
        EXPECT_GE(avg, entropy - 1e-12);
        EXPECT_LE(avg, entropy + 1.0);
    }
}

TEST(Huffman, RoundTripRandomStrings) {
    Rng rng(3);
    const auto table = build_huffman(random_corpus(rng, 100));
    for (int t = 0; t < 1000; ++t) {
        // Includes characters never seen in the corpus to exercise the escape path.
        const auto s = random_text(rng, 40, "abcdexyz Q!");
        ASSERT_EQ(huffman_decode(table, huffman_encode(table, s)), s);
    }
}

TEST(Huffman, ShortTextIsPaddedAndRoundTrips) {
    const auto table = build_huffman({"hello world", "hi"});
    for (std::string s : {"", "h", "hi", "hel"}) EXPECT_EQ(huffman_decode(table, huffman_encode(table, s)), s);
}

TEST(Huffman, DanglingBitsAreFormatErrors) {
    Rng rng(4);
    const auto table = build_huffman(random_corpus(rng, 40));
    auto bits = huffman_encode(table, "ab");
    // Append a proper prefix of the longest code.
    const HuffmanCode* longest = nullptr;
    for (const auto& [sym, c] : table.codes())
        if (!longest || c.length > longest->length) longest = &c;
    ASSERT_GT(longest->length, 1u);
    const auto prefix = HuffmanTable::bit_string(*longest).substr(0, longest->length - 1);
    for (char c : prefix) bits.push_back(c == '1');
    EXPECT_THROW(huffman_decode(table, bits), FormatError);

    auto esc = huffman_encode(table, "QQQ");
    esc.resize(esc.size() - 3);
    EXPECT_THROW(huffman_decode(table, esc), FormatError);
}

TEST(Huffman, CompressesNaturalText) {
    std::vector<std::uint16_t> labels(500);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<std::uint16_t>(i % 4);
    const auto corpus = synthetic_texts(labels, 4, 1);
    const auto table = build_huffman(corpus);
    std::size_t bits = 0, chars = 0;
    for (const auto& s : corpus) {
        bits += huffman_encode(table, s).size();
        chars += s.size();
    }
    EXPECT_LT(bits, 8 * chars);
}

TEST(Huffman, TableTextRoundTrip) {
    Rng rng(5);
    const auto table = build_huffman(random_corpus(rng, 30));
    std::stringstream ss;
    write_huffman_table(ss, table);
    const auto back = read_huffman_table(ss);
    ASSERT_EQ(back.size(), table.size());
    for (const auto& [sym, c] : table.codes()) {
        EXPECT_EQ(back.code(sym).bits, c.bits);
        EXPECT_EQ(back.code(sym).length, c.length);
    }
    std::istringstream bad("12345 0101\n");
    EXPECT_THROW(read_huffman_table(bad), FormatError);
}
