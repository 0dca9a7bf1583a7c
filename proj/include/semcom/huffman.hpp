#pragma once

// Semantic-agnostic text baseline: canonical Huffman code over 3-byte
// groups. Unseen groups are sent as an escape code plus 24 literal bits.

#include <algorithm>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "semcom/core.hpp"

namespace semcom {

inline constexpr std::size_t huffman_group = 3;

/// Symbol key: a 3-byte group packed big-endian, or `escape_symbol`.
inline constexpr std::uint32_t escape_symbol = 1u << 24;

struct HuffmanCode {
    std::uint32_t bits = 0;  // code value, MSB first
    std::uint8_t length = 0;
};

class HuffmanTable {
public:
    HuffmanTable() = default;

    /// Build from explicit code lengths (symbols sorted canonically by (length, key)).
    static HuffmanTable from_lengths(std::map<std::uint32_t, std::uint8_t> lengths) {
        HuffmanTable t;
        t.lengths_ = std::move(lengths);
        t.assign_canonical();
        return t;
    }

    const std::map<std::uint32_t, HuffmanCode>& codes() const noexcept { return codes_; }
    bool contains(std::uint32_t sym) const { return codes_.count(sym) != 0; }
    const HuffmanCode& code(std::uint32_t sym) const { return codes_.at(sym); }
    std::size_t size() const noexcept { return codes_.size(); }

    double kraft_sum() const {
        double s = 0.0;
        for (const auto& [sym, c] : codes_) s += std::ldexp(1.0, -static_cast<int>(c.length));
        return s;
    }

    /// Structural check: no code is a prefix of another.
    bool prefix_free() const {
        std::vector<std::pair<std::string, std::uint32_t>> strs;
        for (const auto& [sym, c] : codes_) strs.emplace_back(bit_string(c), sym);
        std::sort(strs.begin(), strs.end());
        for (std::size_t i = 1; i < strs.size(); ++i)
            if (strs[i].first.compare(0, strs[i - 1].first.size(), strs[i - 1].first) == 0) return false;
        return true;
    }

    static std::string bit_string(const HuffmanCode& c) {
        std::string s;
        for (unsigned b = c.length; b-- > 0;) s.push_back(((c.bits >> b) & 1u) ? '1' : '0');
        return s;
    }

    // Decoding tables: for each length, first code value and offset into `sorted_`.
    struct LengthRun {
        std::uint32_t first_code = 0;
        std::size_t first_index = 0;
        std::size_t count = 0;
    };
    const std::vector<LengthRun>& runs() const noexcept { return runs_; }
    const std::vector<std::uint32_t>& sorted_symbols() const noexcept { return sorted_; }

private:
    void assign_canonical() {
        std::vector<std::pair<std::uint8_t, std::uint32_t>> order;
        for (const auto& [sym, len] : lengths_) {
            if (len == 0 || len > 31) throw UsageError("Huffman code length out of range");
            order.emplace_back(len, sym);
        }
        std::sort(order.begin(), order.end());
        codes_.clear();
        sorted_.clear();
        runs_.assign(33, {});
        std::uint32_t code = 0;
        std::uint8_t prev_len = order.empty() ? 0 : order.front().first;
        for (std::size_t i = 0; i < order.size(); ++i) {
            const auto [len, sym] = order[i];
            if (i > 0) code = (code + 1) << (len - prev_len);
            prev_len = len;
            codes_[sym] = {code, len};
            auto& run = runs_[len];
            if (run.count == 0) {
                run.first_code = code;
                run.first_index = sorted_.size();
            }
            ++run.count;
            sorted_.push_back(sym);
        }
    }

    std::map<std::uint32_t, std::uint8_t> lengths_;
    std::map<std::uint32_t, HuffmanCode> codes_;
    std::vector<std::uint32_t> sorted_;
    std::vector<LengthRun> runs_;
};

namespace detail {

inline std::vector<std::uint32_t> text_groups(std::string_view text) {
    std::vector<std::uint32_t> groups;
    const std::size_t padded = std::max<std::size_t>(1, (text.size() + huffman_group - 1) / huffman_group);
    groups.reserve(padded);
    for (std::size_t g = 0; g < padded; ++g) {
        std::uint32_t key = 0;
        for (std::size_t c = 0; c < huffman_group; ++c) {
            const std::size_t pos = g * huffman_group + c;
            const auto byte = pos < text.size() ? static_cast<unsigned char>(text[pos]) : 0u;
            key = (key << 8) | byte;
        }
        groups.push_back(key);
    }
    return groups;
}

}  // namespace detail

/// Frequencies over NUL-padded 3-byte groups plus one escape symbol of count 1.
/// Tree merges break weight ties by the smallest symbol key in each subtree.
inline HuffmanTable build_huffman(const std::vector<std::string>& corpus) {
    if (corpus.empty()) throw UsageError("Huffman corpus must not be empty");
    std::map<std::uint32_t, std::uint64_t> freq;
    for (const auto& text : corpus)
        for (auto g : detail::text_groups(text)) ++freq[g];
    freq[escape_symbol] += 1;

    struct Node {
        std::uint64_t weight;
        std::uint32_t min_key;
        int left, right;
        std::uint32_t sym;
    };
    std::vector<Node> nodes;
    using Item = std::pair<std::pair<std::uint64_t, std::uint32_t>, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (const auto& [sym, w] : freq) {
        nodes.push_back({w, sym, -1, -1, sym});
        pq.push({{w, sym}, static_cast<int>(nodes.size() - 1)});
    }
    while (pq.size() > 1) {
        const auto a = pq.top();
        pq.pop();
        const auto b = pq.top();
        pq.pop();
        const Node merged{nodes[a.second].weight + nodes[b.second].weight,
                          std::min(nodes[a.second].min_key, nodes[b.second].min_key), a.second, b.second, 0};
        nodes.push_back(merged);
        pq.push({{merged.weight, merged.min_key}, static_cast<int>(nodes.size() - 1)});
    }

    std::map<std::uint32_t, std::uint8_t> lengths;
    std::vector<std::pair<int, std::uint8_t>> stack{{pq.top().second, 0}};
    while (!stack.empty()) {
        const auto [idx, depth] = stack.back();
        stack.pop_back();
        const Node& nd = nodes[static_cast<std::size_t>(idx)];
        if (nd.left < 0) {
            lengths[nd.sym] = std::max<std::uint8_t>(1, depth);
        } else {
            stack.push_back({nd.left, static_cast<std::uint8_t>(depth + 1)});
            stack.push_back({nd.right, static_cast<std::uint8_t>(depth + 1)});
        }
    }
    return HuffmanTable::from_lengths(std::move(lengths));
}

inline void append_code(Bits& out, const HuffmanCode& c) {
    for (unsigned b = c.length; b-- > 0;) out.push_back(static_cast<std::uint8_t>((c.bits >> b) & 1u));
}

inline Bits huffman_encode(const HuffmanTable& table, std::string_view text) {
    Bits out;
    for (auto g : detail::text_groups(text)) {
        if (table.contains(g)) {
            append_code(out, table.code(g));
        } else {
            append_code(out, table.code(escape_symbol));
            for (unsigned b = 24; b-- > 0;) out.push_back(static_cast<std::uint8_t>((g >> b) & 1u));
        }
    }
    return out;
}

/// Inverse of huffman_encode; trailing NUL padding is stripped.
inline std::string huffman_decode(const HuffmanTable& table, std::span<const std::uint8_t> bits) {
    std::string out;
    std::size_t pos = 0;
    const auto& runs = table.runs();
    const auto& sorted = table.sorted_symbols();
    while (pos < bits.size()) {
        std::uint32_t code = 0;
        bool matched = false;
        std::uint32_t sym = 0;
        for (std::size_t len = 1; len < runs.size(); ++len) {
            if (pos >= bits.size()) break;
            code = (code << 1) | (bits[pos++] & 1u);
            const auto& run = runs[len];
            if (run.count && code >= run.first_code && code - run.first_code < run.count) {
                sym = sorted[run.first_index + (code - run.first_code)];
                matched = true;
                break;
            }
        }
        if (!matched) throw FormatError("dangling bits at end of Huffman stream");
        if (sym == escape_symbol) {
            if (bits.size() - pos < 24) throw FormatError("truncated escape literal in Huffman stream");
            sym = 0;
            for (int b = 0; b < 24; ++b) sym = (sym << 1) | (bits[pos++] & 1u);
        }
        for (int shift = 16; shift >= 0; shift -= 8) out.push_back(static_cast<char>((sym >> shift) & 0xFFu));
    }
    while (!out.empty() && out.back() == '\0') out.pop_back();
    return out;
}

/// One line per symbol: hex group (or "escape"), a space, the code bits.
inline void write_huffman_table(std::ostream& os, const HuffmanTable& table) {
    for (const auto& [sym, c] : table.codes()) {
        if (sym == escape_symbol)
            os << "escape";
        else
            os << std::hex << std::setw(6) << std::setfill('0') << sym << std::dec;
        os << ' ' << HuffmanTable::bit_string(c) << '\n';
    }
}

inline HuffmanTable read_huffman_table(std::istream& is) {
    std::map<std::uint32_t, std::uint8_t> lengths;
    std::string key, bits;
    while (is >> key >> bits) {
        std::uint32_t sym = 0;
        if (key == "escape") {
            sym = escape_symbol;
        } else {
            if (key.size() != 6) throw FormatError("Huffman table key '" + key + "' is not 6 hex digits");
            sym = static_cast<std::uint32_t>(std::stoul(key, nullptr, 16));
        }
        if (bits.empty() || bits.size() > 31) throw FormatError("bad Huffman code '" + bits + "'");
        lengths[sym] = static_cast<std::uint8_t>(bits.size());
    }
    return HuffmanTable::from_lengths(std::move(lengths));
}

}  // namespace semcom
