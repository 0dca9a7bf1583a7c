#pragma once

// Digital link used by every semantic model: fixed-width index packing,
// RS(31,25) over GF(32), Gray-mapped QPSK, and an AWGN or channel-inverted
// Rayleigh channel y = h x + z. SNR is -10 log10(sigma_z^2) at unit symbol power.

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "semcom/core.hpp"
#include "semcom/rs.hpp"

namespace semcom {

using Symbol = std::complex<double>;

inline constexpr std::size_t bits_per_rs_symbol = 5;
inline constexpr std::size_t rs_message_bits = rs::k * bits_per_rs_symbol;  // 125
inline constexpr std::size_t rs_codeword_bits = rs::n * bits_per_rs_symbol;  // 155

/// Big-endian fixed-width concatenation, zero-padded to whole RS message blocks.
inline Bits pack_indices(std::span<const std::uint64_t> indices, unsigned bit_width) {
    if (bit_width < 1 || bit_width > 64) throw UsageError("bit width must lie in [1, 64]");
    Bits bits;
    bits.reserve(indices.size() * bit_width + rs_message_bits);
    for (auto v : indices) {
        if (bit_width < 64 && v >> bit_width)
            throw UsageError("index " + std::to_string(v) + " does not fit in " + std::to_string(bit_width) + " bits");
        for (unsigned b = bit_width; b-- > 0;) bits.push_back(static_cast<std::uint8_t>((v >> b) & 1u));
    }
    const std::size_t padded = (bits.size() + rs_message_bits - 1) / rs_message_bits * rs_message_bits;
    bits.resize(std::max(padded, rs_message_bits), 0);
    return bits;
}

inline std::vector<std::uint64_t> unpack_indices(std::span<const std::uint8_t> bits, std::size_t count,
                                                 unsigned bit_width) {
    if (bit_width < 1 || bit_width > 64) throw UsageError("bit width must lie in [1, 64]");
    if (bits.size() < count * bit_width) throw UsageError("bit stream too short for requested indices");
    std::vector<std::uint64_t> out(count, 0);
    std::size_t pos = 0;
    for (auto& v : out)
        for (unsigned b = 0; b < bit_width; ++b) v = (v << 1) | (bits[pos++] & 1u);
    return out;
}

namespace detail {

inline std::vector<Gf32> bits_to_symbols(std::span<const std::uint8_t> bits) {
    std::vector<Gf32> syms(bits.size() / bits_per_rs_symbol);
    for (std::size_t s = 0; s < syms.size(); ++s) {
        unsigned v = 0;
        for (std::size_t b = 0; b < bits_per_rs_symbol; ++b) v = (v << 1) | bits[s * bits_per_rs_symbol + b];
        syms[s] = Gf32(v);
    }
    return syms;
}

inline void append_symbol_bits(Bits& out, Gf32 s) {
    for (std::size_t b = bits_per_rs_symbol; b-- > 0;) out.push_back(static_cast<std::uint8_t>((s.value >> b) & 1u));
}

}  // namespace detail

/// Gray map: 00 -> (+1+j), 01 -> (-1+j), 11 -> (-1-j), 10 -> (+1-j), all scaled by 1/sqrt(2).
/// An odd-length stream is padded with one zero bit.
inline std::vector<Symbol> qpsk_modulate(std::span<const std::uint8_t> bits) {
    const double a = 1.0 / std::sqrt(2.0);
    std::vector<Symbol> out((bits.size() + 1) / 2);
    for (std::size_t s = 0; s < out.size(); ++s) {
        const unsigned b0 = bits[2 * s] & 1u;
        const unsigned b1 = (2 * s + 1 < bits.size()) ? (bits[2 * s + 1] & 1u) : 0u;
        out[s] = {b1 ? -a : a, b0 ? -a : a};
    }
    return out;
}

/// Hard quadrant decision; a zero coordinate counts as positive.
inline Bits qpsk_demodulate(std::span<const Symbol> rx) {
    Bits bits;
    bits.reserve(rx.size() * 2);
    for (const auto& y : rx) {
        bits.push_back(y.imag() < 0.0 ? 1 : 0);
        bits.push_back(y.real() < 0.0 ? 1 : 0);
    }
    return bits;
}

enum class ChannelKind { awgn, rayleigh_inverted };

inline std::string to_string(ChannelKind k) { return k == ChannelKind::awgn ? "awgn" : "rayleigh_inverted"; }

inline ChannelKind parse_channel_kind(const std::string& s) {
    if (s == "awgn") return ChannelKind::awgn;
    if (s == "rayleigh_inverted" || s == "rayleigh") return ChannelKind::rayleigh_inverted;
    throw UsageError("unknown channel kind '" + s + "'");
}

struct ChannelConfig {
    ChannelKind kind = ChannelKind::awgn;
    double snr_db = 10.0;  // +inf gives a noiseless channel
    std::uint64_t seed = 0;
    // Rayleigh only: fades with |h| below the clip level are not inverted.
    // 0 selects pure inversion.
    double inversion_clip = 0.0;

    double noise_variance() const { return std::isinf(snr_db) && snr_db > 0 ? 0.0 : std::pow(10.0, -snr_db / 10.0); }

    void validate() const {
        if (std::isnan(snr_db)) throw UsageError("snr_db must be a number");
        if (!(inversion_clip >= 0.0)) throw UsageError("inversion_clip must be >= 0");
    }
};

struct ChannelStats {
    std::size_t clipped_symbols = 0;
};

/// y = h x + z. Under pure inversion the transmitter sends x / h (perfect CSI)
/// so the receiver sees x + z. A clipped symbol is sent uninverted and the
/// receiver derotates it by conj(h)/|h|, which leaves |h| x + z'.
inline std::vector<Symbol> channel(std::span<const Symbol> tx, const ChannelConfig& cfg, Rng& rng,
                                   ChannelStats* stats = nullptr) {
    cfg.validate();
    const double sigma2 = cfg.noise_variance();
    const double per_dim = std::sqrt(sigma2 / 2.0);
    const double fade_sd = std::sqrt(0.5);
    std::vector<Symbol> rx(tx.size());
    for (std::size_t i = 0; i < tx.size(); ++i) {
        Symbol y = tx[i];
        if (cfg.kind == ChannelKind::rayleigh_inverted) {
            const Symbol h{rng.normal(0.0, fade_sd), rng.normal(0.0, fade_sd)};
            const double mag = std::abs(h);
            if (cfg.inversion_clip > 0.0 && mag < cfg.inversion_clip) {
                if (stats) ++stats->clipped_symbols;
                y = h * tx[i];
                if (mag > 0.0) y *= std::conj(h) / mag;
            } else {
                y = h * (tx[i] / h);
            }
        }
        if (sigma2 > 0.0) y += Symbol{rng.normal(0.0, per_dim), rng.normal(0.0, per_dim)};
        rx[i] = y;
    }
    return rx;
}

struct LinkStats {
    std::size_t information_bits = 0;  // n_indices * bit_width, before padding/FEC
    std::size_t coded_bits = 0;
    std::size_t rs_blocks = 0;
    std::size_t pre_fec_bit_errors = 0;
    std::size_t post_fec_symbol_errors = 0;  // message symbols still wrong after decoding
    std::size_t corrected_symbols = 0;
    std::size_t decode_failures = 0;
    std::size_t padded_bits = 0;  // QPSK odd-length padding
    std::size_t clipped_symbols = 0;

    double pre_fec_ber() const { return coded_bits ? double(pre_fec_bit_errors) / double(coded_bits) : 0.0; }
};

struct LinkResult {
    std::vector<std::uint64_t> indices;
    LinkStats stats;
};

/// pack -> RS encode -> QPSK -> channel -> demodulate -> RS decode -> unpack.
/// `stream` selects an independent noise substream for the same seed.
inline LinkResult transmit_indices(std::span<const std::uint64_t> indices, unsigned bit_width,
                                   const ChannelConfig& cfg, std::uint64_t stream = 0) {
    cfg.validate();
    const Bits info = pack_indices(indices, bit_width);
    const std::size_t blocks = info.size() / rs_message_bits;

    Bits coded;
    coded.reserve(blocks * rs_codeword_bits);
    std::vector<rs::Message> sent(blocks);
    for (std::size_t blk = 0; blk < blocks; ++blk) {
        const auto syms = detail::bits_to_symbols(
            std::span<const std::uint8_t>(info).subspan(blk * rs_message_bits, rs_message_bits));
        std::copy(syms.begin(), syms.end(), sent[blk].begin());
        for (auto s : rs_encode(syms)) detail::append_symbol_bits(coded, s);
    }

    Rng rng = Rng::substream(cfg.seed, streams::channel, stream);
    ChannelStats cstats;
    const auto tx = qpsk_modulate(coded);
    const auto rx = channel(tx, cfg, rng, &cstats);
    Bits demod = qpsk_demodulate(rx);

    LinkResult res;
    res.stats.information_bits = indices.size() * bit_width;
    res.stats.coded_bits = coded.size();
    res.stats.rs_blocks = blocks;
    res.stats.padded_bits = demod.size() - coded.size();
    res.stats.clipped_symbols = cstats.clipped_symbols;
    demod.resize(coded.size());
    for (std::size_t i = 0; i < coded.size(); ++i) res.stats.pre_fec_bit_errors += demod[i] != coded[i];

    Bits decoded;
    decoded.reserve(info.size());
    for (std::size_t blk = 0; blk < blocks; ++blk) {
        const auto syms = detail::bits_to_symbols(
            std::span<const std::uint8_t>(demod).subspan(blk * rs_codeword_bits, rs_codeword_bits));
        const auto dec = rs_decode(syms);
        res.stats.decode_failures += dec.failed;
        res.stats.corrected_symbols += static_cast<std::size_t>(dec.corrected);
        for (std::size_t s = 0; s < rs::k; ++s) {
            res.stats.post_fec_symbol_errors += dec.message[s] != sent[blk][s];
            detail::append_symbol_bits(decoded, dec.message[s]);
        }
    }
    res.indices = unpack_indices(decoded, indices.size(), bit_width);
    return res;
}

/// Closed-form Gray QPSK symbol error rate at per-symbol SNR 1 / sigma^2.
inline double qpsk_ser_theory(double snr_db) {
    const double snr = std::pow(10.0, snr_db / 10.0);
    const double q = 0.5 * std::erfc(std::sqrt(snr) / std::sqrt(2.0));
    return 2.0 * q - q * q;
}

}  // namespace semcom
