#pragma once

// GF(2^5) arithmetic (primitive polynomial x^5 + x^2 + 1, alpha = 2) and a
// systematic narrow-sense Reed-Solomon (31, 25) code, t = 3.
//
// Codeword layout: symbols[0..24] message, symbols[25..30] parity.
// symbols[0] is the coefficient of x^30.

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "semcom/core.hpp"

namespace semcom {

struct Gf32 {
    std::uint8_t value = 0;

    constexpr Gf32() = default;
    constexpr explicit Gf32(unsigned v) : value(static_cast<std::uint8_t>(v & 31u)) {}

    friend constexpr bool operator==(Gf32, Gf32) = default;
    friend constexpr Gf32 operator+(Gf32 a, Gf32 b) { return Gf32(a.value ^ b.value); }
    friend constexpr Gf32 operator-(Gf32 a, Gf32 b) { return a + b; }
};

namespace gf32 {

inline constexpr unsigned order = 31;
inline constexpr unsigned primitive_poly = 0b100101;  // x^5 + x^2 + 1

struct Tables {
    std::array<std::uint8_t, 62> exp{};  // doubled to skip a modulo in mul
    std::array<std::uint8_t, 32> log{};
};

constexpr Tables make_tables() {
    Tables t;
    unsigned x = 1;
    for (unsigned i = 0; i < order; ++i) {
        t.exp[i] = static_cast<std::uint8_t>(x);
        t.exp[i + order] = static_cast<std::uint8_t>(x);
        t.log[x] = static_cast<std::uint8_t>(i);
        x <<= 1;
        if (x & 32u) x ^= primitive_poly;
    }
    return t;
}

inline constexpr Tables tables = make_tables();

constexpr Gf32 alpha_pow(int e) {
    int m = e % static_cast<int>(order);
    if (m < 0) m += order;
    return Gf32(tables.exp[static_cast<unsigned>(m)]);
}

constexpr unsigned log(Gf32 a) {
    if (a.value == 0) throw UsageError("log of zero in GF(32)");
    return tables.log[a.value];
}

constexpr Gf32 mul(Gf32 a, Gf32 b) {
    if (a.value == 0 || b.value == 0) return Gf32{};
    return Gf32(tables.exp[tables.log[a.value] + tables.log[b.value]]);
}

constexpr Gf32 inv(Gf32 a) {
    if (a.value == 0) throw UsageError("zero has no inverse in GF(32)");
    return Gf32(tables.exp[(order - tables.log[a.value]) % order]);
}

constexpr Gf32 div(Gf32 a, Gf32 b) { return mul(a, inv(b)); }

}  // namespace gf32

constexpr Gf32 operator*(Gf32 a, Gf32 b) { return gf32::mul(a, b); }
constexpr Gf32 gf32_mul(Gf32 a, Gf32 b) { return gf32::mul(a, b); }

namespace rs {

inline constexpr std::size_t n = 31;
inline constexpr std::size_t k = 25;
inline constexpr std::size_t parity = n - k;
inline constexpr std::size_t t = parity / 2;

using Message = std::array<Gf32, k>;
using Codeword = std::array<Gf32, n>;

/// g(x) = prod_{i=1..6} (x - alpha^i), coefficients highest degree first.
constexpr std::array<Gf32, parity + 1> make_generator() {
    std::array<Gf32, parity + 1> g{};
    g[0] = Gf32(1);
    std::size_t deg = 0;
    for (std::size_t i = 1; i <= parity; ++i) {
        const Gf32 root = gf32::alpha_pow(static_cast<int>(i));
        // multiply by (x + root)
        for (std::size_t j = deg + 1; j > 0; --j) g[j] = g[j] + g[j - 1] * root;
        ++deg;
    }
    return g;
}

inline constexpr auto generator = make_generator();

/// Evaluate a highest-degree-first polynomial at x (Horner).
constexpr Gf32 evaluate(std::span<const Gf32> poly, Gf32 x) {
    Gf32 acc{};
    for (auto c : poly) acc = acc * x + c;
    return acc;
}

}  // namespace rs

using RsCodeword = rs::Codeword;

inline rs::Codeword rs_encode(std::span<const Gf32> msg) {
    if (msg.size() != rs::k) throw UsageError("RS message must have exactly 25 symbols, got " + std::to_string(msg.size()));
    rs::Codeword cw{};
    std::array<Gf32, rs::parity> rem{};
    for (std::size_t i = 0; i < rs::k; ++i) {
        cw[i] = msg[i];
        const Gf32 feedback = msg[i] + rem[0];
        for (std::size_t j = 0; j + 1 < rs::parity; ++j) rem[j] = rem[j + 1] + feedback * rs::generator[j + 1];
        rem[rs::parity - 1] = feedback * rs::generator[rs::parity];
    }
    for (std::size_t j = 0; j < rs::parity; ++j) cw[rs::k + j] = rem[j];
    return cw;
}

struct RsDecodeResult {
    rs::Message message{};
    int corrected = 0;
    bool failed = false;  // message then holds the raw systematic symbols
};

/// Bounded-distance decoding: syndromes, Berlekamp-Massey, Chien search, Forney.
inline RsDecodeResult rs_decode(std::span<const Gf32> received) {
    if (received.size() != rs::n)
        throw UsageError("RS codeword must have exactly 31 symbols, got " + std::to_string(received.size()));
    rs::Codeword r{};
    std::copy(received.begin(), received.end(), r.begin());

    RsDecodeResult res;
    auto raw = [&] {
        std::copy(r.begin(), r.begin() + rs::k, res.message.begin());
    };

    // S_j = r(alpha^j), j = 1..2t
    std::array<Gf32, rs::parity> syn{};
    bool clean = true;
    for (std::size_t j = 0; j < rs::parity; ++j) {
        syn[j] = rs::evaluate(r, gf32::alpha_pow(static_cast<int>(j + 1)));
        clean = clean && syn[j].value == 0;
    }
    if (clean) {
        raw();
        return res;
    }

    // Berlekamp-Massey; lambda and b are lowest-degree-first.
    std::array<Gf32, rs::parity + 1> lambda{}, b{}, tmp{};
    lambda[0] = Gf32(1);
    b[0] = Gf32(1);
    std::size_t L = 0;
    std::size_t shift = 1;
    Gf32 b_disc(1);
    for (std::size_t step = 0; step < rs::parity; ++step) {
        Gf32 d = syn[step];
        for (std::size_t i = 1; i <= L; ++i) d = d + lambda[i] * syn[step - i];
        if (d.value == 0) {
            ++shift;
            continue;
        }
        const Gf32 coef = gf32::div(d, b_disc);
        tmp = lambda;
        for (std::size_t i = 0; i + shift <= rs::parity; ++i) lambda[i + shift] = lambda[i + shift] + coef * b[i];
        if (2 * L <= step) {
            L = step + 1 - L;
            b = tmp;
            b_disc = d;
            shift = 1;
        } else {
            ++shift;
        }
    }

    std::size_t degree = 0;
    for (std::size_t i = 0; i <= rs::parity; ++i)
        if (lambda[i].value) degree = i;
    if (degree != L || L > rs::t) {
        res.failed = true;
        raw();
        return res;
    }

    // Chien search: position p (coefficient of x^(30-p)) is in error when
    // lambda(alpha^-(30-p)) == 0.
    std::array<std::size_t, rs::t> positions{};
    std::size_t found = 0;
    for (std::size_t p = 0; p < rs::n; ++p) {
        const int power = static_cast<int>(rs::n - 1 - p);
        const Gf32 x_inv = gf32::alpha_pow(-power);
        Gf32 acc{};
        for (std::size_t i = degree + 1; i-- > 0;) acc = acc * x_inv + lambda[i];
        if (acc.value == 0) {
            if (found == rs::t) {
                found = rs::t + 1;
                break;
            }
            positions[found++] = p;
        }
    }
    if (found != L) {
        res.failed = true;
        raw();
        return res;
    }

    // Omega(x) = S(x) * lambda(x) mod x^(2t), S(x) = sum S_{j+1} x^j.
    std::array<Gf32, rs::parity> omega{};
    for (std::size_t i = 0; i < rs::parity; ++i)
        for (std::size_t j = 0; j <= i && j <= degree; ++j) omega[i] = omega[i] + lambda[j] * syn[i - j];

    for (std::size_t e = 0; e < found; ++e) {
        const std::size_t p = positions[e];
        const int power = static_cast<int>(rs::n - 1 - p);
        const Gf32 x_inv = gf32::alpha_pow(-power);
        Gf32 num{};
        for (std::size_t i = rs::parity; i-- > 0;) num = num * x_inv + omega[i];
        // Formal derivative keeps odd-degree terms only.
        Gf32 den{};
        for (std::size_t i = 1; i <= degree; i += 2) {
            Gf32 term = lambda[i];
            for (std::size_t q = 0; q + 1 < i; ++q) term = term * x_inv;
            den = den + term;
        }
        if (den.value == 0) {
            res.failed = true;
            raw();
            return res;
        }
        // narrow sense (first root alpha^1): e = Omega(X^-1) / Lambda'(X^-1)
        r[p] = r[p] + gf32::div(num, den);
    }

    for (std::size_t j = 0; j < rs::parity; ++j)
        if (rs::evaluate(r, gf32::alpha_pow(static_cast<int>(j + 1))).value != 0) {
            res.failed = true;
            std::copy(received.begin(), received.begin() + rs::k, res.message.begin());
            return res;
        }

    raw();
    res.corrected = static_cast<int>(found);
    return res;
}

}  // namespace semcom
