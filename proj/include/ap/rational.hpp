#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <string_view>

#include "ap/errors.hpp"

namespace ap {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// 2^e for any integer e (negative exponents give 1/2^|e|).
inline Rat pow2(long e) {
    BigInt p = BigInt(1) << static_cast<unsigned>(e < 0 ? -e : e);
    return e < 0 ? Rat(1, p) : Rat(p);
}

inline Rat rat_pow(const Rat& base, unsigned long e) {
    Rat r(1);
    Rat b = base;
    while (e > 0) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

// Serialized form is always "num/den", including integers ("3/1").
inline std::string format_rat(const Rat& r) {
    return numerator(r).str() + "/" + denominator(r).str();
}

// Accepts "num/den" or a bare integer. `source`/`line` feed ParseError.
inline Rat parse_rat(std::string_view text, const std::string& source = "<rat>",
                     std::size_t line = 0) {
    auto bad = [&](const std::string& why) -> ParseError {
        return ParseError(source, line, "bad rational '" + std::string(text) + "': " + why);
    };
    if (text.empty()) throw bad("empty");
    std::string num, den = "1";
    auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        num = std::string(text);
    } else {
        num = std::string(text.substr(0, slash));
        den = std::string(text.substr(slash + 1));
        if (num.empty() || den.empty()) throw bad("missing numerator or denominator");
    }
    auto is_int = [](const std::string& s) {
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (s[i] < '0' || s[i] > '9') return false;
        return true;
    };
    if (!is_int(num) || !is_int(den)) throw bad("not an integer ratio");
    BigInt n(num), d(den);
    if (d == 0) throw bad("zero denominator");
    return Rat(n, d);
}

// Floor of sqrt(n) for n >= 0.
inline BigInt isqrt_floor(const BigInt& n) {
    if (n < 0) throw DomainError("isqrt of negative value");
    if (n == 0) return 0;
    BigInt x = BigInt(1) << static_cast<unsigned>((msb(n) / 2) + 1);
    while (true) {
        BigInt y = (x + n / x) / 2;
        if (y >= x) break;
        x = y;
    }
    return x;
}

// Rational upper bound on sqrt(x), within 2^-precision_bits of the true root.
inline Rat sqrt_upper(const Rat& x, unsigned precision_bits = 32) {
    if (x < 0) throw DomainError("sqrt of negative value");
    if (x == 0) return Rat(0);
    BigInt scale = BigInt(1) << (2 * precision_bits);
    BigInt scaled_num = numerator(x) * scale;
    BigInt den = denominator(x);
    // ceil(sqrt(num*scale/den)) <= (isqrt_floor(num*scale*den) + 1) / den... use
    // sqrt(a/b) = sqrt(a*b)/b and round the integer sqrt up.
    BigInt root = isqrt_floor(scaled_num * den) + 1;
    return Rat(root, den * (BigInt(1) << precision_bits));
}

// Deterministic 64-bit mix used to derive per-sample RNG seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace ap
