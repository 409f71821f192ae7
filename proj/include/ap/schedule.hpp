#pragma once

#include <cstdint>
#include <utility>

#include "ap/bitstring.hpp"
#include "ap/rational.hpp"

namespace ap {

// Cantor pairing of (a, b); bijective on pairs of naturals.
inline std::uint64_t cantor_pair(std::uint64_t a, std::uint64_t b) {
    return (a + b) * (a + b + 1) / 2 + b;
}

inline std::pair<std::uint64_t, std::uint64_t> cantor_unpair(std::uint64_t k) {
    BigInt w2 = isqrt_floor(BigInt(8) * k + 1);
    std::uint64_t w = static_cast<std::uint64_t>((w2 - 1) / 2);
    std::uint64_t b = k - w * (w + 1) / 2;
    return {w - b, b};
}

// Stage schedule for machine constructions. Stages are numbered from 1;
// stage s handles target string sigma (in shortlex position) at approximant
// index t, dovetailed so every (sigma, t) is reached and for fixed sigma the
// t values appear in increasing order.
struct StageTask {
    BitString sigma;
    std::uint64_t t;
};

inline StageTask stage_schedule(std::uint64_t s) {
    auto [i, t] = cantor_unpair(s - 1);
    return {BitString::from_shortlex_index(i), t};
}

inline std::uint64_t stage_for(const BitString& sigma, std::uint64_t t) {
    return cantor_pair(sigma.shortlex_index(), t) + 1;
}

}  // namespace ap
