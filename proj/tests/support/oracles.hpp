#pragma once

// Independent reference implementations the tests compare the library
// against. Everything here is deliberately brute force: transforms are
// computed by enumerating every cell at a fixed depth, and the machine
// contract checks are quadratic all-pairs scans.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ap/bitstring.hpp"
#include "ap/machine.hpp"
#include "ap/measure.hpp"
#include "ap/rational.hpp"

namespace testsupport {

using ap::BitString;
using ap::MachinePair;
using ap::Rat;

// Deterministic generator for test inputs (splitmix64 core).
struct TestRng {
    std::uint64_t state;

    explicit TestRng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t n) { return next() % n; }
    int bit() { return static_cast<int>(next() >> 63); }

    BitString bits(std::size_t len) {
        std::string s;
        for (std::size_t i = 0; i < len; ++i) s.push_back(bit() ? '1' : '0');
        return BitString(s);
    }

    BitString bits_upto(std::size_t max_len) { return bits(below(max_len + 1)); }
};

// Direct cylinder measure of a full-length cell, bypassing the library's
// cover machinery for the two closed-form kinds.
inline Rat cell_measure(const ap::ComputableMeasure& mu, const BitString& x) {
    switch (mu.kind()) {
        case ap::MeasureKind::Uniform:
            return ap::pow2(-static_cast<long>(x.length()));
        case ap::MeasureKind::Bernoulli: {
            Rat p = mu.bernoulli_p();
            Rat v(1);
            for (std::size_t i = 0; i < x.length(); ++i) v *= x.bit(i) ? p : Rat(1 - p);
            return v;
        }
        default:
            return mu.cylinder(x);
    }
}

// Stage-s transform by exhaustive depth-d cell enumeration: a cell is
// counted when some pair among the first s has its description a prefix of
// the cell and its output extending sigma.
inline Rat oracle_transform(const ap::ComputableMeasure& mu,
                            const std::vector<MachinePair>& pairs, std::size_t s,
                            const BitString& sigma, std::size_t depth) {
    Rat total(0);
    for (std::uint64_t cell = 0; cell < (std::uint64_t(1) << depth); ++cell) {
        std::string bits;
        for (std::size_t i = 0; i < depth; ++i)
            bits.push_back((cell >> (depth - 1 - i)) & 1 ? '1' : '0');
        BitString x(bits);
        bool hit = false;
        for (std::size_t i = 0; i < s && i < pairs.size() && !hit; ++i)
            hit = pairs[i].description.is_prefix_of(x) &&
                  sigma.is_prefix_of(pairs[i].output);
        if (hit) total += cell_measure(mu, x);
    }
    return total;
}

// Same skeleton for prefix machines: the output must equal sigma exactly.
inline Rat oracle_discrete(const ap::ComputableMeasure& mu,
                           const std::vector<MachinePair>& pairs, std::size_t s,
                           const BitString& sigma, std::size_t depth) {
    Rat total(0);
    for (std::uint64_t cell = 0; cell < (std::uint64_t(1) << depth); ++cell) {
        std::string bits;
        for (std::size_t i = 0; i < depth; ++i)
            bits.push_back((cell >> (depth - 1 - i)) & 1 ? '1' : '0');
        BitString x(bits);
        bool hit = false;
        for (std::size_t i = 0; i < s && i < pairs.size() && !hit; ++i)
            hit = pairs[i].description.is_prefix_of(x) && pairs[i].output == sigma;
        if (hit) total += cell_measure(mu, x);
    }
    return total;
}

// All-pairs monotone consistency: comparable descriptions must give
// comparable outputs.
inline bool oracle_monotone_ok(const std::vector<MachinePair>& pairs) {
    for (std::size_t i = 0; i < pairs.size(); ++i)
        for (std::size_t j = i + 1; j < pairs.size(); ++j)
            if (pairs[i].description.comparable(pairs[j].description) &&
                !pairs[i].output.comparable(pairs[j].output))
                return false;
    return true;
}

// All-pairs prefix-freeness with functionality on duplicates.
inline bool oracle_prefix_ok(const std::vector<MachinePair>& pairs) {
    for (std::size_t i = 0; i < pairs.size(); ++i)
        for (std::size_t j = i + 1; j < pairs.size(); ++j) {
            if (pairs[i].description == pairs[j].description) {
                if (!(pairs[i].output == pairs[j].output)) return false;
            } else if (pairs[i].description.comparable(pairs[j].description)) {
                return false;
            }
        }
    return true;
}

// Random machine via rejection: draw pair lists until the oracle accepts.
inline std::vector<MachinePair> random_consistent_monotone(TestRng& rng,
                                                           std::size_t max_pairs,
                                                           std::size_t max_desc,
                                                           std::size_t max_out) {
    while (true) {
        std::size_t n = 1 + rng.below(max_pairs);
        std::vector<MachinePair> pairs;
        for (std::size_t i = 0; i < n; ++i)
            pairs.push_back({rng.bits_upto(max_desc), rng.bits_upto(max_out)});
        if (oracle_monotone_ok(pairs)) return pairs;
    }
}

// Breaks consistency: extend some description and emit an output
// incomparable with the one already there.
inline std::vector<MachinePair> mutate_to_violation(TestRng& rng,
                                                    std::vector<MachinePair> pairs) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (!pairs[i].output.empty()) candidates.push_back(i);
    if (candidates.empty()) {
        BitString d = rng.bits_upto(3);
        pairs.push_back({d, BitString("0")});
        pairs.push_back({d.child(0), BitString("1")});
        return pairs;
    }
    std::size_t i = candidates[rng.below(candidates.size())];
    pairs.push_back({pairs[i].description + rng.bits_upto(2), pairs[i].output.sibling()});
    return pairs;
}

inline std::vector<MachinePair> random_prefix_machine(TestRng& rng, std::size_t max_pairs,
                                                      std::size_t max_desc,
                                                      std::size_t max_out) {
    std::size_t n = 1 + rng.below(max_pairs);
    std::vector<MachinePair> pairs;
    for (std::size_t attempts = 0; pairs.size() < n && attempts < 200; ++attempts) {
        BitString d = rng.bits_upto(max_desc);
        bool ok = true;
        for (const auto& p : pairs)
            if (p.description.comparable(d)) {
                ok = false;
                break;
            }
        if (ok) pairs.push_back({d, rng.bits_upto(max_out)});
    }
    return pairs;
}

inline std::vector<BitString> strings_upto(std::size_t n) {
    std::vector<BitString> out;
    for (std::size_t k = 0; k < (std::size_t(2) << n) - 1; ++k)
        out.push_back(BitString::from_shortlex_index(k));
    return out;
}

}  // namespace testsupport
