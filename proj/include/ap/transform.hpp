#pragma once

#include <cstdint>
#include <thread>
#include <vector>

#include "ap/machine.hpp"
#include "ap/measure.hpp"
#include "ap/rational.hpp"
#include "ap/region.hpp"

namespace ap {

struct TransformValue {
    Rat value;
    std::size_t stage = 0;
    // True when the machine is finite and the stage covers every pair, so
    // the value is the limit, not just a lower bound.
    bool exact = false;
};

// Stage-s lower approximation of the transformed measure: the mass of inputs
// on which the stage-s machine already outputs an extension of sigma.
inline TransformValue transform_at_stage(const ComputableMeasure& mu,
                                         const MonotoneMachine& m, const BitString& sigma,
                                         std::size_t s) {
    auto rep = check_monotone_consistency(m, s);
    if (!rep.ok) throw MachineContractError("transform_at_stage: " + rep.message());
    Cover d;
    m.visit_stage(s, [&](const MachinePair& p) {
        if (sigma.is_prefix_of(p.output)) d.push_back(p.description);
    });
    auto size = m.size();
    return {mu.cylinder_set(d), s, size.has_value() && s >= *size};
}

inline Rat transform_value(const ComputableMeasure& mu, const MonotoneMachine& m,
                           const BitString& sigma) {
    return transform_at_stage(mu, m, sigma, m.full_stage()).value;
}

// Discrete counterpart for prefix-free machines: mass of descriptions mapped
// to exactly sigma.
inline TransformValue discrete_transform_at_stage(const ComputableMeasure& mu,
                                                  const PrefixFreeMachine& t,
                                                  const BitString& sigma, std::size_t s) {
    auto rep = check_prefix_free(t, s);
    if (!rep.ok) throw MachineContractError("discrete_transform_at_stage: " + rep.message());
    Cover d;
    t.visit_stage(s, [&](const MachinePair& p) {
        if (p.output == sigma) d.push_back(p.description);
    });
    auto size = t.size();
    return {mu.cylinder_set(d), s, size.has_value() && s >= *size};
}

inline Rat discrete_transform_value(const ComputableMeasure& mu, const PrefixFreeMachine& t,
                                    const BitString& sigma) {
    return discrete_transform_at_stage(mu, t, sigma, t.full_stage()).value;
}

namespace detail {

// splitmix64 stream; cheap to seed per sample, adequate for Monte Carlo.
struct SplitMix64 {
    std::uint64_t state;
    using result_type = std::uint64_t;
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t(0); }
    std::uint64_t operator()() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// Exact Bernoulli(p) draw by rejection sampling uniform integers below the
// denominator.
inline bool draw_bernoulli(SplitMix64& eng, const Rat& p) {
    if (p == 0) return false;
    if (p == 1) return true;
    const BigInt num = numerator(p);
    const BigInt den = denominator(p);
    unsigned bits = static_cast<unsigned>(msb(den)) + 1;
    while (true) {
        BigInt x = 0;
        for (unsigned got = 0; got < bits; got += 64) {
            x <<= 64;
            x |= BigInt(eng());
        }
        unsigned excess = ((bits + 63) / 64) * 64 - bits;
        x >>= excess;
        if (x < den) return x < num;
    }
}

}  // namespace detail

struct SampleEstimate {
    Rat estimate;
    Rat stderr_bound;  // rational upper bound on sqrt(est*(1-est)/n)
    std::uint64_t hits = 0;
    std::uint64_t n = 0;
};

struct SampleOptions {
    // Stage at which the machine is run; 0 means the full enumeration of a
    // finite machine.
    std::size_t stage = 0;
    unsigned workers = 1;
};

// Monte Carlo estimate of the transformed measure at sigma: draws inputs of
// length max_input_depth from mu, runs the machine, counts outputs extending
// sigma. Per-sample seeds are derived from (seed, sample index), so results
// do not depend on the worker count. Descriptions longer than
// max_input_depth never apply, so choose it at least as large as the longest
// relevant description.
inline SampleEstimate sample_transform(const ComputableMeasure& mu, const MonotoneMachine& m,
                                       const BitString& sigma, std::uint64_t n_samples,
                                       std::size_t max_input_depth, std::uint64_t seed,
                                       const SampleOptions& opts = {}) {
    std::size_t stage = opts.stage ? opts.stage : m.full_stage();
    {
        auto rep = check_monotone_consistency(m, stage);
        if (!rep.ok) throw MachineContractError("sample_transform: " + rep.message());
    }
    bool fast_uniform = mu.kind() == MeasureKind::Uniform;
    // Snapshot the stage pairs so the hot loop never touches the shared store.
    const std::vector<MachinePair> pairs = m.stage_pairs(stage);

    // The transform counts inputs extending some description whose output
    // extends sigma; this is the same event as sigma <= N_M(input) except at
    // sigma = empty, where the transform only charges the machine's domain.
    auto hit = [&](const BitString& input) {
        for (const auto& p : pairs)
            if (sigma.is_prefix_of(p.output) && p.description.is_prefix_of(input))
                return true;
        return false;
    };

    auto run_range = [&](std::uint64_t lo, std::uint64_t hi) -> std::uint64_t {
        std::uint64_t hits = 0;
        std::string bits(max_input_depth, '0');
        for (std::uint64_t i = lo; i < hi; ++i) {
            detail::SplitMix64 eng{mix64(seed + 0x9e3779b97f4a7c15ULL * (i + 1))};
            BitString input;
            if (fast_uniform) {
                std::uint64_t word = 0;
                for (std::size_t b = 0; b < max_input_depth; ++b) {
                    if (b % 64 == 0) word = eng();
                    bits[b] = (word >> (b % 64)) & 1 ? '1' : '0';
                }
                input = BitString(bits);
            } else {
                input = BitString();
                for (std::size_t b = 0; b < max_input_depth; ++b) {
                    Rat p1 = mu.next_bit_one_prob(input);
                    input = input.child(detail::draw_bernoulli(eng, p1) ? 1 : 0);
                }
            }
            if (hit(input)) ++hits;
        }
        return hits;
    };

    std::uint64_t hits = 0;
    unsigned workers = std::max(1u, opts.workers);
    if (workers == 1 || n_samples < 2 * workers) {
        hits = run_range(0, n_samples);
    } else {
        std::vector<std::thread> threads;
        std::vector<std::uint64_t> partial(workers, 0);
        std::uint64_t chunk = n_samples / workers;
        for (unsigned w = 0; w < workers; ++w) {
            std::uint64_t lo = w * chunk;
            std::uint64_t hi = (w + 1 == workers) ? n_samples : lo + chunk;
            threads.emplace_back([&, w, lo, hi] { partial[w] = run_range(lo, hi); });
        }
        for (auto& t : threads) t.join();
        for (auto h : partial) hits += h;
    }

    SampleEstimate est;
    est.hits = hits;
    est.n = n_samples;
    est.estimate = Rat(BigInt(hits), BigInt(n_samples));
    est.stderr_bound = sqrt_upper(est.estimate * (1 - est.estimate) / BigInt(n_samples));
    return est;
}

}  // namespace ap
