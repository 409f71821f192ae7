#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ap/bitstring.hpp"
#include "ap/errors.hpp"
#include "ap/rational.hpp"
#include "ap/semimeasure.hpp"
#include "ap/transform.hpp"
#include "ap/universal.hpp"

namespace ap {

// Weight function over machine/semimeasure indices: explicit head values
// followed by a tail that is a nonnegative combination of geometric series,
// w(i) = sum_j a_j 2^(-i-c_j) for i past the head. Totals and tail sums have
// closed forms, so every bound derived from weights is exact.
class WeightFunction {
public:
    using TailTerm = std::pair<Rat, long>;  // (coefficient, shift)

    static WeightFunction finite(std::vector<Rat> head) {
        return WeightFunction(std::move(head), {});
    }

    // w(i) = 2^(-i-c) everywhere.
    static WeightFunction geometric(long c) { return WeightFunction({}, {{Rat(1), c}}); }

    static WeightFunction with_tail(std::vector<Rat> head, std::vector<TailTerm> tail) {
        return WeightFunction(std::move(head), std::move(tail));
    }

    Rat at(std::size_t i) const {
        if (i < head_.size()) return head_[i];
        return tail_at(i);
    }

    // Sum of w(i) for i >= n, exact.
    Rat tail_sum_from(std::size_t n) const {
        Rat total(0);
        for (std::size_t i = n; i < head_.size(); ++i) total += head_[i];
        std::size_t start = std::max(n, head_.size());
        for (const auto& [a, c] : tail_)
            total += a * pow2(1 - static_cast<long>(start) - c);
        return total;
    }

    Rat total() const { return tail_sum_from(0); }
    bool is_proper() const { return total() == 1; }

    std::size_t head_size() const { return head_.size(); }
    const std::vector<Rat>& head() const { return head_; }
    const std::vector<TailTerm>& tail() const { return tail_; }

    // Tail value at one index: sum_j a_j 2^(-i-c_j).
    Rat tail_at(std::size_t i) const {
        Rat v(0);
        for (const auto& [a, c] : tail_) v += a * pow2(-static_cast<long>(i) - c);
        return v;
    }

    // Grows the explicit head so index i can be overwritten.
    WeightFunction with_head_through(std::size_t i) const {
        if (i < head_.size()) return *this;
        std::vector<Rat> head = head_;
        for (std::size_t j = head_.size(); j <= i; ++j) head.push_back(tail_at(j));
        return WeightFunction(std::move(head), tail_);
    }

    WeightFunction replace_at(std::size_t i, const Rat& v) const {
        WeightFunction w = with_head_through(i);
        w.head_[i] = v;
        return w;
    }

    void validate() const {
        for (const auto& h : head_)
            if (h < 0) throw DomainError("negative weight");
        for (const auto& [a, c] : tail_)
            if (a < 0) throw DomainError("negative tail coefficient");
        if (total() > 1) throw DomainError("weights sum to more than 1");
    }

private:
    WeightFunction(std::vector<Rat> head, std::vector<TailTerm> tail)
        : head_(std::move(head)), tail_(std::move(tail)) {}

    std::vector<Rat> head_;
    std::vector<TailTerm> tail_;
};

// An indexed family of semimeasure approximants: a fixed base plus registry
// hooks at fresh indices. Hooks let rewrite constructions install derived
// members (the recursion-theorem step at desk scale). Unoccupied indices
// resolve to the zero semimeasure.
class SemimeasureFamily {
public:
    SemimeasureFamily() = default;
    explicit SemimeasureFamily(std::vector<SemimeasureApprox> base)
        : base_(std::move(base)) {}

    // Family of stage-t transforms by the enumerated machines.
    static SemimeasureFamily from_enumeration(const MachineEnumeration<MonotoneMachine>& en,
                                              const ComputableMeasure& mu,
                                              std::size_t count) {
        std::vector<SemimeasureApprox> base;
        for (std::size_t e = 0; e < count; ++e)
            base.push_back(SemimeasureApprox::from_machine_transform(mu, en.machine(e)));
        return SemimeasureFamily(std::move(base));
    }

    std::size_t base_size() const { return base_.size(); }

    bool occupied(std::size_t i) const {
        return i < base_.size() || hooks_.count(i) > 0;
    }

    const SemimeasureApprox& at(std::size_t i) const {
        if (i < base_.size()) return base_[i];
        auto it = hooks_.find(i);
        if (it != hooks_.end()) return it->second.second;
        return zero_;
    }

    Rat eval(std::size_t i, const BitString& sigma, std::uint64_t t) const {
        return at(i).at(sigma, t);
    }

    std::optional<Rat> exact_limit(std::size_t i, const BitString& sigma) const {
        return at(i).exact_limit(sigma);
    }

    void register_hook(std::size_t i, std::string role, SemimeasureApprox m) {
        if (occupied(i))
            throw DomainError("family index " + std::to_string(i) + " is already occupied");
        hooks_.emplace(i, std::make_pair(std::move(role), std::move(m)));
    }

    std::optional<std::string> hook_role(std::size_t i) const {
        auto it = hooks_.find(i);
        if (it == hooks_.end()) return std::nullopt;
        return it->second.first;
    }

    // Indices that need to be enumerated to cover base and hooks.
    std::size_t span() const {
        std::size_t s = base_.size();
        for (const auto& [i, h] : hooks_) s = std::max(s, i + 1);
        return s;
    }

private:
    std::vector<SemimeasureApprox> base_;
    std::map<std::size_t, std::pair<std::string, SemimeasureApprox>> hooks_;
    SemimeasureApprox zero_;
};

struct MixtureValue {
    Rat lower;        // sum of weighted stage values over the truncation
    Rat tail_weight;  // weight mass beyond the truncation
    Rat upper;        // certified upper bound on the limit mixture
};

// Certified bracket on the mixture sum_i w(i) nu_i(sigma): the lower bound
// evaluates members at the given stage, the upper bound uses exact member
// limits where known (1 otherwise) and charges the full tail weight.
inline MixtureValue mixture_eval(const WeightFunction& w, const SemimeasureFamily& family,
                                 const BitString& sigma, std::size_t truncation,
                                 std::uint64_t stage) {
    MixtureValue v;
    v.lower = 0;
    v.upper = 0;
    for (std::size_t i = 0; i < truncation; ++i) {
        Rat wi = w.at(i);
        if (wi == 0) continue;
        v.lower += wi * family.eval(i, sigma, stage);
        auto limit = family.exact_limit(i, sigma);
        v.upper += wi * (limit ? *limit : Rat(1));
    }
    v.tail_weight = w.tail_sum_from(truncation);
    v.upper += v.tail_weight;
    return v;
}

// Pointwise minimum of a weight function against 2^(-i-c), exact across the
// tail because both sides scale by 2^-i there.
inline WeightFunction floor_weights(const WeightFunction& w, long c) {
    std::vector<Rat> head;
    for (std::size_t i = 0; i < w.head_size(); ++i)
        head.push_back(std::min(w.at(i), pow2(-static_cast<long>(i) - c)));
    Rat tail_scale(0);
    for (const auto& [a, cj] : w.tail()) tail_scale += a * pow2(-cj);
    Rat capped = std::min(tail_scale, pow2(-c));
    std::vector<WeightFunction::TailTerm> tail;
    if (capped > 0) tail.push_back({capped, 0});
    return WeightFunction::with_tail(std::move(head), std::move(tail));
}

struct ProperRewriteResult {
    WeightFunction weights;   // proper (sums to exactly 1)
    std::size_t pi_index;     // hook where the absorber was registered
    std::size_t empty_index;  // hook holding the empty semimeasure
    bool pi_exact;            // absorber support closed in finitely many terms
    Rat certified_root_upper; // the bound that witnessed mixture(eps) < q
};

// Rewrites a weight function into a proper one (sum exactly 1) preserving
// the mixture: w''(i) = g(i) = min(2^(-i-c), w'(i)) off two distinguished
// indices, index k gains q on top of g(k) and resolves to the absorber pi,
// and index l takes the leftover 1 - q - sum_{j != l} g(j) and resolves to
// the empty semimeasure. Since w''(k) multiplies pi rather than the original
// member, pi is the fixed point of
//   (q - w'(k) + g(k)) pi = sum_{i != k} (w'(i) - g(i)) nu_i,
// which makes the truncated mixtures of w'' and w' agree exactly over the
// hooked family. Requires a certified witness that the w'-mixture at the
// root stays below q.
inline ProperRewriteResult proper_weight_rewrite(SemimeasureFamily& family,
                                                 const WeightFunction& w1, const Rat& q,
                                                 long c, std::size_t k, std::size_t l,
                                                 std::size_t truncation,
                                                 std::uint64_t stage) {
    w1.validate();
    if (q <= 0 || q >= 1) throw DomainError("q must lie strictly between 0 and 1");
    if (k == l) throw DomainError("absorber index and empty index must differ");
    if (family.occupied(k))
        throw DomainError("family index " + std::to_string(k) +
                          " is occupied; the absorber needs a fresh hook");
    if (family.occupied(l))
        throw DomainError("family index " + std::to_string(l) +
                          " is occupied; it must hold the empty semimeasure");

    MixtureValue root = mixture_eval(w1, family, BitString(), truncation, stage);
    if (!(root.upper < q))
        throw CertificationError(
            "cannot certify mixture(-) < q: certified upper bound " +
            format_rat(root.upper) + " vs q=" + format_rat(q) +
            "; raise the truncation/stage or supply exact member limits");

    WeightFunction g = floor_weights(w1, c);
    Rat g_total = g.total();
    Rat slack = 1 - q - (g_total - g.at(l));
    if (slack < 0)
        throw DomainError("c too small: 1 - q - sum_{j != l} g(j) = " + format_rat(slack) +
                          " is negative, so the empty index cannot close the total");

    Rat denom = q - w1.at(k) + g.at(k);
    if (denom <= 0)
        throw DomainError("w'(k) - g(k) must stay below q at the absorber index");
    // pi(eps) <= root bound / denom; below 1 keeps the absorber a semimeasure.
    if (!(root.upper < denom))
        throw CertificationError("cannot certify the absorber is a semimeasure: bound " +
                                 format_rat(root.upper) + " / " + format_rat(denom) +
                                 " does not stay below 1");

    // Absorber terms (w'(i) - g(i)) / denom off k. Beyond max(head sizes)
    // the two tails cancel exactly iff g's tail equals w1's, which
    // floor_weights guarantees whenever the cap is not binding there;
    // otherwise the absorber is truncated and stays a valid (smaller)
    // semimeasure.
    std::size_t heads = std::max(w1.head_size(), g.head_size());
    bool tail_cancels = w1.tail_sum_from(heads) == g.tail_sum_from(heads);
    std::size_t support_end = tail_cancels ? heads : truncation;
    std::vector<std::pair<Rat, SemimeasureApprox>> terms;
    for (std::size_t i = 0; i < support_end; ++i) {
        if (i == k) continue;
        Rat coef = (w1.at(i) - g.at(i)) / denom;
        if (coef < 0)
            throw DomainError("floor exceeds weight at index " + std::to_string(i));
        if (coef > 0) terms.emplace_back(coef, family.at(i));
    }
    family.register_hook(k, "pi",
                         SemimeasureApprox::weighted_sum("pi absorber", std::move(terms)));
    family.register_hook(l, "empty", SemimeasureApprox::zero());

    WeightFunction w2 = g.replace_at(k, g.at(k) + q).replace_at(l, slack);
    if (w2.total() != 1)
        throw DomainError("internal: rewritten weights total " + format_rat(w2.total()));
    return {w2, k, l, tail_cancels, root.upper};
}

// Registers at hook k the fixed point of nu_k = sum_i u(i) nu_i over the
// first `truncation` members: nu_k = (1-u(k))^{-1} sum_{i != k} u(i) nu_i.
inline void register_u_mixture(SemimeasureFamily& family, std::size_t k,
                               const WeightFunction& u, std::size_t truncation) {
    u.validate();
    if (u.at(k) >= 1) throw DomainError("u(k) must be below 1 for the fixed point");
    Rat scale = 1 / (1 - u.at(k));
    std::vector<std::pair<Rat, SemimeasureApprox>> terms;
    for (std::size_t i = 0; i < truncation; ++i) {
        if (i == k) continue;
        Rat ui = u.at(i);
        if (ui > 0) terms.emplace_back(scale * ui, family.at(i));
    }
    family.register_hook(k, "u-mixture",
                         SemimeasureApprox::weighted_sum("u-mixture fixed point",
                                                         std::move(terms)));
}

// Folds a universal-mixture weight at index k through a computable summable
// u: the new weights are w(i) + w(k)u(i) off k and w(k)u(k) at k, where the
// family resolves k to the registered u-mixture fixed point. The mixture
// value is preserved exactly over any truncation covering the support. The
// total moves by w(k)(total(u) - 1), so it strictly decreases exactly when
// u's mass is below 1 and is preserved at mass 1.
inline WeightFunction universal_weight_rewrite(const SemimeasureFamily& family,
                                               const WeightFunction& w, std::size_t k,
                                               const WeightFunction& u) {
    w.validate();
    u.validate();
    if (family.hook_role(k) != std::optional<std::string>("u-mixture"))
        throw DomainError("family index " + std::to_string(k) +
                          " is not registered as the u-mixture hook");
    if (w.at(k) == 0)
        throw DomainError("weight at the folded index is zero; nothing to rewrite");

    Rat wk = w.at(k);
    std::size_t head_n = std::max({w.head_size(), u.head_size(), k + 1});
    std::vector<Rat> head;
    for (std::size_t i = 0; i < head_n; ++i)
        head.push_back(i == k ? wk * u.at(k) : w.at(i) + wk * u.at(i));
    std::vector<WeightFunction::TailTerm> tail = w.tail();
    for (const auto& [a, c] : u.tail()) tail.push_back({wk * a, c});
    return WeightFunction::with_tail(std::move(head), std::move(tail));
}

struct DominanceReport {
    // Always empirical: the verdict covers the tested strings at the tested
    // stage, nothing more.
    std::optional<std::uint64_t> constant;   // least integer c with c*kappa >= nu
    std::optional<BitString> counterexample; // kappa vanished where nu did not
    std::size_t cells = 0;

    bool dominated() const { return !counterexample.has_value(); }
};

inline DominanceReport dominance_check(const SemimeasureApprox& kappa,
                                       const SemimeasureApprox& nu,
                                       const std::vector<BitString>& test,
                                       std::uint64_t stage) {
    DominanceReport rep;
    BigInt best(1);
    for (const auto& sigma : test) {
        ++rep.cells;
        Rat top = nu.at(sigma, stage);
        if (top == 0) continue;
        Rat bottom = kappa.at(sigma, stage);
        if (bottom == 0) {
            rep.counterexample = sigma;
            rep.constant.reset();
            return rep;
        }
        Rat ratio = top / bottom;
        BigInt c = (numerator(ratio) + denominator(ratio) - 1) / denominator(ratio);
        if (c > best) best = c;
    }
    rep.constant = best.convert_to<std::uint64_t>();
    return rep;
}

struct DecompositionTerm {
    std::size_t e;
    Rat weight;  // measure of the code word cylinder
    Rat value;   // stage transform of the conditioned measure by machine e
};

struct Decomposition {
    std::vector<DecompositionTerm> terms;
    Rat partial{0};
    // Weight mass not covered by the enumerated terms; bounds the missing
    // contribution from above.
    Rat residual_weight{0};
};

// Expands the transform of a universal machine as the weighted sum of the
// component transforms, each conditioned on its code word cylinder.
inline Decomposition decompose_universal(const ComputableMeasure& mu,
                                         const UniversalMachine<MonotoneMachine>& u,
                                         const BitString& sigma, std::size_t e_max,
                                         std::size_t stage) {
    Decomposition d;
    std::size_t limit = e_max;
    if (auto sz = u.machines->size()) limit = std::min(limit, *sz);
    Rat covered(0);
    for (std::size_t e = 0; e < limit; ++e) {
        BitString code = u.encoding.code(e);
        Rat w = mu.cylinder(code);
        if (w == 0)
            throw IncompatibilityError("code word '" + code.display() +
                                           "' has measure zero under " + mu.describe(),
                                       e);
        MonotoneMachine me = u.machines->machine(e);
        std::size_t s = stage;
        if (auto msz = me.size()) s = std::min(s, *msz);
        Rat value = transform_at_stage(mu.conditional(code), me, sigma, s).value;
        d.terms.push_back({e, w, value});
        d.partial += w * value;
        covered += w;
    }
    d.residual_weight = 1 - covered;
    return d;
}

}  // namespace ap
