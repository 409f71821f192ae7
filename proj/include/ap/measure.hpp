#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ap/bitstring.hpp"
#include "ap/errors.hpp"
#include "ap/rational.hpp"
#include "ap/region.hpp"

namespace ap {

// Finite-state chain over output bits: state s emits 1 with probability
// p1[s] and moves to next1[s], else emits 0 and moves to next0[s].
struct MarkovChain {
    struct State {
        Rat p1;
        std::size_t next0;
        std::size_t next1;
    };
    std::vector<State> states;
    std::size_t start = 0;

    void validate() const {
        if (states.empty()) throw DomainError("markov chain needs at least one state");
        if (start >= states.size()) throw DomainError("markov start state out of range");
        for (const auto& s : states) {
            if (s.p1 < 0 || s.p1 > 1)
                throw DomainError("markov bit probability outside [0,1]");
            if (s.next0 >= states.size() || s.next1 >= states.size())
                throw DomainError("markov transition target out of range");
        }
    }
};

// Explicit premeasure values down to a cutoff depth, extended below the
// cutoff either uniformly (halving, nonatomic) or by an atom (all mass on
// the all-zeros extension of each depth-`depth` cell).
struct PremeasureTable {
    enum class Extension { Uniform, Atom };
    std::size_t depth = 0;
    std::map<BitString, Rat> values;  // complete binary tree to `depth`
    Extension extension = Extension::Uniform;

    void validate() const {
        auto get = [&](const BitString& s) -> const Rat& {
            auto it = values.find(s);
            if (it == values.end())
                throw DomainError("premeasure table missing entry for '" + s.display() +
                                  "'");
            return it->second;
        };
        std::size_t expected = (std::size_t(2) << depth) - 1;
        if (values.size() != expected)
            throw DomainError("premeasure table must list every string to depth " +
                              std::to_string(depth) + " (" + std::to_string(expected) +
                              " entries, got " + std::to_string(values.size()) + ")");
        if (get(BitString()) != 1)
            throw DomainError("premeasure table root must be 1/1");
        for (const auto& [sigma, v] : values) {
            if (v < 0) throw DomainError("negative premeasure at '" + sigma.display() + "'");
            if (sigma.length() < depth && get(sigma.child(0)) + get(sigma.child(1)) != v)
                throw DomainError("premeasure additivity fails at '" + sigma.display() +
                                  "'");
        }
    }
};

enum class MeasureKind { Uniform, Bernoulli, Markov, Table };

// A computable measure on Cantor space, represented by one of four exactly
// evaluable premeasure families.
class ComputableMeasure {
public:
    static ComputableMeasure uniform() { return ComputableMeasure(MeasureKind::Uniform); }

    static ComputableMeasure bernoulli(const Rat& p) {
        if (p <= 0 || p >= 1)
            throw DomainError("bernoulli parameter must lie strictly between 0 and 1");
        ComputableMeasure m(MeasureKind::Bernoulli);
        m.bern_p_ = p;
        return m;
    }

    static ComputableMeasure markov(MarkovChain chain) {
        chain.validate();
        ComputableMeasure m(MeasureKind::Markov);
        m.markov_ = std::move(chain);
        return m;
    }

    static ComputableMeasure table(PremeasureTable t) {
        t.validate();
        ComputableMeasure m(MeasureKind::Table);
        m.table_ = std::make_shared<const PremeasureTable>(std::move(t));
        return m;
    }

    MeasureKind kind() const { return kind_; }

    Rat cylinder(const BitString& sigma) const {
        switch (kind_) {
            case MeasureKind::Uniform:
                return pow2(-static_cast<long>(sigma.length()));
            case MeasureKind::Bernoulli: {
                std::size_t ones = 0;
                for (std::size_t i = 0; i < sigma.length(); ++i) ones += sigma.bit(i);
                return rat_pow(bern_p_, ones) *
                       rat_pow(1 - bern_p_, sigma.length() - ones);
            }
            case MeasureKind::Markov: {
                Rat r(1);
                std::size_t s = markov_.start;
                for (std::size_t i = 0; i < sigma.length(); ++i) {
                    const auto& st = markov_.states[s];
                    if (sigma.bit(i)) {
                        r *= st.p1;
                        s = st.next1;
                    } else {
                        r *= 1 - st.p1;
                        s = st.next0;
                    }
                    if (r == 0) return r;
                }
                return r;
            }
            case MeasureKind::Table: {
                const auto& t = *table_;
                if (sigma.length() <= t.depth) return t.values.at(sigma);
                Rat head = t.values.at(sigma.prefix(t.depth));
                if (t.extension == PremeasureTable::Extension::Uniform)
                    return head * pow2(-static_cast<long>(sigma.length() - t.depth));
                for (std::size_t i = t.depth; i < sigma.length(); ++i)
                    if (sigma.bit(i)) return Rat(0);
                return head;
            }
        }
        throw DomainError("unreachable measure kind");
    }

    // Measure of the union of the given cylinders (overlaps collapse).
    Rat cylinder_set(const std::vector<BitString>& xs) const {
        Rat total(0);
        for (const auto& c : minimal_cover(xs)) total += cylinder(c);
        return total;
    }

    // The measure tau -> m(sigma tau) / m(sigma). Exact; throws on a
    // zero-measure condition.
    ComputableMeasure conditional(const BitString& sigma) const {
        Rat base = cylinder(sigma);
        if (base == 0)
            throw ZeroMeasureError("conditioning on zero-measure cylinder '" +
                                   sigma.display() + "'");
        switch (kind_) {
            case MeasureKind::Uniform:
            case MeasureKind::Bernoulli:
                return *this;
            case MeasureKind::Markov: {
                MarkovChain c = markov_;
                std::size_t s = c.start;
                for (std::size_t i = 0; i < sigma.length(); ++i)
                    s = sigma.bit(i) ? c.states[s].next1 : c.states[s].next0;
                c.start = s;
                return markov(std::move(c));
            }
            case MeasureKind::Table: {
                const auto& t = *table_;
                if (sigma.length() >= t.depth &&
                    t.extension == PremeasureTable::Extension::Uniform)
                    return uniform();
                PremeasureTable nt;
                nt.extension = t.extension;
                nt.depth = t.depth > sigma.length() ? t.depth - sigma.length() : 0;
                for (std::uint64_t k = 0;; ++k) {
                    BitString tau = BitString::from_shortlex_index(k);
                    if (tau.length() > nt.depth) break;
                    nt.values[tau] = cylinder(sigma + tau) / base;
                }
                return table(std::move(nt));
            }
        }
        throw DomainError("unreachable measure kind");
    }

    // max over strings of length n of the cylinder measure.
    Rat max_cell(std::size_t n) const {
        switch (kind_) {
            case MeasureKind::Uniform:
                return pow2(-static_cast<long>(n));
            case MeasureKind::Bernoulli: {
                Rat q = std::max(bern_p_, Rat(1 - bern_p_));
                return rat_pow(q, n);
            }
            case MeasureKind::Markov: {
                std::vector<Rat> best(markov_.states.size(), Rat(-1));
                best[markov_.start] = 1;
                for (std::size_t step = 0; step < n; ++step) {
                    std::vector<Rat> next(best.size(), Rat(-1));
                    for (std::size_t s = 0; s < best.size(); ++s) {
                        if (best[s] < 0) continue;
                        const auto& st = markov_.states[s];
                        next[st.next0] = std::max(next[st.next0], Rat(best[s] * (1 - st.p1)));
                        next[st.next1] = std::max(next[st.next1], Rat(best[s] * st.p1));
                    }
                    best = std::move(next);
                }
                Rat m(0);
                for (const auto& v : best) m = std::max(m, v);
                return m;
            }
            case MeasureKind::Table: {
                const auto& t = *table_;
                std::size_t level = std::min(n, t.depth);
                Rat m(0);
                for (const auto& [sigma, v] : t.values)
                    if (sigma.length() == level) m = std::max(m, v);
                if (n <= t.depth || t.extension == PremeasureTable::Extension::Atom)
                    return m;
                return m * pow2(-static_cast<long>(n - t.depth));
            }
        }
        throw DomainError("unreachable measure kind");
    }

    // True only when nonatomicity is certified by the representation.
    bool is_continuous() const {
        switch (kind_) {
            case MeasureKind::Uniform:
                return true;
            case MeasureKind::Bernoulli:
                return true;  // parameter is strictly inside (0,1)
            case MeasureKind::Markov:
                for (const auto& s : markov_.states)
                    if (s.p1 == 0 || s.p1 == 1) return false;
                return true;
            case MeasureKind::Table:
                return table_->extension == PremeasureTable::Extension::Uniform;
        }
        return false;
    }

    // True when the representation certifies that every cylinder has
    // positive measure.
    bool positivity_certified() const {
        switch (kind_) {
            case MeasureKind::Uniform:
            case MeasureKind::Bernoulli:
                return true;
            case MeasureKind::Markov:
                for (const auto& s : markov_.states)
                    if (s.p1 == 0 || s.p1 == 1) return false;
                return true;
            case MeasureKind::Table: {
                if (table_->extension != PremeasureTable::Extension::Uniform)
                    return false;
                for (const auto& [sigma, v] : table_->values)
                    if (sigma.length() == table_->depth && v == 0) return false;
                return true;
            }
        }
        return false;
    }

    // Conditional probability that the bit after `prefix` is 1.
    Rat next_bit_one_prob(const BitString& prefix) const {
        switch (kind_) {
            case MeasureKind::Uniform:
                return Rat(1, 2);
            case MeasureKind::Bernoulli:
                return bern_p_;
            case MeasureKind::Markov: {
                std::size_t s = markov_.start;
                for (std::size_t i = 0; i < prefix.length(); ++i)
                    s = prefix.bit(i) ? markov_.states[s].next1 : markov_.states[s].next0;
                return markov_.states[s].p1;
            }
            case MeasureKind::Table: {
                Rat base = cylinder(prefix);
                if (base == 0)
                    throw ZeroMeasureError("sampling support exhausted at '" +
                                           prefix.display() + "'");
                return cylinder(prefix.child(1)) / base;
            }
        }
        throw DomainError("unreachable measure kind");
    }

    // Additivity of the premeasure down to `depth`; throws on violation.
    // Table premeasures are validated on construction, so this is a
    // property-test hook for the closed-form kinds.
    void check_additivity(std::size_t depth) const {
        for (std::uint64_t k = 0;; ++k) {
            BitString sigma = BitString::from_shortlex_index(k);
            if (sigma.length() >= depth) break;
            if (cylinder(sigma.child(0)) + cylinder(sigma.child(1)) != cylinder(sigma))
                throw DomainError("premeasure additivity fails at '" + sigma.display() +
                                  "'");
        }
        if (cylinder(BitString()) != 1) throw DomainError("premeasure root is not 1");
    }

    std::string describe() const {
        switch (kind_) {
            case MeasureKind::Uniform:
                return "uniform";
            case MeasureKind::Bernoulli:
                return "bernoulli " + format_rat(bern_p_);
            case MeasureKind::Markov:
                return "markov[" + std::to_string(markov_.states.size()) + " states]";
            case MeasureKind::Table:
                return std::string("table[depth ") + std::to_string(table_->depth) +
                       (table_->extension == PremeasureTable::Extension::Uniform
                            ? ", uniform ext]"
                            : ", atom ext]");
        }
        return "?";
    }

    const MarkovChain& markov_chain() const { return markov_; }
    const PremeasureTable& premeasure_table() const { return *table_; }
    const Rat& bernoulli_p() const { return bern_p_; }

private:
    explicit ComputableMeasure(MeasureKind k) : kind_(k) {}

    MeasureKind kind_;
    Rat bern_p_;
    MarkovChain markov_;
    std::shared_ptr<const PremeasureTable> table_;
};

}  // namespace ap
