#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ap/bitstring.hpp"
#include "ap/errors.hpp"

namespace ap {

// One enumerated pair (description, output).
struct MachinePair {
    BitString description;
    BitString output;

    bool operator==(const MachinePair& rhs) const = default;
};

using PairGenerator = std::function<std::optional<MachinePair>(std::size_t)>;

namespace detail {

// Enumerated pair sequence, either fully materialized or backed by a
// generator whose results are memoized. Shared by machine values, so a
// machine copy is a cheap handle onto the same enumeration.
class PairStore {
public:
    explicit PairStore(std::vector<MachinePair> pairs)
        : pairs_(std::move(pairs)), exhausted_(true) {}

    PairStore(PairGenerator gen, std::optional<std::size_t> known_size)
        : gen_(std::move(gen)), known_size_(known_size) {}

    const MachinePair* at(std::size_t i) const {
        std::lock_guard<std::mutex> lock(mu_);
        return at_locked(i);
    }

    std::optional<std::size_t> size() const {
        std::lock_guard<std::mutex> lock(mu_);
        if (exhausted_) return pairs_.size();
        return known_size_;
    }

    template <class Fn>
    void visit(std::size_t stage, Fn&& fn) const {
        for (std::size_t i = 0; i < stage; ++i) {
            const MachinePair* p;
            {
                std::lock_guard<std::mutex> lock(mu_);
                p = at_locked(i);
            }
            if (!p) return;
            fn(*p);
        }
    }

    std::size_t consistency_watermark() const {
        std::lock_guard<std::mutex> lock(mu_);
        return consistency_watermark_;
    }

    void raise_consistency_watermark(std::size_t s) const {
        std::lock_guard<std::mutex> lock(mu_);
        consistency_watermark_ = std::max(consistency_watermark_, s);
    }

private:
    const MachinePair* at_locked(std::size_t i) const {
        if (known_size_ && i >= *known_size_) return nullptr;
        while (pairs_.size() <= i && !exhausted_) {
            auto next = gen_(pairs_.size());
            if (!next) {
                exhausted_ = true;
                break;
            }
            pairs_.push_back(std::move(*next));
        }
        return i < pairs_.size() ? &pairs_[i] : nullptr;
    }

    mutable std::vector<MachinePair> pairs_;
    PairGenerator gen_;
    std::optional<std::size_t> known_size_;
    mutable bool exhausted_ = false;
    mutable std::size_t consistency_watermark_ = 0;
    mutable std::mutex mu_;
};

class MachineBase {
public:
    MachineBase() : store_(std::make_shared<PairStore>(std::vector<MachinePair>{})) {}

    explicit MachineBase(std::vector<MachinePair> pairs)
        : store_(std::make_shared<PairStore>(std::move(pairs))) {}

    MachineBase(PairGenerator gen, std::optional<std::size_t> known_size)
        : store_(std::make_shared<PairStore>(std::move(gen), known_size)) {}

    // Number of enumerated pairs, when known. Materialized machines always
    // know it; generator-backed machines learn it on exhaustion.
    std::optional<std::size_t> size() const { return store_->size(); }
    bool finite() const { return size().has_value(); }

    const MachinePair* pair_at(std::size_t i) const { return store_->at(i); }

    // Applies fn to the pairs of the stage-`s` finite approximation (the
    // first s enumerated pairs, fewer if the machine is smaller).
    template <class Fn>
    void visit_stage(std::size_t s, Fn&& fn) const {
        store_->visit(s, std::forward<Fn>(fn));
    }

    std::vector<MachinePair> stage_pairs(std::size_t s) const {
        std::vector<MachinePair> out;
        visit_stage(s, [&](const MachinePair& p) { out.push_back(p); });
        return out;
    }

    // Stage index that covers every enumerated pair, for finite machines.
    std::size_t full_stage() const {
        auto n = size();
        if (!n) throw DomainError("machine is not known to be finite");
        return *n;
    }

    const detail::PairStore& store() const { return *store_; }

private:
    std::shared_ptr<PairStore> store_;
};

}  // namespace detail

// Monotone machine: consistency contract is that comparable descriptions
// carry comparable outputs.
class MonotoneMachine : public detail::MachineBase {
public:
    using MachineBase::MachineBase;

    static MonotoneMachine from_pairs(std::vector<MachinePair> pairs) {
        return MonotoneMachine(std::move(pairs));
    }

    static MonotoneMachine from_generator(PairGenerator gen,
                                          std::optional<std::size_t> known_size = {}) {
        return MonotoneMachine(std::move(gen), known_size);
    }
};

// Prefix-free machine: descriptions form an antichain and each description
// has at most one output.
class PrefixFreeMachine : public detail::MachineBase {
public:
    using MachineBase::MachineBase;

    static PrefixFreeMachine from_pairs(std::vector<MachinePair> pairs) {
        return PrefixFreeMachine(std::move(pairs));
    }

    static PrefixFreeMachine from_generator(PairGenerator gen,
                                            std::optional<std::size_t> known_size = {}) {
        return PrefixFreeMachine(std::move(gen), known_size);
    }
};

struct ConsistencyReport {
    bool ok = true;
    // The two offending pairs, first one's description a prefix of (or equal
    // to) the second one's.
    std::optional<std::pair<MachinePair, MachinePair>> witness;

    std::string message() const {
        if (ok) return "consistent";
        return "pairs (" + witness->first.description.display() + "," +
               witness->first.output.display() + ") and (" +
               witness->second.description.display() + "," +
               witness->second.output.display() + ") conflict";
    }
};

namespace detail {

inline std::vector<MachinePair> sorted_stage_pairs(const MachineBase& m, std::size_t s) {
    auto pairs = m.stage_pairs(s);
    std::sort(pairs.begin(), pairs.end(), [](const MachinePair& a, const MachinePair& b) {
        if (a.description.str() != b.description.str())
            return a.description.str() < b.description.str();
        return a.output.str() < b.output.str();
    });
    return pairs;
}

}  // namespace detail

// Monotone consistency of the stage-s approximation: along every chain of
// comparable descriptions, outputs are pairwise comparable. Linear scan over
// the description-sorted pairs; outputs seen along the live chain always
// form a prefix chain themselves, so comparing against the longest suffices.
inline ConsistencyReport check_monotone_consistency(const MonotoneMachine& m,
                                                    std::size_t s) {
    if (m.store().consistency_watermark() >= s) return {};
    auto pairs = detail::sorted_stage_pairs(m, s);
    std::vector<const MachinePair*> chain;   // descriptions, each a prefix of the next
    std::vector<const MachinePair*> longest; // holder of longest output up the chain
    for (const auto& p : pairs) {
        while (!chain.empty() &&
               !chain.back()->description.is_prefix_of(p.description)) {
            chain.pop_back();
            longest.pop_back();
        }
        const MachinePair* best = longest.empty() ? nullptr : longest.back();
        if (best && !best->output.comparable(p.output))
            return {false, std::make_pair(*best, p)};
        if (!best || p.output.length() > best->output.length()) best = &p;
        chain.push_back(&p);
        longest.push_back(best);
    }
    m.store().raise_consistency_watermark(s);
    return {};
}

// Prefix-freeness and functionality of the stage-s approximation: no
// description is a proper prefix of another, and repeating a description
// with a different output is rejected (exact duplicates collapse).
inline ConsistencyReport check_prefix_free(const PrefixFreeMachine& m, std::size_t s) {
    if (m.store().consistency_watermark() >= s) return {};
    auto pairs = detail::sorted_stage_pairs(m, s);
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        const auto& a = pairs[i - 1];
        const auto& b = pairs[i];
        if (a.description == b.description) {
            if (!(a.output == b.output)) return {false, std::make_pair(a, b)};
        } else if (a.description.is_prefix_of(b.description)) {
            return {false, std::make_pair(a, b)};
        }
    }
    m.store().raise_consistency_watermark(s);
    return {};
}

// N_M at stage s on a finite input: the longest output over enumerated pairs
// whose description the input extends; the empty string when none applies.
// Throws when the applicable outputs are not a chain, i.e. the machine
// violates its consistency contract.
inline BitString machine_output(const MonotoneMachine& m, const BitString& input,
                                std::size_t s) {
    BitString best;
    bool any = false;
    m.visit_stage(s, [&](const MachinePair& p) {
        if (!p.description.is_prefix_of(input)) return;
        if (any && !best.comparable(p.output))
            throw MachineContractError("machine_output on inconsistent machine: outputs '" +
                                       best.display() + "' and '" + p.output.display() +
                                       "' conflict on input '" + input.display() + "'");
        if (!any || p.output.length() > best.length()) best = p.output;
        any = true;
    });
    return best;
}

}  // namespace ap
