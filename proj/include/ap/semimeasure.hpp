#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ap/bitstring.hpp"
#include "ap/errors.hpp"
#include "ap/machine.hpp"
#include "ap/measure.hpp"
#include "ap/rational.hpp"
#include "ap/transform.hpp"

namespace ap {

namespace detail {

// Shared core of the two approximant types: a stagewise evaluation
// f(sigma, t), nondecreasing in t, plus an exact limit where one is known.
class ApproxCore {
public:
    using EvalFn = std::function<Rat(const BitString&, std::uint64_t)>;
    using LimitFn = std::function<std::optional<Rat>(const BitString&)>;

    ApproxCore() : ApproxCore("zero", [](const BitString&, std::uint64_t) { return Rat(0); },
                              [](const BitString&) { return std::optional<Rat>(Rat(0)); }) {}

    ApproxCore(std::string desc, EvalFn eval, LimitFn limit)
        : desc_(std::move(desc)), eval_(std::move(eval)), limit_(std::move(limit)) {}

    Rat at(const BitString& sigma, std::uint64_t t) const { return eval_(sigma, t); }

    std::optional<Rat> exact_limit(const BitString& sigma) const {
        return limit_ ? limit_(sigma) : std::nullopt;
    }

    // The exact limit when known, otherwise the stage-t value (a certified
    // lower bound on the limit).
    Rat limit_or_at(const BitString& sigma, std::uint64_t t) const {
        auto l = exact_limit(sigma);
        return l ? *l : at(sigma, t);
    }

    const std::string& describe() const { return desc_; }

private:
    std::string desc_;
    EvalFn eval_;
    LimitFn limit_;
};

}  // namespace detail

// Rows of an explicit approximant: per string, a step function of t.
struct ApproxTable {
    enum class Extension { Zero, Halving };
    // Per string: (t, value) steps with strictly increasing t; the value
    // holds from that t until the next step, and the last one forever.
    std::map<BitString, std::vector<std::pair<std::uint64_t, Rat>>> rows;
    Extension extension = Extension::Zero;

    Rat eval(const BitString& sigma, std::uint64_t t) const {
        auto it = rows.find(sigma);
        if (it == rows.end()) {
            if (extension == Extension::Zero || sigma.empty()) return Rat(0);
            std::size_t depth = max_depth();
            if (sigma.length() <= depth) return Rat(0);
            BitString head = sigma.prefix(depth);
            return eval(head, t) * pow2(-static_cast<long>(sigma.length() - depth));
        }
        Rat v(0);
        for (const auto& [step_t, step_v] : it->second) {
            if (step_t > t) break;
            v = step_v;
        }
        return v;
    }

    Rat last_value(const BitString& sigma) const {
        auto it = rows.find(sigma);
        if (it == rows.end() || it->second.empty()) return Rat(0);
        return it->second.back().second;
    }

    std::uint64_t max_t() const {
        std::uint64_t m = 0;
        for (const auto& [sigma, steps] : rows)
            if (!steps.empty()) m = std::max(m, steps.back().first);
        return m;
    }

    std::size_t max_depth() const {
        std::size_t d = 0;
        for (const auto& [sigma, steps] : rows) d = std::max(d, sigma.length());
        return d;
    }

    void validate() const {
        for (const auto& [sigma, steps] : rows) {
            Rat prev(0);
            std::uint64_t prev_t = 0;
            bool first = true;
            for (const auto& [t, v] : steps) {
                if (!first && t <= prev_t)
                    throw InvalidApproximantError("approximant steps for '" +
                                                  sigma.display() +
                                                  "' must have increasing t");
                if (v < prev)
                    throw InvalidApproximantError("approximant for '" + sigma.display() +
                                                  "' decreases at t=" + std::to_string(t));
                if (v < 0)
                    throw InvalidApproximantError("negative approximant value at '" +
                                                  sigma.display() + "'");
                prev = v;
                prev_t = t;
                first = false;
            }
        }
    }
};

// Stagewise approximant of a semicomputable semimeasure on cylinders:
// f(sigma, t) nondecreasing in t, every f(., t) itself a semimeasure.
class SemimeasureApprox {
public:
    using EvalFn = detail::ApproxCore::EvalFn;
    using LimitFn = detail::ApproxCore::LimitFn;

    SemimeasureApprox() = default;

    SemimeasureApprox(std::string desc, EvalFn eval, LimitFn limit = nullptr)
        : core_(std::move(desc), std::move(eval), std::move(limit)) {}

    static SemimeasureApprox zero() { return SemimeasureApprox(); }

    // f(sigma, t) = (1 - 2^-t) m(sigma): an increasing approximation of the
    // measure itself. The exponent saturates at 1024 so denominators stay
    // bounded; past that point the approximant holds still, which keeps it
    // stagewise valid with the same limit.
    static SemimeasureApprox scaled_measure(const ComputableMeasure& m) {
        return SemimeasureApprox(
            "scaled " + m.describe(),
            [m](const BitString& sigma, std::uint64_t t) {
                return (1 - pow2(-static_cast<long>(std::min<std::uint64_t>(t, 1024)))) *
                       m.cylinder(sigma);
            },
            [m](const BitString& sigma) { return std::optional<Rat>(m.cylinder(sigma)); });
    }

    static SemimeasureApprox from_table(ApproxTable table) {
        table.validate();
        auto shared = std::make_shared<const ApproxTable>(std::move(table));
        return SemimeasureApprox(
            "table", [shared](const BitString& sigma, std::uint64_t t) {
                return shared->eval(sigma, t);
            },
            [shared](const BitString& sigma) {
                return std::optional<Rat>(shared->eval(sigma, shared->max_t()));
            });
    }

    // f(sigma, t) = stage-t transform of mu by m, optionally capped so the
    // approximant freezes at a stage budget.
    static SemimeasureApprox from_machine_transform(
        const ComputableMeasure& mu, const MonotoneMachine& m,
        std::optional<std::size_t> stage_cap = std::nullopt) {
        LimitFn limit = nullptr;
        auto size = m.size();
        if (size && (!stage_cap || *stage_cap >= *size)) {
            std::size_t full = *size;
            limit = [mu, m, full](const BitString& sigma) {
                return std::optional<Rat>(transform_at_stage(mu, m, sigma, full).value);
            };
        }
        return SemimeasureApprox(
            "transform of " + mu.describe(),
            [mu, m, stage_cap](const BitString& sigma, std::uint64_t t) {
                std::size_t s = static_cast<std::size_t>(t);
                if (stage_cap) s = std::min(s, *stage_cap);
                return transform_at_stage(mu, m, sigma, s).value;
            },
            std::move(limit));
    }

    // Nonnegative linear combination of existing approximants; used for
    // mixture registry hooks.
    static SemimeasureApprox weighted_sum(std::string desc,
                                          std::vector<std::pair<Rat, SemimeasureApprox>> terms) {
        auto shared =
            std::make_shared<const std::vector<std::pair<Rat, SemimeasureApprox>>>(
                std::move(terms));
        for (const auto& [w, m] : *shared)
            if (w < 0) throw DomainError("weighted_sum needs nonnegative coefficients");
        return SemimeasureApprox(
            std::move(desc),
            [shared](const BitString& sigma, std::uint64_t t) {
                Rat v(0);
                for (const auto& [w, m] : *shared)
                    if (w > 0) v += w * m.at(sigma, t);
                return v;
            },
            [shared](const BitString& sigma) -> std::optional<Rat> {
                Rat v(0);
                for (const auto& [w, m] : *shared) {
                    if (w == 0) continue;
                    auto l = m.exact_limit(sigma);
                    if (!l) return std::nullopt;
                    v += w * *l;
                }
                return v;
            });
    }

    Rat at(const BitString& sigma, std::uint64_t t) const { return core_.at(sigma, t); }
    std::optional<Rat> exact_limit(const BitString& sigma) const {
        return core_.exact_limit(sigma);
    }
    Rat limit_or_at(const BitString& sigma, std::uint64_t t) const {
        return core_.limit_or_at(sigma, t);
    }
    const std::string& describe() const { return core_.describe(); }

private:
    detail::ApproxCore core_;
};

// Grid validation of stagewise semimeasure conditions: monotone in t,
// root at most 1, superadditive across siblings. Throws on violation.
inline void check_stagewise_semimeasure(const SemimeasureApprox& f, std::size_t depth,
                                        std::uint64_t t_max) {
    for (std::uint64_t t = 0; t <= t_max; ++t) {
        Rat root = f.at(BitString(), t);
        if (root > 1)
            throw InvalidApproximantError("approximant exceeds 1 at the root, t=" +
                                          std::to_string(t));
        for (std::uint64_t k = 0;; ++k) {
            BitString sigma = BitString::from_shortlex_index(k);
            if (sigma.length() > depth) break;
            Rat here = f.at(sigma, t);
            if (here < 0)
                throw InvalidApproximantError("negative approximant at '" +
                                              sigma.display() + "'");
            if (t > 0 && here < f.at(sigma, t - 1))
                throw InvalidApproximantError("approximant decreases in t at '" +
                                              sigma.display() + "'");
            if (sigma.length() < depth &&
                f.at(sigma.child(0), t) + f.at(sigma.child(1), t) > here)
                throw InvalidApproximantError("approximant not superadditive at '" +
                                              sigma.display() + "'");
        }
    }
}

// Stagewise approximant of a discrete semimeasure P on strings
// (sum over sigma of P(sigma) at most 1).
class DiscreteApprox {
public:
    using EvalFn = detail::ApproxCore::EvalFn;
    using LimitFn = detail::ApproxCore::LimitFn;

    DiscreteApprox() = default;

    DiscreteApprox(std::string desc, EvalFn eval, LimitFn limit = nullptr)
        : core_(std::move(desc), std::move(eval), std::move(limit)) {}

    static DiscreteApprox zero() { return DiscreteApprox(); }

    static DiscreteApprox from_table(ApproxTable table) {
        if (table.extension != ApproxTable::Extension::Zero)
            throw DomainError("discrete approximants extend by zero off their support");
        table.validate();
        auto shared = std::make_shared<const ApproxTable>(std::move(table));
        return DiscreteApprox(
            "table", [shared](const BitString& sigma, std::uint64_t t) {
                return shared->eval(sigma, t);
            },
            [shared](const BitString& sigma) {
                return std::optional<Rat>(shared->last_value(sigma));
            });
    }

    static DiscreteApprox from_prefix_transform(
        const ComputableMeasure& mu, const PrefixFreeMachine& t_machine,
        std::optional<std::size_t> stage_cap = std::nullopt) {
        LimitFn limit = nullptr;
        auto size = t_machine.size();
        if (size && (!stage_cap || *stage_cap >= *size)) {
            std::size_t full = *size;
            limit = [mu, t_machine, full](const BitString& sigma) {
                return std::optional<Rat>(
                    discrete_transform_at_stage(mu, t_machine, sigma, full).value);
            };
        }
        return DiscreteApprox(
            "prefix transform of " + mu.describe(),
            [mu, t_machine, stage_cap](const BitString& sigma, std::uint64_t t) {
                std::size_t s = static_cast<std::size_t>(t);
                if (stage_cap) s = std::min(s, *stage_cap);
                return discrete_transform_at_stage(mu, t_machine, sigma, s).value;
            },
            std::move(limit));
    }

    Rat at(const BitString& sigma, std::uint64_t t) const { return core_.at(sigma, t); }
    std::optional<Rat> exact_limit(const BitString& sigma) const {
        return core_.exact_limit(sigma);
    }
    Rat limit_or_at(const BitString& sigma, std::uint64_t t) const {
        return core_.limit_or_at(sigma, t);
    }
    const std::string& describe() const { return core_.describe(); }

private:
    detail::ApproxCore core_;
};

// Validates sum over the given support of P(., t) at most 1, each value
// nonnegative and monotone in t.
inline void check_stagewise_discrete(const DiscreteApprox& p,
                                     const std::vector<BitString>& support,
                                     std::uint64_t t_max) {
    for (std::uint64_t t = 0; t <= t_max; ++t) {
        Rat total(0);
        for (const auto& sigma : support) {
            Rat here = p.at(sigma, t);
            if (here < 0)
                throw InvalidApproximantError("negative discrete approximant at '" +
                                              sigma.display() + "'");
            if (t > 0 && here < p.at(sigma, t - 1))
                throw InvalidApproximantError("discrete approximant decreases at '" +
                                              sigma.display() + "'");
            total += here;
        }
        if (total > 1)
            throw InvalidApproximantError("discrete approximant mass exceeds 1 at t=" +
                                          std::to_string(t));
    }
}

}  // namespace ap
