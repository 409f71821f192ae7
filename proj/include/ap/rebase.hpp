#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ap/construct.hpp"
#include "ap/encoding.hpp"
#include "ap/errors.hpp"
#include "ap/machine.hpp"
#include "ap/measure.hpp"
#include "ap/mixtures.hpp"
#include "ap/semimeasure.hpp"
#include "ap/transform.hpp"
#include "ap/universal.hpp"

namespace ap {

struct RebaseBudgets {
    std::uint64_t discrete_stages = 0;    // stages for the code-word machine
    std::uint64_t component_stages = 0;   // stages per component rebuild
    std::size_t target_stage_cap = 0;     // 0: full transforms of finite machines
    std::size_t max_components = 0;       // 0: unlimited
    std::size_t verify_stage = 0;         // 0: full enumerations during verify
    std::size_t transcript_byte_cap = std::size_t(1) << 20;
};

namespace detail {

template <class MachineT>
struct RebaseTraits;

template <>
struct RebaseTraits<MonotoneMachine> {
    using Approx = SemimeasureApprox;
    using Build = BuildResult;

    static TransformValue transform(const ComputableMeasure& mu, const MonotoneMachine& m,
                                    const BitString& sigma, std::size_t s) {
        return transform_at_stage(mu, m, sigma, s);
    }
    static Approx conditional_target(const ComputableMeasure& mu, const MonotoneMachine& m,
                                     std::optional<std::size_t> cap) {
        return SemimeasureApprox::from_machine_transform(mu, m, cap);
    }
    static Build build(const ComputableMeasure& mu, const Approx& f,
                       const BuildOptions& opts) {
        return build_machine_continuous(mu, f, opts);
    }
};

template <>
struct RebaseTraits<PrefixFreeMachine> {
    using Approx = DiscreteApprox;
    using Build = DiscreteBuildResult;

    static TransformValue transform(const ComputableMeasure& mu, const PrefixFreeMachine& m,
                                    const BitString& sigma, std::size_t s) {
        return discrete_transform_at_stage(mu, m, sigma, s);
    }
    static Approx conditional_target(const ComputableMeasure& mu,
                                     const PrefixFreeMachine& m,
                                     std::optional<std::size_t> cap) {
        return DiscreteApprox::from_prefix_transform(mu, m, cap);
    }
    static Build build(const ComputableMeasure& mu, const Approx& f,
                       const BuildOptions& opts) {
        return build_machine_discrete(mu, f, opts);
    }
};

}  // namespace detail

// The discrete semimeasure P(code(e)) = mu(cylinder of code(e)), zero off
// the code word family; the quantity the code-word machine is built toward.
inline DiscreteApprox encoded_measure(const ComputableMeasure& mu, const Encoding& enc,
                                      std::size_t index_count) {
    auto eval = [mu, enc, index_count](const BitString& sigma,
                                       std::uint64_t) -> Rat {
        auto split = enc.split(sigma);
        if (!split || !split->second.empty() || split->first >= index_count) return Rat(0);
        return mu.cylinder(sigma);
    };
    return DiscreteApprox(
        "encoded " + mu.describe(), eval,
        [eval](const BitString& sigma) { return std::optional<Rat>(eval(sigma, 0)); });
}

template <class MachineT>
struct RebaseComponent {
    std::size_t e = 0;  // source machine index
    std::size_t i = 0;  // which description of code(e), in discovery order
    BitString code;        // code(e) under the original encoding
    BitString new_code;    // the i-th rebased description of code(e)
    Rat weight;            // mu_tilde mass of new_code
    ComputableMeasure source;  // mu_tilde conditioned on new_code
    MachineT rebuilt;
    typename detail::RebaseTraits<MachineT>::Approx target;
    bool target_exact = false;

    RebaseComponent() : source(ComputableMeasure::uniform()) {}
};

template <class MachineT>
struct RebasePlan {
    ComputableMeasure mu;
    ComputableMeasure mu_tilde;
    UniversalMachine<MachineT> u;
    RebaseBudgets budgets;

    DiscreteApprox p;                  // encoded measure
    DiscreteBuildResult code_machine;  // machine carrying code words to mu_tilde
    std::size_t machine_count = 0;     // enumerated machines in u
    std::vector<std::vector<BitString>> descriptions;  // per e
    std::vector<Rat> eta;              // per e: code mass not yet rebased
    std::vector<RebaseComponent<MachineT>> components;  // discovery order
    bool component_cap_hit = false;
    UniversalMachine<MachineT> u_tilde;

    RebasePlan() : mu(ComputableMeasure::uniform()), mu_tilde(ComputableMeasure::uniform()) {}

    std::size_t description_count(std::size_t e) const { return descriptions[e].size(); }
};

// Builds the full rebasing pipeline from mu to mu_tilde over the universal
// machine u: a prefix-free machine carrying mu's code-word masses onto
// mu_tilde cylinders, one rebuilt component per discovered description, and
// the reassembled universal machine over the new code words. Throws on
// atomic measures, incompatible encodings, and unbounded enumerations.
template <class MachineT>
RebasePlan<MachineT> rebase_plan(const ComputableMeasure& mu,
                                 const ComputableMeasure& mu_tilde,
                                 const UniversalMachine<MachineT>& u,
                                 const RebaseBudgets& budgets) {
    using Traits = detail::RebaseTraits<MachineT>;

    if (!mu.is_continuous())
        throw AtomicMeasureError("source measure " + mu.describe() +
                                 " is not certified nonatomic");
    if (!mu_tilde.is_continuous())
        throw AtomicMeasureError("target measure " + mu_tilde.describe() +
                                 " is not certified nonatomic");
    auto count = u.machines->size();
    if (!count)
        throw DomainError("rebasing needs a finite machine enumeration");

    RebasePlan<MachineT> plan;
    plan.mu = mu;
    plan.mu_tilde = mu_tilde;
    plan.u = u;
    plan.budgets = budgets;
    plan.machine_count = *count;

    auto compat = check_compatibility(u.encoding, mu, plan.machine_count);
    if (!compat.ok)
        throw IncompatibilityError("encoding incompatible with " + mu.describe() + ": " +
                                       compat.note,
                                   *compat.bad_index);

    plan.p = encoded_measure(mu, u.encoding, plan.machine_count);
    // Internal builds run a sublinear description-length schedule: under a
    // skewed base measure the greedy fragments its cover every fill, and with
    // lengths tied to the stage number the cover (and its denominators) grows
    // until stage counts like these are unreachable. Slow growth keeps the
    // covers small; the leftover bound maxcell(l_s) still shrinks fast enough
    // that verification gaps close well inside any delta worth asking for.
    const LengthSchedule rebase_lengths = LengthSchedule::affine(4, 6);
    BuildOptions dopts;
    dopts.stages = budgets.discrete_stages;
    dopts.lengths = rebase_lengths;
    dopts.transcript_byte_cap = budgets.transcript_byte_cap;
    plan.code_machine = build_machine_discrete(mu_tilde, plan.p, dopts);

    plan.descriptions.assign(plan.machine_count, {});
    std::vector<BitString> new_codes;
    std::vector<std::pair<std::size_t, std::size_t>> discovery;  // (e, i) per component
    for (const auto& pair : plan.code_machine.state.pairs()) {
        auto split = u.encoding.split(pair.output);
        if (!split || !split->second.empty() || split->first >= plan.machine_count)
            throw DomainError("code-word machine emitted a non-code output '" +
                              pair.output.display() + "'");
        std::size_t e = split->first;
        if (budgets.max_components > 0 && new_codes.size() >= budgets.max_components) {
            plan.component_cap_hit = true;
            break;
        }
        discovery.emplace_back(e, plan.descriptions[e].size());
        plan.descriptions[e].push_back(pair.description);
        new_codes.push_back(pair.description);
    }

    plan.eta.assign(plan.machine_count, Rat(0));
    for (std::size_t e = 0; e < plan.machine_count; ++e) {
        Rat rebased(0);
        for (const auto& rho : plan.descriptions[e]) rebased += mu_tilde.cylinder(rho);
        plan.eta[e] = mu.cylinder(u.encoding.code(e)) - rebased;
    }

    std::optional<std::size_t> cap;
    if (budgets.target_stage_cap > 0) cap = budgets.target_stage_cap;
    BuildOptions copts;
    copts.stages = budgets.component_stages;
    copts.lengths = rebase_lengths;
    copts.transcript_byte_cap = budgets.transcript_byte_cap;
    auto registry = MachineEnumeration<MachineT>::make_registry();
    for (std::size_t d = 0; d < new_codes.size(); ++d) {
        auto [e, i] = discovery[d];
        RebaseComponent<MachineT> comp;
        comp.e = e;
        comp.i = i;
        comp.code = u.encoding.code(e);
        comp.new_code = new_codes[d];
        comp.weight = mu_tilde.cylinder(comp.new_code);
        comp.source = mu_tilde.conditional(comp.new_code);
        MachineT me = u.machines->machine(e);
        comp.target = Traits::conditional_target(mu.conditional(comp.code), me, cap);
        auto msz = me.size();
        comp.target_exact = msz.has_value() && (!cap || *cap >= *msz);
        auto built = Traits::build(comp.source, comp.target, copts);
        comp.rebuilt = built.machine;
        registry->register_machine("component-" + std::to_string(d), comp.rebuilt);
        plan.components.push_back(std::move(comp));
    }
    registry->freeze();
    plan.u_tilde = assemble_universal(Encoding::from_codes(new_codes),
                                      std::shared_ptr<const MachineEnumeration<MachineT>>(
                                          registry));
    return plan;
}

struct RebaseRecord {
    BitString sigma;
    Rat a;         // original transform
    Rat b;         // rebased transform
    Rat c;         // weighted component sum
    Rat residual;  // certified bound on what unfinished budgets may add to b
    bool exact = true;  // a and the residual use exact limits only
    std::string verdict;  // pass | inconclusive | fail
};

struct RebaseReport {
    std::vector<RebaseRecord> records;
    Rat delta;
    int exit_code = 0;  // 0 pass, 1 verified failure, 2 inconclusive

    bool all(const std::string& v) const {
        for (const auto& r : records)
            if (r.verdict != v) return false;
        return true;
    }
};

namespace detail {

template <class MachineT>
std::size_t full_universal_stage(const UniversalMachine<MachineT>& u,
                                 std::size_t fallback) {
    auto count = u.machines->size();
    if (!count) return fallback;
    std::size_t total = 0;
    for (std::size_t e = 0; e < *count; ++e) {
        auto sz = u.machines->machine(e).size();
        if (!sz) return fallback;
        total += *sz;
    }
    return total;
}

}  // namespace detail

// Compares the original and rebased transforms on the given strings. The
// gap a-b is judged against delta; a certified residual (what exact limits
// say unfinished budgets could still contribute) separates honest
// "inconclusive" from verified failure.
template <class MachineT>
RebaseReport rebase_verify(const RebasePlan<MachineT>& plan,
                           const std::vector<BitString>& sigmas, const Rat& delta) {
    using Traits = detail::RebaseTraits<MachineT>;
    RebaseReport report;
    report.delta = delta;

    std::size_t sa = detail::full_universal_stage(plan.u, plan.budgets.verify_stage);
    if (sa == 0)
        throw DomainError("verify needs a stage budget for non-finite enumerations");
    std::size_t sb = detail::full_universal_stage(plan.u_tilde, plan.budgets.verify_stage);

    // Exact per-component upper bounds on the original component values.
    std::vector<std::optional<Rat>> nu_exact(plan.machine_count);
    std::vector<ComputableMeasure> mu_cond;
    std::vector<MachineT> source_machines;
    for (std::size_t e = 0; e < plan.machine_count; ++e) {
        mu_cond.push_back(plan.mu.conditional(plan.u.encoding.code(e)));
        source_machines.push_back(plan.u.machines->machine(e));
    }

    bool any_fail = false;
    bool any_inconclusive = false;
    for (const auto& sigma : sigmas) {
        RebaseRecord rec;
        rec.sigma = sigma;
        TransformValue a = Traits::transform(plan.mu, plan.u.machine, sigma, sa);
        rec.a = a.value;
        rec.exact = a.exact;
        TransformValue b = Traits::transform(plan.mu_tilde, plan.u_tilde.machine, sigma, sb);
        rec.b = b.value;

        rec.c = 0;
        Rat shortfall(0);
        for (const auto& comp : plan.components) {
            std::size_t sc = comp.rebuilt.size() ? *comp.rebuilt.size()
                                                 : plan.budgets.verify_stage;
            Rat achieved = Traits::transform(comp.source, comp.rebuilt, sigma, sc).value;
            rec.c += comp.weight * achieved;
            Rat target_ub;
            if (comp.target_exact) {
                target_ub = *comp.target.exact_limit(sigma);
            } else {
                target_ub = 1;
                rec.exact = false;
            }
            shortfall += comp.weight * (target_ub - achieved);
        }

        Rat missing(0);
        for (std::size_t e = 0; e < plan.machine_count; ++e) {
            if (plan.eta[e] == 0) continue;
            Rat ub(1);
            auto msz = source_machines[e].size();
            if (msz) {
                ub = Traits::transform(mu_cond[e], source_machines[e], sigma, *msz).value;
            } else {
                rec.exact = false;
            }
            missing += plan.eta[e] * ub;
        }
        rec.residual = shortfall + missing;

        // With a exact: gap within delta is a pass. A stage-capped a only
        // underestimates the gap, so it can certify a failure (the true gap
        // is at least gap - residual) but never a pass.
        Rat gap = rec.a - rec.b;
        if (gap <= delta && gap >= -delta && a.exact) {
            rec.verdict = "pass";
        } else if (gap - rec.residual <= delta && gap >= -delta) {
            rec.verdict = "inconclusive";
            any_inconclusive = true;
        } else {
            rec.verdict = "fail";
            any_fail = true;
        }
        report.records.push_back(std::move(rec));
    }
    report.exit_code = any_fail ? 1 : (any_inconclusive ? 2 : 0);
    return report;
}

}  // namespace ap
