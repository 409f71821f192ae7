#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "ap/encoding.hpp"
#include "ap/enumeration.hpp"
#include "ap/errors.hpp"
#include "ap/machine.hpp"
#include "ap/schedule.hpp"

namespace ap {

// A machine universal for an enumeration by adjunction: its pair set is
// { (code(e) + rho, sigma) : (rho, sigma) in machine e }, enumerated by
// dovetailing machine index against pair index. For each e the simulation
// constant is |code(e)|.
template <class MachineT>
struct UniversalMachine {
    Encoding encoding;
    std::shared_ptr<const MachineEnumeration<MachineT>> machines;
    MachineT machine;

    std::size_t constant_for(std::size_t e) const { return encoding.code(e).length(); }

    // Decodes an adjunction pair back to (machine index, inner pair).
    std::optional<std::pair<std::size_t, MachinePair>> decode(const MachinePair& p) const {
        auto s = encoding.split(p.description);
        if (!s) return std::nullopt;
        return std::make_pair(s->first, MachinePair{s->second, p.output});
    }
};

template <class MachineT>
UniversalMachine<MachineT> assemble_universal(
    const Encoding& enc, std::shared_ptr<const MachineEnumeration<MachineT>> en) {
    if (!en->frozen())
        throw DomainError("enumeration must be frozen before universal assembly");
    if (auto esz = enc.size()) {
        auto msz = en->size();
        if (!msz)
            throw DomainError("explicit encoding cannot index an unbounded enumeration");
        if (*msz > *esz)
            throw DomainError("encoding provides " + std::to_string(*esz) +
                              " code words for " + std::to_string(*msz) + " machines");
    }

    struct Walk {
        std::uint64_t next_k = 0;
    };
    auto walk = std::make_shared<Walk>();
    Encoding enc_copy = enc;
    auto gen = [enc_copy, en, walk](std::size_t i) -> std::optional<MachinePair> {
        while (true) {
            if (auto total = en->size()) {
                // Stop once every machine is known finite and fully emitted.
                bool all_known = true;
                std::size_t sum = 0;
                for (std::size_t e = 0; e < *total && all_known; ++e) {
                    auto sz = en->machine(e).size();
                    if (!sz)
                        all_known = false;
                    else
                        sum += *sz;
                }
                if (all_known && i >= sum) return std::nullopt;
            }
            auto [e, j] = cantor_unpair(walk->next_k++);
            if (auto total = en->size(); total && e >= *total) continue;
            const MachinePair* p = en->machine(e).pair_at(j);
            if (!p) continue;
            return MachinePair{enc_copy.code(e) + p->description, p->output};
        }
    };

    // When the registry is finite with finite members, the assembled size is
    // the sum of the member sizes. Handing that to the store makes stage
    // arithmetic (full_stage, exactness at the full stage) work without
    // first running the generator dry.
    std::optional<std::size_t> known;
    if (auto total = en->size()) {
        std::size_t sum = 0;
        bool all = true;
        for (std::size_t e = 0; e < *total && all; ++e) {
            auto sz = en->machine(e).size();
            if (!sz)
                all = false;
            else
                sum += *sz;
        }
        if (all) known = sum;
    }

    UniversalMachine<MachineT> u;
    u.encoding = enc;
    u.machines = en;
    u.machine = MachineT::from_generator(std::move(gen), known);
    return u;
}

// Dovetail position before which the pair (e, j) is guaranteed to have been
// scanned, so it is present in every stage at least this large (skipped
// positions only pull it earlier).
inline std::uint64_t dovetail_stage_bound(std::size_t e, std::size_t j) {
    return cantor_pair(e, j) + 1;
}

}  // namespace ap
