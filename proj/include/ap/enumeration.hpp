#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "ap/errors.hpp"
#include "ap/machine.hpp"

namespace ap {

namespace detail {

// Pairs in canonical order: by total length |description|+|output|, then by
// description length, then lexicographically within each side.
inline std::vector<MachinePair> pairs_of_total_length(std::size_t total) {
    std::vector<MachinePair> out;
    for (std::size_t dl = 0; dl <= total; ++dl) {
        std::size_t ol = total - dl;
        std::uint64_t dcount = std::uint64_t(1) << dl;
        std::uint64_t ocount = std::uint64_t(1) << ol;
        for (std::uint64_t d = 0; d < dcount; ++d) {
            std::string db(dl, '0');
            for (std::size_t i = 0; i < dl; ++i)
                db[dl - 1 - i] = (d >> i) & 1 ? '1' : '0';
            for (std::uint64_t o = 0; o < ocount; ++o) {
                std::string ob(ol, '0');
                for (std::size_t i = 0; i < ol; ++i)
                    ob[ol - 1 - i] = (o >> i) & 1 ? '1' : '0';
                out.push_back({BitString(db), BitString(ob)});
            }
        }
    }
    return out;
}

template <class MachineT>
bool canonical_accepts(const std::vector<MachinePair>& pairs) {
    if constexpr (std::is_same_v<MachineT, MonotoneMachine>) {
        return check_monotone_consistency(MonotoneMachine::from_pairs(pairs),
                                          pairs.size())
            .ok;
    } else {
        return check_prefix_free(PrefixFreeMachine::from_pairs(pairs), pairs.size()).ok;
    }
}

// All pair sets of the given total length, as sorted index sequences into a
// canonical pair ranking, in lexicographic order of those sequences.
inline void sets_of_total_length(std::size_t total,
                                 const std::vector<std::vector<MachinePair>>& by_len,
                                 std::vector<std::vector<MachinePair>>& out) {
    // Flatten ranks: (len, index within len) in canonical order.
    struct Ref {
        std::size_t len;
        std::size_t idx;
    };
    std::vector<Ref> ranks;
    for (std::size_t l = 0; l <= total; ++l)
        for (std::size_t i = 0; i < by_len[l].size(); ++i) ranks.push_back({l, i});
    std::vector<Ref> chosen;
    auto rec = [&](auto&& self, std::size_t remaining, std::size_t min_rank) -> void {
        if (remaining == 0) {
            std::vector<MachinePair> set;
            for (const auto& r : chosen) set.push_back(by_len[r.len][r.idx]);
            out.push_back(std::move(set));
            return;
        }
        for (std::size_t r = min_rank; r < ranks.size(); ++r) {
            if (ranks[r].len > remaining) continue;
            chosen.push_back(ranks[r]);
            self(self, remaining - ranks[r].len, r + 1);
            chosen.pop_back();
        }
    };
    rec(rec, total, 0);
}

}  // namespace detail

// A countable machine listing: registered machines first (a finite desk
// registry), optionally followed by the canonical listing of every finite
// machine of the right kind, ordered by total pair length. The listing is
// frozen before use so indices are stable.
template <class MachineT>
class MachineEnumeration {
public:
    static MachineEnumeration registry_only() { return MachineEnumeration(false); }
    static MachineEnumeration with_canonical_tail() { return MachineEnumeration(true); }

    // The class owns a mutex, so shared ownership is the portable way to
    // hand an enumeration around; these avoid a copy that would not compile.
    static std::shared_ptr<MachineEnumeration> make_registry() {
        return std::shared_ptr<MachineEnumeration>(new MachineEnumeration(false));
    }
    static std::shared_ptr<MachineEnumeration> make_with_canonical_tail() {
        return std::shared_ptr<MachineEnumeration>(new MachineEnumeration(true));
    }

    void register_machine(std::string name, MachineT m) {
        if (frozen_) throw DomainError("enumeration is frozen");
        reg_.emplace_back(std::move(name), std::move(m));
    }

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    bool has_canonical_tail() const { return canonical_; }
    std::size_t registered_count() const { return reg_.size(); }

    // Total machine count; unbounded with a canonical tail.
    std::optional<std::size_t> size() const {
        if (canonical_) return std::nullopt;
        return reg_.size();
    }

    MachineT machine(std::size_t e) const {
        if (!frozen_) throw DomainError("enumeration must be frozen before indexing");
        if (e < reg_.size()) return reg_[e].second;
        if (!canonical_)
            throw DomainError("enumeration has no machine at index " + std::to_string(e));
        std::lock_guard<std::mutex> lock(mu_);
        std::size_t want = e - reg_.size();
        while (canon_.size() <= want) {
            std::vector<std::vector<MachinePair>> by_len;
            for (std::size_t l = 0; l <= next_length_; ++l)
                by_len.push_back(detail::pairs_of_total_length(l));
            std::vector<std::vector<MachinePair>> sets;
            detail::sets_of_total_length(next_length_, by_len, sets);
            for (auto& set : sets)
                if (detail::canonical_accepts<MachineT>(set))
                    canon_.push_back(MachineT::from_pairs(std::move(set)));
            ++next_length_;
        }
        return canon_[want];
    }

    std::string name(std::size_t e) const {
        if (e < reg_.size()) return reg_[e].first;
        return "canonical-" + std::to_string(e - reg_.size());
    }

private:
    explicit MachineEnumeration(bool canonical) : canonical_(canonical) {}

    std::vector<std::pair<std::string, MachineT>> reg_;
    bool canonical_;
    bool frozen_ = false;
    mutable std::vector<MachineT> canon_;
    mutable std::size_t next_length_ = 0;
    mutable std::mutex mu_;
};

}  // namespace ap
