#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ap/bitstring.hpp"
#include "ap/errors.hpp"
#include "ap/machine.hpp"
#include "ap/measure.hpp"
#include "ap/rational.hpp"
#include "ap/region.hpp"
#include "ap/schedule.hpp"
#include "ap/semimeasure.hpp"

namespace ap {

struct LengthSchedule {
    std::function<std::size_t(std::uint64_t)> at;

    // Description length l_s = s, the default schedule.
    static LengthSchedule identity() {
        return {[](std::uint64_t s) { return static_cast<std::size_t>(s); }};
    }

    // l_s = factor * s, for measures whose cells shrink slowly.
    static LengthSchedule linear(std::size_t factor) {
        if (factor == 0) throw DomainError("length schedule factor must be positive");
        return {[factor](std::uint64_t s) { return static_cast<std::size_t>(factor * s); }};
    }

    // l_s = base + s/denom. Sublinear growth keeps covers small when cells
    // only shrink geometrically (skewed measures fragment every fill), while
    // the greedy leftover maxcell(l_s) still vanishes along the run.
    static LengthSchedule affine(std::size_t base, std::uint64_t denom) {
        if (denom == 0) throw DomainError("length schedule divisor must be positive");
        return {[base, denom](std::uint64_t s) {
            return base + static_cast<std::size_t>(s / denom);
        }};
    }
};

struct StageRecord {
    std::uint64_t stage = 0;
    BitString sigma;
    std::uint64_t t = 0;
    std::size_t length = 0;
    enum class Action { Skip, Fill } action = Action::Skip;
    Rat have;       // measure already granted to sigma before this stage
    Rat target;     // approximant value f_t(sigma)
    Rat available;  // measure of the free region
    Rat deficit;    // target - have
    Rat added;      // measure granted at this stage
    std::size_t picked = 0;  // descriptions appended at this stage
    std::optional<BitString> u_witness;  // nonuniversal builds: the scanned description

    std::string to_line() const {
        std::ostringstream os;
        os << stage << '\t' << sigma.display() << '\t' << t << '\t' << length << '\t'
           << (action == Action::Skip ? "skip" : "fill") << '\t' << format_rat(have)
           << '\t' << format_rat(target) << '\t' << format_rat(available) << '\t'
           << format_rat(deficit) << '\t' << format_rat(added) << '\t' << picked;
        if (u_witness) os << '\t' << u_witness->display();
        return os.str();
    }
};

// Byte-capped stage log. Every build keeps one; once the cap is reached the
// log stops growing but keeps counting, and says so.
class Transcript {
public:
    explicit Transcript(std::size_t byte_cap = 1 << 20) : byte_cap_(byte_cap) {}

    void append(const StageRecord& r) {
        ++total_;
        if (truncated_) return;
        std::string line = r.to_line();
        if (bytes_ + line.size() + 1 > byte_cap_) {
            truncated_ = true;
            return;
        }
        bytes_ += line.size() + 1;
        records_.push_back(r);
        lines_.push_back(std::move(line));
    }

    const std::vector<StageRecord>& records() const { return records_; }
    bool truncated() const { return truncated_; }
    std::uint64_t total_stages() const { return total_; }
    std::size_t bytes() const { return bytes_; }

    std::string text() const {
        std::string out =
            "stage\tsigma\tt\tlength\taction\thave\ttarget\tavailable\tdeficit\tadded\tpicked\tu_witness\n";
        for (const auto& l : lines_) {
            out += l;
            out += '\n';
        }
        if (truncated_)
            out += "# truncated at " + std::to_string(bytes_) + " bytes; " +
                   std::to_string(total_) + " stages ran in total\n";
        return out;
    }

private:
    std::size_t byte_cap_;
    std::size_t bytes_ = 0;
    bool truncated_ = false;
    std::uint64_t total_ = 0;
    std::vector<StageRecord> records_;
    std::vector<std::string> lines_;
};

// Evolving construction state: per target string, the prefix-free cover of
// descriptions granted so far and its cached measure.
class BuildState {
public:
    const Cover& descriptions(const BitString& sigma) const {
        auto it = d_.find(sigma);
        return it == d_.end() ? empty_ : it->second;
    }

    Rat covered(const BitString& sigma) const {
        auto it = dmass_.find(sigma);
        return it == dmass_.end() ? Rat(0) : it->second;
    }

    const std::vector<MachinePair>& pairs() const { return pairs_; }
    const std::map<BitString, Cover>& all_descriptions() const { return d_; }
    std::uint64_t stages_run() const { return stages_; }

    // Discrete builds: cover and mass of everything granted so far.
    const Cover& used() const { return used_; }
    const Rat& used_mass() const { return used_mass_; }

    // With merge set, covers are renormalized to the canonical antichain and
    // this string's machine pairs are rebuilt from it; grants stay cheap when
    // fills land next to earlier ones. Without it the picked strings go in
    // verbatim, which literal-length builds rely on.
    void grant(const BitString& sigma, const Cover& a, const Rat& added, bool track_union,
               bool merge = true) {
        Cover& d = d_[sigma];
        d.insert(d.end(), a.begin(), a.end());
        if (merge) {
            d = merge_cover(std::move(d));
            pairs_.erase(std::remove_if(pairs_.begin(), pairs_.end(),
                                        [&](const MachinePair& p) {
                                            return p.output == sigma;
                                        }),
                         pairs_.end());
            for (const auto& rho : d) pairs_.push_back({rho, sigma});
        } else {
            std::sort(d.begin(), d.end(), BitString::lex_less);
            for (const auto& rho : a) pairs_.push_back({rho, sigma});
        }
        dmass_[sigma] += added;
        if (track_union) {
            used_.insert(used_.end(), a.begin(), a.end());
            if (merge)
                used_ = merge_cover(std::move(used_));
            else
                std::sort(used_.begin(), used_.end(), BitString::lex_less);
            used_mass_ += added;
        }
    }

    void bump_stage() { ++stages_; }

private:
    std::map<BitString, Cover> d_;
    std::map<BitString, Rat> dmass_;
    std::vector<MachinePair> pairs_;
    Cover used_;
    Rat used_mass_{0};
    std::uint64_t stages_ = 0;
    Cover empty_;
};

// Free region for a fill on sigma at description length l. For the root the
// free region is the complement of its own grants; below the root it is the
// parent's region minus both children's grants (an empty parent leaves
// nothing available). Returns the cover and its measure.
inline std::pair<Cover, Rat> available_strings(const BuildState& st,
                                               const ComputableMeasure& mu,
                                               const BitString& sigma, std::size_t l) {
    Cover r;
    if (sigma.empty()) {
        r = subtract({BitString()}, st.descriptions(sigma));
    } else {
        const Cover& parent = st.descriptions(sigma.parent());
        if (parent.empty()) return {{}, Rat(0)};
        Cover holes = st.descriptions(sigma);
        const Cover& sib = st.descriptions(sigma.sibling());
        holes.insert(holes.end(), sib.begin(), sib.end());
        r = subtract(parent, holes);
    }
    Rat x(0);
    for (const auto& e : r) {
        if (e.length() > l)
            throw LengthScheduleError("length schedule too small: free region holds '" +
                                      e.display() + "' but l=" + std::to_string(l));
        x += mu.cylinder(e);
    }
    return {std::move(r), std::move(x)};
}

struct GreedyOptions {
    // Emit every taken subtree as its length-l leaves instead of as a single
    // cover element. Needed when literal description lengths matter.
    bool expand_to_length = false;
    std::size_t expansion_cap = std::size_t(1) << 16;
};

struct GreedyResult {
    Cover picked;  // lexicographic
    Rat added{0};
};

// Lexicographic include-if-fits walk over the free region at granularity l:
// a subtree is taken whole when its measure fits the remaining budget,
// otherwise it is split; length-l cells that do not fit are skipped. On
// exit either the region is exhausted or the remaining budget is below the
// largest length-l cell. Zero-measure cells are never taken.
inline GreedyResult greedy_fill(const Cover& r, const ComputableMeasure& mu,
                                const Rat& budget, std::size_t l,
                                const GreedyOptions& opts = {}) {
    GreedyResult res;
    Rat remaining = budget;
    std::size_t emitted = 0;
    auto walk = [&](auto&& self, const BitString& node) -> void {
        if (remaining == 0) return;
        Rat m = mu.cylinder(node);
        if (m == 0) return;
        if (m <= remaining) {
            remaining -= m;
            res.added += m;
            if (!opts.expand_to_length) {
                res.picked.push_back(node);
                return;
            }
            std::size_t extra = l - node.length();
            std::uint64_t leaves =
                extra >= 63 ? opts.expansion_cap + std::uint64_t(1)
                            : (std::uint64_t(1) << extra);
            if (emitted + leaves > opts.expansion_cap)
                throw BudgetError("expansion", "expanding fill to length " +
                                                   std::to_string(l) + " exceeds cap " +
                                                   std::to_string(opts.expansion_cap));
            emitted += leaves;
            Cover leaves_cover = expand_to_depth({node}, l, opts.expansion_cap);
            res.picked.insert(res.picked.end(), leaves_cover.begin(), leaves_cover.end());
            return;
        }
        if (node.length() == l) return;
        self(self, node.child(0));
        self(self, node.child(1));
    };
    for (const auto& node : r) walk(walk, node);
    return res;
}

struct BuildOptions {
    std::uint64_t stages = 0;
    LengthSchedule lengths = LengthSchedule::identity();
    std::size_t transcript_byte_cap = std::size_t(1) << 20;
    std::function<void(const StageRecord&, const BuildState&)> observer;
};

struct BuildResult {
    MonotoneMachine machine;
    BuildState state;
    Transcript transcript;
};

namespace detail {

inline void check_monotone_target(const Rat& target, const Rat& have,
                                  const BitString& sigma, std::uint64_t t) {
    if (target < have)
        throw InvalidApproximantError(
            "approximant at '" + sigma.display() + "', t=" + std::to_string(t) +
            " fell below the measure already granted (" + format_rat(target) + " < " +
            format_rat(have) + ")");
}

}  // namespace detail

// Stagewise synthesis of a monotone machine whose transform of mu converges
// to the semimeasure approximated by f. Deterministic in its inputs.
inline BuildResult build_machine_continuous(const ComputableMeasure& mu,
                                            const SemimeasureApprox& f,
                                            const BuildOptions& opts) {
    if (!mu.is_continuous())
        throw AtomicMeasureError("source measure " + mu.describe() +
                                 " is not certified nonatomic");
    BuildState st;
    Transcript tr(opts.transcript_byte_cap);
    for (std::uint64_t s = 1; s <= opts.stages; ++s) {
        StageTask task = stage_schedule(s);
        std::size_t l = opts.lengths.at(s);
        StageRecord rec;
        rec.stage = s;
        rec.sigma = task.sigma;
        rec.t = task.t;
        rec.length = l;
        rec.have = st.covered(task.sigma);
        rec.target = f.at(task.sigma, task.t);
        if (task.sigma.empty() && rec.target > 1)
            throw InvalidApproximantError("approximant exceeds 1 at the root, t=" +
                                          std::to_string(task.t));
        detail::check_monotone_target(rec.target, rec.have, task.sigma, task.t);
        if (rec.target == rec.have) {
            rec.action = StageRecord::Action::Skip;
        } else {
            rec.action = StageRecord::Action::Fill;
            auto [r, x] = available_strings(st, mu, task.sigma, l);
            rec.available = x;
            rec.deficit = rec.target - rec.have;
            Rat budget = std::min(rec.available, rec.deficit);
            GreedyResult g = greedy_fill(r, mu, budget, l);
            rec.added = g.added;
            rec.picked = g.picked.size();
            st.grant(task.sigma, g.picked, g.added, false);
        }
        st.bump_stage();
        tr.append(rec);
        if (opts.observer) opts.observer(rec, st);
    }
    return {MonotoneMachine::from_pairs(st.pairs()), std::move(st), std::move(tr)};
}

struct DiscreteBuildResult {
    PrefixFreeMachine machine;
    BuildState state;
    Transcript transcript;
};

// Discrete counterpart: grants disjoint description sets per output string
// from one global free region, so the result is prefix-free by construction.
inline DiscreteBuildResult build_machine_discrete(const ComputableMeasure& mu,
                                                  const DiscreteApprox& p,
                                                  const BuildOptions& opts) {
    if (!mu.is_continuous())
        throw AtomicMeasureError("source measure " + mu.describe() +
                                 " is not certified nonatomic");
    BuildState st;
    Transcript tr(opts.transcript_byte_cap);
    for (std::uint64_t s = 1; s <= opts.stages; ++s) {
        StageTask task = stage_schedule(s);
        std::size_t l = opts.lengths.at(s);
        StageRecord rec;
        rec.stage = s;
        rec.sigma = task.sigma;
        rec.t = task.t;
        rec.length = l;
        rec.have = st.covered(task.sigma);
        rec.target = p.at(task.sigma, task.t);
        detail::check_monotone_target(rec.target, rec.have, task.sigma, task.t);
        if (rec.target == rec.have) {
            rec.action = StageRecord::Action::Skip;
        } else {
            rec.action = StageRecord::Action::Fill;
            Cover r = subtract({BitString()}, st.used());
            Rat x(0);
            for (const auto& e : r) {
                if (e.length() > l)
                    throw LengthScheduleError(
                        "length schedule too small: free region holds '" + e.display() +
                        "' but l=" + std::to_string(l));
                x += mu.cylinder(e);
            }
            rec.available = x;
            rec.deficit = rec.target - rec.have;
            Rat budget = std::min(rec.available, rec.deficit);
            GreedyResult g = greedy_fill(r, mu, budget, l);
            rec.added = g.added;
            rec.picked = g.picked.size();
            st.grant(task.sigma, g.picked, g.added, true);
        }
        st.bump_stage();
        tr.append(rec);
        if (opts.observer) opts.observer(rec, st);
    }
    return {PrefixFreeMachine::from_pairs(st.pairs()), std::move(st), std::move(tr)};
}

struct NonuniversalOptions {
    std::uint64_t stages = 0;
    std::size_t enum_budget = std::size_t(1) << 20;
    std::size_t expansion_cap = std::size_t(1) << 16;
    std::size_t transcript_byte_cap = std::size_t(1) << 20;
    std::function<void(const StageRecord&, const BuildState&)> observer;
};

struct NonuniversalBuildResult {
    MonotoneMachine machine;
    BuildState state;
    Transcript transcript;
    // Per target string: the universal machine's description found by the
    // stage scan (drives the length schedule and the length-gap certificate).
    std::map<BitString, BitString> u_witness;
};

// Variant whose description lengths are pushed above anything the given
// universal machine uses: at each string's first stage the universal
// enumeration is scanned for a description of it, and from then on every
// description granted here is strictly longer than that one plus the stage
// index. Descriptions are emitted at literal length l_s (expansion capped).
inline NonuniversalBuildResult build_machine_nonuniversal(const ComputableMeasure& mu,
                                                          const SemimeasureApprox& f,
                                                          const MonotoneMachine& u,
                                                          const NonuniversalOptions& opts) {
    if (!mu.is_continuous())
        throw AtomicMeasureError("source measure " + mu.describe() +
                                 " is not certified nonatomic");
    BuildState st;
    Transcript tr(opts.transcript_byte_cap);
    NonuniversalBuildResult out;
    std::size_t l = 0;
    GreedyOptions gopts;
    gopts.expand_to_length = true;
    gopts.expansion_cap = opts.expansion_cap;
    for (std::uint64_t s = 1; s <= opts.stages; ++s) {
        StageTask task = stage_schedule(s);
        StageRecord rec;
        rec.stage = s;
        rec.sigma = task.sigma;
        rec.t = task.t;
        if (task.t == 0) {
            std::optional<BitString> found;
            for (std::size_t i = 0; i < opts.enum_budget; ++i) {
                const MachinePair* p = u.pair_at(i);
                if (!p) break;
                if (p->output == task.sigma) {
                    found = p->description;
                    break;
                }
            }
            if (!found) {
                if (u.size() && *u.size() <= opts.enum_budget)
                    throw DomainError("universal machine enumerates no description of '" +
                                      task.sigma.display() + "'");
                throw BudgetError("u-scan", "no description of '" + task.sigma.display() +
                                                "' within " +
                                                std::to_string(opts.enum_budget) +
                                                " enumerated pairs");
            }
            l = std::max(l + 1, found->length() + static_cast<std::size_t>(s));
            rec.u_witness = *found;
            out.u_witness[task.sigma] = *found;
        } else {
            l = l + 1;
        }
        rec.length = l;
        rec.have = st.covered(task.sigma);
        rec.target = f.at(task.sigma, task.t);
        if (task.sigma.empty() && rec.target > 1)
            throw InvalidApproximantError("approximant exceeds 1 at the root, t=" +
                                          std::to_string(task.t));
        detail::check_monotone_target(rec.target, rec.have, task.sigma, task.t);
        if (rec.target == rec.have) {
            rec.action = StageRecord::Action::Skip;
        } else {
            rec.action = StageRecord::Action::Fill;
            auto [r, x] = available_strings(st, mu, task.sigma, l);
            rec.available = x;
            rec.deficit = rec.target - rec.have;
            Rat budget = std::min(rec.available, rec.deficit);
            GreedyResult g = greedy_fill(r, mu, budget, l, gopts);
            rec.added = g.added;
            rec.picked = g.picked.size();
            st.grant(task.sigma, g.picked, g.added, false, false);
        }
        st.bump_stage();
        tr.append(rec);
        if (opts.observer) opts.observer(rec, st);
    }
    out.machine = MonotoneMachine::from_pairs(st.pairs());
    out.state = std::move(st);
    out.transcript = std::move(tr);
    return out;
}

// Structural invariants of a construction state against its source measure:
// per-string covers are prefix-free, children nest inside their parent's
// region, siblings are disjoint, cached masses match, and no string holds
// more than its siblings allow. Throws on violation; used by tests and the
// verification tooling.
inline void check_build_invariants(const BuildState& st, const ComputableMeasure& mu) {
    for (const auto& [sigma, d] : st.all_descriptions()) {
        if (!is_prefix_free(d))
            throw DomainError("descriptions for '" + sigma.display() +
                              "' are not prefix-free");
        Rat mass(0);
        for (const auto& e : d) mass += mu.cylinder(e);
        if (mass != st.covered(sigma))
            throw DomainError("cached mass mismatch at '" + sigma.display() + "'");
        if (!sigma.empty()) {
            const Cover& parent = st.descriptions(sigma.parent());
            for (const auto& e : d)
                if (!cover_contains(parent, e))
                    throw DomainError("description '" + e.display() + "' for '" +
                                      sigma.display() + "' escapes its parent region");
            for (const auto& e : d)
                for (const auto& o : st.descriptions(sigma.sibling()))
                    if (e.comparable(o))
                        throw DomainError("sibling regions overlap at '" + e.display() +
                                          "'");
        }
    }
}

}  // namespace ap
