#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ap/bitstring.hpp"
#include "ap/errors.hpp"

namespace ap {

// A region of Cantor space is handled as a prefix-free cover: a finite
// antichain of strings whose cylinders union to the region. Covers are kept
// in lexicographic (tree) order.

using Cover = std::vector<BitString>;

inline bool is_prefix_free(const Cover& xs) {
    Cover s = xs;
    std::sort(s.begin(), s.end(), BitString::lex_less);
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i - 1].is_prefix_of(s[i])) return false;
    return true;
}

// Minimal prefix-free cover of the union of the given cylinders: sorts and
// drops every string that extends a kept one (duplicates collapse).
inline Cover minimal_cover(Cover xs) {
    std::sort(xs.begin(), xs.end(), BitString::lex_less);
    Cover out;
    for (auto& x : xs) {
        if (!out.empty() && out.back().is_prefix_of(x)) continue;
        out.push_back(std::move(x));
    }
    return out;
}

// Canonical cover of the union: nested strings collapse and complete
// sibling pairs fuse into their parent until no fusion applies, giving the
// unique smallest antichain for the region. Keeping construction covers in
// this form stops them fragmenting when fills land next to earlier grants.
inline Cover merge_cover(Cover xs) {
    Cover sorted = minimal_cover(std::move(xs));
    Cover stack;
    for (auto& x : sorted) {
        stack.push_back(std::move(x));
        while (stack.size() >= 2) {
            const BitString& a = stack[stack.size() - 2];
            const BitString& b = stack.back();
            if (b.length() == 0 || a.length() != b.length() || !(a.sibling() == b)) break;
            BitString p = b.parent();
            stack.pop_back();
            stack.pop_back();
            stack.push_back(std::move(p));
        }
    }
    return stack;
}

// True iff the cylinder of x lies inside the covered region.
inline bool cover_contains(const Cover& cover, const BitString& x) {
    for (const auto& c : cover)
        if (c.is_prefix_of(x)) return true;
    return false;
}

namespace detail {

inline void carve(const BitString& node, const Cover& holes, std::size_t lo,
                  std::size_t hi, Cover& out) {
    if (lo == hi) {
        out.push_back(node);
        return;
    }
    for (std::size_t i = lo; i < hi; ++i)
        if (holes[i].length() == node.length()) return;  // hole covers node
    BitString c0 = node.child(0);
    std::size_t mid = lo;
    while (mid < hi && holes[mid].bit(node.length()) == 0) ++mid;
    carve(c0, holes, lo, mid, out);
    carve(node.child(1), holes, mid, hi, out);
}

}  // namespace detail

// Cover of the set difference region(a) \ region(b). `a` must be prefix-free;
// `b` may be any finite set of strings. Output is in lexicographic order when
// `a` is.
inline Cover subtract(const Cover& a, const Cover& b) {
    Cover holes = minimal_cover(b);
    Cover out;
    for (const auto& node : a) {
        // Holes meeting this node: either one at/above removes it entirely,
        // or the ones strictly below carve it.
        bool removed = false;
        Cover below;
        for (const auto& h : holes) {
            if (h.is_prefix_of(node)) {
                removed = true;
                break;
            }
            if (node.is_proper_prefix_of(h)) below.push_back(h);
        }
        if (removed) continue;
        if (below.empty()) {
            out.push_back(node);
            continue;
        }
        std::sort(below.begin(), below.end(), BitString::lex_less);
        detail::carve(node, below, 0, below.size(), out);
    }
    return out;
}

// All strings of length exactly `depth` inside the covered region, in
// lexicographic order. `cap` bounds the output size; exceeding it throws
// BudgetError. Every cover element must have length <= depth.
inline Cover expand_to_depth(const Cover& cover, std::size_t depth, std::size_t cap) {
    std::uint64_t total = 0;
    for (const auto& c : cover) {
        if (c.length() > depth)
            throw DomainError("expand_to_depth: element longer than target depth");
        std::uint64_t leaves = depth - c.length() >= 63
                                   ? cap + std::uint64_t(1)
                                   : (std::uint64_t(1) << (depth - c.length()));
        total += leaves;
        if (total > cap)
            throw BudgetError("expansion",
                              "expanding cover to depth " + std::to_string(depth) +
                                  " exceeds cap " + std::to_string(cap));
    }
    Cover out;
    out.reserve(static_cast<std::size_t>(total));
    for (const auto& c : cover) {
        std::size_t extra = depth - c.length();
        std::uint64_t n = std::uint64_t(1) << extra;
        for (std::uint64_t v = 0; v < n; ++v) {
            BitString suffix;
            {
                std::string bits(extra, '0');
                for (std::size_t i = 0; i < extra; ++i)
                    bits[extra - 1 - i] = (v >> i) & 1 ? '1' : '0';
                suffix = BitString(bits);
            }
            out.push_back(c + suffix);
        }
    }
    return out;
}

}  // namespace ap
