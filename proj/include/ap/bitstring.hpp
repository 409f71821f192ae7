#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include "ap/errors.hpp"

namespace ap {

// A finite binary string. The empty string is written "-" in files and
// reports. Ordering (<, <=>) is shortlex, the order used to index strings
// in schedules; lexicographic tree order is exposed separately for cover
// algorithms.
class BitString {
public:
    BitString() = default;

    explicit BitString(std::string_view bits) : bits_(bits) {
        for (char c : bits_)
            if (c != '0' && c != '1')
                throw DomainError("bit strings may contain only 0 and 1, got '" +
                                  std::string(bits) + "'");
    }

    static BitString epsilon() { return BitString(); }

    // Accepts "-" for the empty string; used by every loader.
    static BitString parse(std::string_view text, const std::string& source = "<bits>",
                           std::size_t line = 0) {
        if (text == "-") return BitString();
        for (char c : text)
            if (c != '0' && c != '1')
                throw ParseError(source, line,
                                 "bad bit string '" + std::string(text) + "'");
        BitString b;
        b.bits_ = std::string(text);
        return b;
    }

    std::size_t length() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }
    int bit(std::size_t i) const { return bits_[i] == '1' ? 1 : 0; }

    const std::string& str() const { return bits_; }
    std::string display() const { return bits_.empty() ? "-" : bits_; }

    BitString operator+(const BitString& rhs) const {
        BitString r;
        r.bits_ = bits_ + rhs.bits_;
        return r;
    }

    BitString child(int b) const {
        BitString r;
        r.bits_ = bits_ + (b ? '1' : '0');
        return r;
    }

    BitString parent() const {
        if (empty()) throw DomainError("the empty string has no parent");
        BitString r;
        r.bits_ = bits_.substr(0, bits_.size() - 1);
        return r;
    }

    BitString sibling() const {
        BitString r = *this;
        r.bits_.back() = (r.bits_.back() == '0') ? '1' : '0';
        return r;
    }

    BitString prefix(std::size_t n) const {
        BitString r;
        r.bits_ = bits_.substr(0, n);
        return r;
    }

    // this <= rhs in the prefix order.
    bool is_prefix_of(const BitString& rhs) const {
        return bits_.size() <= rhs.bits_.size() &&
               rhs.bits_.compare(0, bits_.size(), bits_) == 0;
    }

    bool is_proper_prefix_of(const BitString& rhs) const {
        return bits_.size() < rhs.bits_.size() && is_prefix_of(rhs);
    }

    // Comparability: one is a prefix of the other.
    bool comparable(const BitString& rhs) const {
        return is_prefix_of(rhs) || rhs.is_prefix_of(*this);
    }

    bool operator==(const BitString& rhs) const { return bits_ == rhs.bits_; }

    std::strong_ordering operator<=>(const BitString& rhs) const {
        if (bits_.size() != rhs.bits_.size())
            return bits_.size() <=> rhs.bits_.size();
        return bits_.compare(rhs.bits_) <=> 0;
    }

    // Tree (lexicographic) order: a proper prefix precedes its extensions.
    static bool lex_less(const BitString& a, const BitString& b) {
        return a.bits_ < b.bits_;
    }

    // Position in the shortlex listing of all strings: "" -> 0, "0" -> 1,
    // "1" -> 2, "00" -> 3, ... Only defined for lengths up to 62.
    std::uint64_t shortlex_index() const {
        if (bits_.size() > 62) throw DomainError("shortlex index overflow");
        std::uint64_t v = 0;
        for (char c : bits_) v = (v << 1) | (c == '1' ? 1u : 0u);
        return (std::uint64_t(1) << bits_.size()) - 1 + v;
    }

    static BitString from_shortlex_index(std::uint64_t k) {
        std::size_t len = 0;
        while ((std::uint64_t(1) << (len + 1)) - 1 <= k) ++len;
        std::uint64_t v = k - ((std::uint64_t(1) << len) - 1);
        BitString r;
        r.bits_.resize(len);
        for (std::size_t i = 0; i < len; ++i)
            r.bits_[len - 1 - i] = (v >> i) & 1 ? '1' : '0';
        return r;
    }

private:
    std::string bits_;
};

inline std::ostream& operator<<(std::ostream& os, const BitString& b) {
    return os << b.display();
}

struct BitStringLexLess {
    bool operator()(const BitString& a, const BitString& b) const {
        return BitString::lex_less(a, b);
    }
};

}  // namespace ap
