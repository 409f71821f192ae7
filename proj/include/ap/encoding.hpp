#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ap/bitstring.hpp"
#include "ap/errors.hpp"
#include "ap/measure.hpp"
#include "ap/region.hpp"

namespace ap {

// Prefix-free, non-repeating code word family indexing machines: the default
// family is 1^e 0; explicit finite families are validated on construction.
class Encoding {
public:
    // Default-constructed encodings are the 1^e 0 family.
    Encoding() = default;

    static Encoding ones_zero() { return Encoding(); }

    static Encoding from_codes(std::vector<BitString> codes) {
        for (std::size_t i = 0; i < codes.size(); ++i)
            for (std::size_t j = i + 1; j < codes.size(); ++j) {
                if (codes[i] == codes[j])
                    throw DomainError("encoding repeats code word '" + codes[i].display() +
                                      "'");
                if (codes[i].comparable(codes[j]))
                    throw DomainError("encoding is not prefix-free: '" +
                                      codes[i].display() + "' vs '" + codes[j].display() +
                                      "'");
            }
        Encoding e;
        e.codes_ = std::move(codes);
        e.explicit_ = true;
        return e;
    }

    std::optional<std::size_t> size() const {
        if (explicit_) return codes_.size();
        return std::nullopt;
    }

    BitString code(std::size_t e) const {
        if (explicit_) {
            if (e >= codes_.size())
                throw DomainError("encoding has no code word for index " +
                                  std::to_string(e));
            return codes_[e];
        }
        std::string bits(e + 1, '1');
        bits.back() = '0';
        return BitString(bits);
    }

    // Splits x = code(e) + rest; nullopt when no code word prefixes x.
    std::optional<std::pair<std::size_t, BitString>> split(const BitString& x) const {
        if (explicit_) {
            for (std::size_t e = 0; e < codes_.size(); ++e)
                if (codes_[e].is_prefix_of(x))
                    return std::make_pair(e, BitString(x.str().substr(codes_[e].length())));
            return std::nullopt;
        }
        for (std::size_t i = 0; i < x.length(); ++i)
            if (x.bit(i) == 0) return std::make_pair(i, BitString(x.str().substr(i + 1)));
        return std::nullopt;
    }

    std::string describe() const {
        if (!explicit_) return "1^e0";
        return "explicit[" + std::to_string(codes_.size()) + " codes]";
    }

private:
    bool explicit_ = false;
    std::vector<BitString> codes_;
};

struct CompatibilityReport {
    bool ok = true;
    std::optional<std::size_t> bad_index;
    // True when a representation-level certificate covers every index, not
    // just the ones scanned.
    bool proven_for_all = false;
    std::string note;
};

// An encoding is compatible with a measure when every code word cylinder has
// positive measure. Positivity-certified measures settle all indices at
// once; otherwise indices below e_max are checked one by one.
inline CompatibilityReport check_compatibility(const Encoding& enc,
                                               const ComputableMeasure& mu,
                                               std::size_t e_max) {
    if (mu.positivity_certified())
        return {true, std::nullopt, true, "every cylinder of " + mu.describe() +
                                              " has positive measure"};
    std::size_t limit = e_max;
    if (auto sz = enc.size()) limit = std::min(limit, *sz);
    for (std::size_t e = 0; e < limit; ++e)
        if (mu.cylinder(enc.code(e)) == 0)
            return {false, e, false,
                    "code word '" + enc.code(e).display() + "' has measure zero"};
    return {true, std::nullopt, enc.size().has_value() && limit == *enc.size(),
            "checked " + std::to_string(limit) + " code words"};
}

}  // namespace ap
