#include <catch2/catch_amalgamated.hpp>

#include "ap/semimeasure.hpp"
#include "support/oracles.hpp"

using ap::ApproxTable;
using ap::BitString;
using ap::ComputableMeasure;
using ap::DiscreteApprox;
using ap::Rat;
using ap::SemimeasureApprox;

namespace {

ApproxTable ramp_table() {
    // Climbs toward a defective semimeasure with mass 3/4 at the root.
    ApproxTable tab;
    tab.extension = ApproxTable::Extension::Halving;
    tab.rows[BitString("")] = {{0, Rat(3, 4)}};
    tab.rows[BitString("0")] = {{0, Rat(1, 4)}, {1, Rat(1, 2)}};
    tab.rows[BitString("1")] = {{0, Rat(1, 4)}};
    tab.rows[BitString("00")] = {{0, Rat(1, 4)}};
    tab.rows[BitString("01")] = {{1, Rat(1, 4)}};
    tab.rows[BitString("10")] = {{0, Rat(1, 8)}};
    tab.rows[BitString("11")] = {{0, Rat(1, 8)}};
    return tab;
}

}  // namespace

TEST_CASE("zero approximant") {
    auto z = SemimeasureApprox::zero();
    REQUIRE(z.at(BitString("0101"), 17) == Rat(0));
    REQUIRE(z.exact_limit(BitString("")) == std::optional<Rat>(Rat(0)));
    REQUIRE_NOTHROW(ap::check_stagewise_semimeasure(z, 3, 3));
}

TEST_CASE("scaled measure approximant") {
    auto f = SemimeasureApprox::scaled_measure(ComputableMeasure::bernoulli(Rat(1, 3)));
    REQUIRE(f.at(BitString(""), 0) == Rat(0));
    REQUIRE(f.at(BitString(""), 2) == Rat(3, 4));
    REQUIRE(f.at(BitString("1"), 1) == Rat(1, 2) * Rat(1, 3));
    REQUIRE(f.exact_limit(BitString("1")) == std::optional<Rat>(Rat(1, 3)));
    REQUIRE(f.limit_or_at(BitString("1"), 0) == Rat(1, 3));
    REQUIRE_NOTHROW(ap::check_stagewise_semimeasure(f, 4, 6));
    // Saturation keeps huge t cheap and monotone.
    REQUIRE(f.at(BitString(""), 99999) == f.at(BitString(""), 1024));
}

TEST_CASE("table approximants follow their steps") {
    auto f = SemimeasureApprox::from_table(ramp_table());
    REQUIRE(f.at(BitString(""), 0) == Rat(3, 4));
    REQUIRE(f.at(BitString("0"), 0) == Rat(1, 4));
    REQUIRE(f.at(BitString("0"), 1) == Rat(1, 2));
    REQUIRE(f.at(BitString("01"), 0) == Rat(0));
    REQUIRE(f.at(BitString("01"), 1) == Rat(1, 4));
    REQUIRE(f.exact_limit(BitString("")) == std::optional<Rat>(Rat(3, 4)));
    // Halving extension splits mass below the listed depth.
    REQUIRE(f.at(BitString("011"), 5) == Rat(1, 8));
    REQUIRE(f.at(BitString("0110"), 5) == Rat(1, 16));
    REQUIRE_NOTHROW(ap::check_stagewise_semimeasure(f, 4, 4));
}

TEST_CASE("invalid tables are rejected") {
    ApproxTable dec;
    dec.rows[BitString("0")] = {{0, Rat(1, 2)}, {1, Rat(1, 4)}};
    REQUIRE_THROWS_AS(SemimeasureApprox::from_table(dec), ap::InvalidApproximantError);
    ApproxTable dup;
    dup.rows[BitString("0")] = {{1, Rat(1, 4)}, {1, Rat(1, 2)}};
    REQUIRE_THROWS_AS(SemimeasureApprox::from_table(dup), ap::InvalidApproximantError);
    ApproxTable neg;
    neg.rows[BitString("0")] = {{0, Rat(-1, 2)}};
    REQUIRE_THROWS_AS(SemimeasureApprox::from_table(neg), ap::InvalidApproximantError);
}

TEST_CASE("stagewise checks catch broken approximants") {
    SemimeasureApprox big("big", [](const BitString& s, std::uint64_t) {
        return s.empty() ? Rat(5, 4) : Rat(0);
    });
    REQUIRE_THROWS_AS(ap::check_stagewise_semimeasure(big, 2, 1),
                      ap::InvalidApproximantError);
    SemimeasureApprox sub("sub", [](const BitString& s, std::uint64_t) {
        // Children jointly exceed the parent.
        return s.empty() ? Rat(1, 2) : ap::pow2(-static_cast<long>(s.length()));
    });
    REQUIRE_THROWS_AS(ap::check_stagewise_semimeasure(sub, 2, 1),
                      ap::InvalidApproximantError);
    SemimeasureApprox wobble("wobble", [](const BitString& s, std::uint64_t t) {
        return s.empty() ? (t == 0 ? Rat(1, 2) : Rat(1, 4)) : Rat(0);
    });
    REQUIRE_THROWS_AS(ap::check_stagewise_semimeasure(wobble, 1, 2),
                      ap::InvalidApproximantError);
}

TEST_CASE("machine transform approximant tracks the machine stages") {
    auto m = ap::MonotoneMachine::from_pairs(
        {{BitString("0"), BitString("1")}, {BitString("01"), BitString("10")}});
    auto mu = ComputableMeasure::uniform();
    auto f = SemimeasureApprox::from_machine_transform(mu, m);
    REQUIRE(f.at(BitString("1"), 0) == Rat(0));
    REQUIRE(f.at(BitString("1"), 1) == Rat(1, 2));
    REQUIRE(f.at(BitString("1"), 2) == Rat(3, 4));
    REQUIRE(f.at(BitString("1"), 50) == Rat(3, 4));
    REQUIRE(f.exact_limit(BitString("10")) == std::optional<Rat>(Rat(1, 4)));
    REQUIRE_NOTHROW(ap::check_stagewise_semimeasure(f, 3, 4));

    auto capped = SemimeasureApprox::from_machine_transform(mu, m, 1);
    REQUIRE(capped.at(BitString("1"), 5) == Rat(1, 2));
    REQUIRE_FALSE(capped.exact_limit(BitString("1")).has_value());
}

TEST_CASE("weighted sums combine values and limits") {
    auto a = SemimeasureApprox::scaled_measure(ComputableMeasure::uniform());
    auto b = SemimeasureApprox::zero();
    auto s = SemimeasureApprox::weighted_sum("s", {{Rat(1, 2), a}, {Rat(1, 3), b}});
    REQUIRE(s.at(BitString("0"), 1) == Rat(1, 2) * Rat(1, 4));
    REQUIRE(s.exact_limit(BitString("0")) == std::optional<Rat>(Rat(1, 4)));
    REQUIRE_THROWS_AS(
        SemimeasureApprox::weighted_sum("bad", {{Rat(-1, 2), a}}), ap::DomainError);
    SemimeasureApprox no_limit("n", [](const BitString&, std::uint64_t) { return Rat(0); });
    auto t = SemimeasureApprox::weighted_sum("t", {{Rat(1), no_limit}});
    REQUIRE_FALSE(t.exact_limit(BitString("")).has_value());
}

TEST_CASE("discrete approximants and their checks") {
    ApproxTable tab;
    tab.rows[BitString("01")] = {{0, Rat(1, 4)}, {1, Rat(1, 2)}};
    tab.rows[BitString("1")] = {{0, Rat(1, 4)}};
    auto p = DiscreteApprox::from_table(tab);
    REQUIRE(p.at(BitString("01"), 0) == Rat(1, 4));
    REQUIRE(p.at(BitString("01"), 3) == Rat(1, 2));
    REQUIRE(p.at(BitString("0"), 9) == Rat(0));
    REQUIRE(p.exact_limit(BitString("01")) == std::optional<Rat>(Rat(1, 2)));
    REQUIRE_NOTHROW(
        ap::check_stagewise_discrete(p, testsupport::strings_upto(3), 3));

    ApproxTable halv;
    halv.extension = ApproxTable::Extension::Halving;
    halv.rows[BitString("0")] = {{0, Rat(1, 2)}};
    REQUIRE_THROWS_AS(DiscreteApprox::from_table(halv), ap::DomainError);

    DiscreteApprox heavy("h", [](const BitString& s, std::uint64_t) {
        return s.length() == 1 ? Rat(3, 4) : Rat(0);
    });
    REQUIRE_THROWS_AS(
        ap::check_stagewise_discrete(heavy, testsupport::strings_upto(2), 1),
        ap::InvalidApproximantError);
}

TEST_CASE("prefix transform approximant") {
    auto t = ap::PrefixFreeMachine::from_pairs(
        {{BitString("00"), BitString("01")}, {BitString("1"), BitString("01")}});
    auto mu = ComputableMeasure::uniform();
    auto p = DiscreteApprox::from_prefix_transform(mu, t);
    REQUIRE(p.at(BitString("01"), 1) == Rat(1, 4));
    REQUIRE(p.at(BitString("01"), 2) == Rat(3, 4));
    REQUIRE(p.exact_limit(BitString("01")) == std::optional<Rat>(Rat(3, 4)));
    REQUIRE(p.exact_limit(BitString("0")) == std::optional<Rat>(Rat(0)));
}
