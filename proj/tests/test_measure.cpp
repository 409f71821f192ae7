#include <catch2/catch_amalgamated.hpp>

#include "ap/measure.hpp"
#include "support/oracles.hpp"

using ap::BitString;
using ap::ComputableMeasure;
using ap::MarkovChain;
using ap::PremeasureTable;
using ap::Rat;

namespace {

MarkovChain two_state() {
    MarkovChain c;
    c.states = {{Rat(1, 3), 0, 1}, {Rat(3, 4), 0, 1}};
    c.start = 0;
    return c;
}

PremeasureTable depth_two_table(PremeasureTable::Extension ext) {
    PremeasureTable t;
    t.depth = 2;
    t.extension = ext;
    t.values[BitString("")] = Rat(1);
    t.values[BitString("0")] = Rat(1, 3);
    t.values[BitString("1")] = Rat(2, 3);
    t.values[BitString("00")] = Rat(1, 6);
    t.values[BitString("01")] = Rat(1, 6);
    t.values[BitString("10")] = Rat(1, 3);
    t.values[BitString("11")] = Rat(1, 3);
    return t;
}

std::vector<ComputableMeasure> all_kinds() {
    return {ComputableMeasure::uniform(), ComputableMeasure::bernoulli(Rat(1, 3)),
            ComputableMeasure::markov(two_state()),
            ComputableMeasure::table(depth_two_table(PremeasureTable::Extension::Uniform))};
}

}  // namespace

TEST_CASE("cylinder values by kind") {
    auto u = ComputableMeasure::uniform();
    REQUIRE(u.cylinder(BitString("0110")) == Rat(1, 16));
    auto b = ComputableMeasure::bernoulli(Rat(1, 3));
    REQUIRE(b.cylinder(BitString("011")) == Rat(2, 3) * Rat(1, 3) * Rat(1, 3));
    auto m = ComputableMeasure::markov(two_state());
    REQUIRE(m.cylinder(BitString("10")) == Rat(1, 3) * Rat(1, 4));
    auto t = ComputableMeasure::table(depth_two_table(PremeasureTable::Extension::Uniform));
    REQUIRE(t.cylinder(BitString("10")) == Rat(1, 3));
    REQUIRE(t.cylinder(BitString("101")) == Rat(1, 6));
    auto a = ComputableMeasure::table(depth_two_table(PremeasureTable::Extension::Atom));
    REQUIRE(a.cylinder(BitString("100")) == Rat(1, 3));
    REQUIRE(a.cylinder(BitString("101")) == Rat(0));
    REQUIRE(a.cylinder(BitString("1000")) == Rat(1, 3));
}

TEST_CASE("additivity holds for every kind") {
    for (const auto& mu : all_kinds()) REQUIRE_NOTHROW(mu.check_additivity(5));
    auto atom = ComputableMeasure::table(depth_two_table(PremeasureTable::Extension::Atom));
    REQUIRE_NOTHROW(atom.check_additivity(5));
}

TEST_CASE("conditionals agree with cylinder ratios") {
    for (const auto& mu : all_kinds()) {
        for (const auto& sigma : testsupport::strings_upto(2)) {
            auto cond = mu.conditional(sigma);
            Rat base = mu.cylinder(sigma);
            for (const auto& tau : testsupport::strings_upto(3))
                REQUIRE(cond.cylinder(tau) == mu.cylinder(sigma + tau) / base);
        }
    }
}

TEST_CASE("conditioning on a null cylinder is rejected") {
    auto a = ComputableMeasure::table(depth_two_table(PremeasureTable::Extension::Atom));
    REQUIRE_THROWS_AS(a.conditional(BitString("101")), ap::ZeroMeasureError);
}

TEST_CASE("max cell matches a scan of the level") {
    for (const auto& mu : all_kinds()) {
        for (std::size_t n = 0; n <= 5; ++n) {
            Rat best(0);
            for (const auto& s : testsupport::strings_upto(n))
                if (s.length() == n) best = std::max(best, Rat(mu.cylinder(s)));
            REQUIRE(mu.max_cell(n) == best);
        }
    }
    auto atom = ComputableMeasure::table(depth_two_table(PremeasureTable::Extension::Atom));
    REQUIRE(atom.max_cell(4) == Rat(1, 3));
}

TEST_CASE("cylinder set collapses overlaps") {
    auto b = ComputableMeasure::bernoulli(Rat(1, 4));
    std::vector<BitString> xs{BitString("0"), BitString("01"), BitString("11")};
    REQUIRE(b.cylinder_set(xs) == b.cylinder(BitString("0")) + b.cylinder(BitString("11")));
    REQUIRE(b.cylinder_set({}) == Rat(0));
    REQUIRE(b.cylinder_set({BitString("")}) == Rat(1));
}

TEST_CASE("continuity and positivity flags") {
    REQUIRE(ComputableMeasure::uniform().is_continuous());
    REQUIRE(ComputableMeasure::uniform().positivity_certified());
    REQUIRE(ComputableMeasure::bernoulli(Rat(1, 3)).is_continuous());
    auto atom = ComputableMeasure::table(depth_two_table(PremeasureTable::Extension::Atom));
    REQUIRE_FALSE(atom.is_continuous());
    REQUIRE_FALSE(atom.positivity_certified());
    MarkovChain det = two_state();
    det.states[1].p1 = Rat(1);
    auto dm = ComputableMeasure::markov(det);
    REQUIRE_FALSE(dm.is_continuous());
    REQUIRE_FALSE(dm.positivity_certified());
}

TEST_CASE("next bit probability matches the cylinder ratio") {
    for (const auto& mu : all_kinds()) {
        for (const auto& sigma : testsupport::strings_upto(3)) {
            Rat base = mu.cylinder(sigma);
            if (base == 0) continue;
            REQUIRE(mu.next_bit_one_prob(sigma) == mu.cylinder(sigma.child(1)) / base);
        }
    }
}

TEST_CASE("malformed inputs are rejected") {
    REQUIRE_THROWS_AS(ComputableMeasure::bernoulli(Rat(0)), ap::DomainError);
    REQUIRE_THROWS_AS(ComputableMeasure::bernoulli(Rat(1)), ap::DomainError);
    REQUIRE_THROWS_AS(ComputableMeasure::bernoulli(Rat(5, 4)), ap::DomainError);

    MarkovChain bad = two_state();
    bad.states[0].next1 = 7;
    REQUIRE_THROWS_AS(ComputableMeasure::markov(bad), ap::DomainError);
    MarkovChain none;
    REQUIRE_THROWS_AS(ComputableMeasure::markov(none), ap::DomainError);

    auto t = depth_two_table(PremeasureTable::Extension::Uniform);
    t.values[BitString("00")] = Rat(1, 5);
    REQUIRE_THROWS_AS(ComputableMeasure::table(t), ap::DomainError);
    auto missing = depth_two_table(PremeasureTable::Extension::Uniform);
    missing.values.erase(BitString("11"));
    REQUIRE_THROWS_AS(ComputableMeasure::table(missing), ap::DomainError);
    auto badroot = depth_two_table(PremeasureTable::Extension::Uniform);
    badroot.depth = 0;
    badroot.values.clear();
    badroot.values[BitString("")] = Rat(1, 2);
    REQUIRE_THROWS_AS(ComputableMeasure::table(badroot), ap::DomainError);
}
