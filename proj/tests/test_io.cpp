#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <unistd.h>

#include "ap/io.hpp"
#include "support/oracles.hpp"

using ap::BitString;
using ap::Rat;
namespace io = ap::io;

namespace {

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<unsigned> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("ap-io-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }

    std::string file(const std::string& name, const std::string& content) const {
        auto p = path / name;
        std::ofstream out(p);
        out << content;
        return p.string();
    }
};

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ap::ParseError& e) {
        return e.what();
    }
    return "<no throw>";
}

}  // namespace

TEST_CASE("machine files round trip") {
    TempDir dir;
    auto path = dir.file("m.txt",
                         "# a worked example\n"
                         "0 1   # comments reach end of line\n"
                         "01 10\n"
                         "\n"
                         "- 0\n");
    REQUIRE_THROWS_AS(io::load_monotone_machine(path), ap::ParseError);  // - 0 vs 0 1

    auto good = dir.file("good.txt", "0 1\n01 10\n");
    auto m = io::load_monotone_machine(good);
    REQUIRE(m.size() == std::optional<std::size_t>(2));
    REQUIRE(m.pair_at(0)->description == BitString("0"));
    REQUIRE(m.pair_at(1)->output == BitString("10"));

    auto copy = (dir.path / "copy.txt").string();
    io::write_machine_file(copy, m);
    auto m2 = io::load_monotone_machine(copy);
    REQUIRE(m2.size() == m.size());
    for (std::size_t i = 0; i < 2; ++i) {
        REQUIRE(m2.pair_at(i)->description == m.pair_at(i)->description);
        REQUIRE(m2.pair_at(i)->output == m.pair_at(i)->output);
    }

    // The empty string travels as '-'.
    auto empty_desc = dir.file("e.txt", "- 0\n");
    auto me = io::load_monotone_machine(empty_desc);
    REQUIRE(me.pair_at(0)->description.empty());
    auto copy2 = (dir.path / "copy2.txt").string();
    io::write_machine_file(copy2, me);
    REQUIRE(io::load_monotone_machine(copy2).pair_at(0)->description.empty());
}

TEST_CASE("machine file diagnostics carry line numbers") {
    TempDir dir;
    auto bad = dir.file("bad.txt", "0 1\n00 01\n");
    std::string msg = message_of([&] { io::load_monotone_machine(bad); });
    REQUIRE(msg == bad + ":2: not a monotone machine: pairs (0,1) and (00,01) conflict "
                         "(lines 1 and 2)");

    auto three = dir.file("three.txt", "0 1 1\n");
    msg = message_of([&] { io::load_machine_pairs(three); });
    REQUIRE(msg.find(":1: expected 'description output'") != std::string::npos);

    auto junk = dir.file("junk.txt", "0 1\nx2 0\n");
    msg = message_of([&] { io::load_machine_pairs(junk); });
    REQUIRE(msg.find(":2:") != std::string::npos);

    msg = message_of([&] { io::load_monotone_machine((dir.path / "nope.txt").string()); });
    REQUIRE(msg.find("cannot open file") != std::string::npos);
}

TEST_CASE("prefix machine files reject prefix and duplicate conflicts") {
    TempDir dir;
    auto ok = io::load_prefix_machine(dir.file("t.txt", "00 1\n01 11\n1 -\n"));
    REQUIRE(ok.size() == std::optional<std::size_t>(3));

    std::string msg = message_of(
        [&] { io::load_prefix_machine(dir.file("p.txt", "0 1\n01 11\n")); });
    REQUIRE(msg.find("not a prefix-free machine") != std::string::npos);
    REQUIRE(msg.find("(lines 1 and 2)") != std::string::npos);

    msg = message_of(
        [&] { io::load_prefix_machine(dir.file("d.txt", "0 1\n0 11\n")); });
    REQUIRE(msg.find("not a prefix-free machine") != std::string::npos);

    // An exact duplicate row collapses instead of conflicting.
    REQUIRE_NOTHROW(io::load_prefix_machine(dir.file("dup.txt", "0 1\n0 1\n")));
}

TEST_CASE("markov files") {
    TempDir dir;
    auto path = dir.file("chain.txt",
                         "start 0\n"
                         "state 0 1/3 0 1\n"
                         "state 1 3/4 0 1\n");
    auto mu = ap::ComputableMeasure::markov(io::load_markov_file(path));
    REQUIRE(mu.next_bit_one_prob(BitString("")) == Rat(1, 3));
    REQUIRE(mu.next_bit_one_prob(BitString("1")) == Rat(3, 4));
    REQUIRE(mu.cylinder(BitString("10")) == Rat(1, 3) * Rat(1, 4));

    REQUIRE_THROWS_AS(
        io::load_markov_file(dir.file("dup.txt",
                                      "start 0\nstate 0 1/2 0 0\nstate 0 1/2 0 0\n")),
        ap::ParseError);
    REQUIRE_THROWS_AS(
        io::load_markov_file(dir.file("gap.txt", "start 0\nstate 0 1/2 0 2\nstate 2 1/2 0 0\n")),
        ap::ParseError);
    REQUIRE_THROWS_AS(io::load_markov_file(dir.file("what.txt", "begin 0\n")),
                      ap::ParseError);
    REQUIRE_THROWS_AS(
        io::load_markov_file(dir.file("short.txt", "start 0\nstate 0 1/2 0\n")),
        ap::ParseError);
}

TEST_CASE("premeasure table files") {
    TempDir dir;
    auto path = dir.file("t.txt",
                         "extension atom\n"
                         "- 1/1\n"
                         "0 1/3\n"
                         "1 2/3\n");
    auto table = io::load_table_file(path);
    REQUIRE(table.depth == 1);
    REQUIRE(table.extension == ap::PremeasureTable::Extension::Atom);
    auto mu = ap::ComputableMeasure::table(table);
    REQUIRE(mu.cylinder(BitString("00")) == Rat(1, 3));  // atom extension
    REQUIRE_FALSE(mu.is_continuous());

    REQUIRE_THROWS_AS(io::load_table_file(dir.file("dup.txt", "- 1\n- 1\n")),
                      ap::ParseError);
    REQUIRE_THROWS_AS(io::load_table_file(dir.file("ext.txt", "extension spiky\n- 1\n")),
                      ap::ParseError);
    // Additivity failures surface as parse errors naming the file.
    std::string msg = message_of(
        [&] { io::load_table_file(dir.file("add.txt", "- 1\n0 1/2\n1 1/3\n")); });
    REQUIRE(msg.find("add.txt") != std::string::npos);
}

TEST_CASE("measure specifications resolve relative files") {
    TempDir dir;
    dir.file("chain.txt", "start 0\nstate 0 2/5 0 0\n");
    auto uniform = io::load_measure_spec("uniform");
    REQUIRE(uniform.cylinder(BitString("01")) == Rat(1, 4));
    auto bern = io::load_measure_spec("bernoulli 1/3");
    REQUIRE(bern.next_bit_one_prob(BitString("")) == Rat(1, 3));
    auto markov = io::load_measure_spec("markov chain.txt", dir.path);
    REQUIRE(markov.next_bit_one_prob(BitString("101")) == Rat(2, 5));

    REQUIRE_THROWS_AS(io::load_measure_spec(""), ap::ParseError);
    REQUIRE_THROWS_AS(io::load_measure_spec("gaussian"), ap::ParseError);
    REQUIRE_THROWS_AS(io::load_measure_spec("bernoulli"), ap::ParseError);
    REQUIRE_THROWS_AS(io::load_measure_spec("bernoulli 5/4"), ap::DomainError);
}

TEST_CASE("semimeasure approximant files") {
    TempDir dir;
    auto table_path = dir.file("ramp.txt",
                               "table halving\n"
                               "- 0 3/4\n"
                               "0 0 1/4\n"
                               "0 1 1/2\n"
                               "1 0 1/4\n"
                               "00 0 1/4\n"
                               "01 1 1/4\n"
                               "10 0 1/8\n"
                               "11 0 1/8\n");
    auto f = io::load_semimeasure_approx(table_path);
    REQUIRE(f.at(BitString(""), 5) == Rat(3, 4));
    REQUIRE(f.at(BitString("0"), 0) == Rat(1, 4));
    REQUIRE(f.at(BitString("0"), 1) == Rat(1, 2));
    REQUIRE(f.at(BitString("011"), 9) == Rat(1, 8));  // halving below the table

    dir.file("m.txt", "0 1\n01 10\n");
    auto g = io::load_semimeasure_approx(
        dir.file("viam.txt", "machine m.txt via uniform\n"), dir.path);
    REQUIRE(g.at(BitString(""), 2) == Rat(3, 4));
    REQUIRE(*g.exact_limit(BitString("10")) == Rat(1, 4));

    REQUIRE_THROWS_AS(io::load_semimeasure_approx(dir.file("empty.txt", "\n")),
                      ap::ParseError);
    REQUIRE_THROWS_AS(
        io::load_semimeasure_approx(dir.file("h.txt", "machine m.txt via uniform\n- 0 1\n"),
                                    dir.path),
        ap::ParseError);
    REQUIRE_THROWS_AS(io::load_semimeasure_approx(dir.file("hdr.txt", "rows\n- 0 1\n")),
                      ap::ParseError);
    REQUIRE_THROWS_AS(io::load_semimeasure_approx(dir.file("row.txt", "table\n- 1\n")),
                      ap::ParseError);
    // Values decreasing in t fail the table contract.
    REQUIRE_THROWS_AS(
        io::load_semimeasure_approx(dir.file("dec.txt", "table\n- 0 1/2\n- 1 1/4\n")),
        ap::ParseError);
}

TEST_CASE("discrete approximant files") {
    TempDir dir;
    auto f = io::load_discrete_approx(dir.file("d.txt", "table\n0 0 1/2\n10 0 1/4\n"));
    REQUIRE(f.at(BitString("0"), 0) == Rat(1, 2));
    REQUIRE(f.at(BitString("11"), 3) == Rat(0));

    REQUIRE_THROWS_AS(
        io::load_discrete_approx(dir.file("h.txt", "table halving\n0 0 1/2\n")),
        ap::ParseError);

    dir.file("pm.txt", "00 1\n01 11\n");
    auto g = io::load_discrete_approx(
        dir.file("viapm.txt", "machine pm.txt via bernoulli 1/3\n"), dir.path);
    REQUIRE(g.at(BitString("1"), 2) == Rat(2, 3) * Rat(2, 3));
    REQUIRE(g.at(BitString("11"), 2) == Rat(2, 3) * Rat(1, 3));
}

TEST_CASE("weight function files") {
    TempDir dir;
    auto w = io::load_weight_function(
        dir.file("w.txt", "0 5/8\n1 1/16\ngeometric 1 5/4\n"));
    REQUIRE(w.at(0) == Rat(5, 8));
    REQUIRE(w.at(1) == Rat(1, 16));
    REQUIRE(w.at(2) == Rat(5, 4) * ap::pow2(-3));
    REQUIRE(w.total() == Rat(1));

    auto fin = io::load_weight_function(dir.file("f.txt", "0 1/2\n1 1/3\nfinite\n"));
    REQUIRE(fin.at(2) == Rat(0));
    REQUIRE(fin.total() == Rat(5, 6));

    auto plain = io::load_weight_function(dir.file("g.txt", "geometric 2\n"));
    REQUIRE(plain.at(0) == Rat(1, 4));

    auto out = (dir.path / "w2.txt").string();
    io::write_weight_function(out, w);
    auto w2 = io::load_weight_function(out);
    for (std::size_t i = 0; i < 8; ++i) REQUIRE(w2.at(i) == w.at(i));
    REQUIRE(w2.total() == w.total());

    REQUIRE_THROWS_AS(io::load_weight_function(dir.file("e1.txt", "0 1/2\n")),
                      ap::ParseError);  // no tail descriptor
    REQUIRE_THROWS_AS(
        io::load_weight_function(dir.file("e2.txt", "finite\n0 1/2\n")),
        ap::ParseError);  // finite must be last
    REQUIRE_THROWS_AS(
        io::load_weight_function(dir.file("e3.txt", "geometric 1\n0 1/2\nfinite\n")),
        ap::ParseError);  // head after tail
    REQUIRE_THROWS_AS(
        io::load_weight_function(dir.file("e4.txt", "0 1/2\n2 1/4\nfinite\n")),
        ap::ParseError);  // index gap
    REQUIRE_THROWS_AS(
        io::load_weight_function(dir.file("e5.txt", "0 1/2\n0 1/4\nfinite\n")),
        ap::ParseError);  // duplicate index
}

TEST_CASE("enumeration directories") {
    TempDir dir;
    auto sub = dir.path / "en";
    std::filesystem::create_directories(sub);
    auto put = [&](const std::string& name, const std::string& content) {
        std::ofstream out(sub / name);
        out << content;
    };
    put("a.txt", "0 1\n01 10\n");
    put("b.txt", "- 0\n");
    put("c.txt", "1 11\n");

    auto loaded = io::load_enumeration_dir<ap::MonotoneMachine>(sub.string());
    REQUIRE(loaded.names == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(loaded.machines->size() == std::optional<std::size_t>(3));
    REQUIRE(loaded.machines->machine(1).pair_at(0)->output == BitString("0"));
    REQUIRE(loaded.encoding.code(2) == BitString("110"));  // default family

    put("encoding.txt", "00\n01\n1\n");
    auto coded = io::load_enumeration_dir<ap::MonotoneMachine>(sub.string());
    REQUIRE(coded.encoding.code(2) == BitString("1"));
    REQUIRE(coded.encoding.size() == std::optional<std::size_t>(3));

    put("encoding.txt", "00\n01\n");
    REQUIRE_THROWS_AS(io::load_enumeration_dir<ap::MonotoneMachine>(sub.string()),
                      ap::ParseError);  // fewer codes than machines
    put("encoding.txt", "0\n01\n1\n");
    REQUIRE_THROWS_AS(io::load_enumeration_dir<ap::MonotoneMachine>(sub.string()),
                      ap::ParseError);  // not prefix-free

    auto other = dir.path / "empty";
    std::filesystem::create_directories(other);
    REQUIRE_THROWS_AS(io::load_enumeration_dir<ap::MonotoneMachine>(other.string()),
                      ap::ParseError);
    REQUIRE_THROWS_AS(
        io::load_enumeration_dir<ap::MonotoneMachine>((dir.path / "nodir").string()),
        ap::ParseError);
}

TEST_CASE("sigma lists") {
    auto all2 = io::parse_sigma_list("upto:2");
    REQUIRE(all2.size() == 7);
    REQUIRE(all2[0] == BitString(""));
    REQUIRE(all2[6] == BitString("11"));
    REQUIRE(all2 == testsupport::strings_upto(2));

    auto some = io::parse_sigma_list("-,0,11");
    REQUIRE(some == std::vector<BitString>{BitString(""), BitString("0"), BitString("11")});

    REQUIRE_THROWS_AS(io::parse_sigma_list(""), ap::ParseError);
    REQUIRE_THROWS_AS(io::parse_sigma_list("012"), ap::ParseError);
}
