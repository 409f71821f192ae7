#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ap/bitstring.hpp"
#include "ap/encoding.hpp"
#include "ap/enumeration.hpp"
#include "ap/errors.hpp"
#include "ap/machine.hpp"
#include "ap/measure.hpp"
#include "ap/mixtures.hpp"
#include "ap/rational.hpp"
#include "ap/semimeasure.hpp"

namespace ap {
namespace io {

namespace detail {

struct Line {
    std::size_t number = 0;
    std::vector<std::string> tokens;
};

// Reads a text file into tokenized lines; '#' starts a comment, blank lines
// are dropped, line numbers are preserved for diagnostics.
inline std::vector<Line> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::vector<Line> out;
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream ss(raw);
        Line line;
        line.number = number;
        std::string tok;
        while (ss >> tok) line.tokens.push_back(tok);
        if (!line.tokens.empty()) out.push_back(std::move(line));
    }
    return out;
}

inline std::string resolve(const std::string& name, const std::filesystem::path& base) {
    std::filesystem::path p(name);
    if (p.is_absolute()) return p.string();
    return (base / p).string();
}

}  // namespace detail

struct NumberedPair {
    std::size_t line = 0;
    MachinePair pair;
};

inline std::vector<NumberedPair> load_machine_pairs(const std::string& path) {
    std::vector<NumberedPair> out;
    for (const auto& line : detail::read_lines(path)) {
        if (line.tokens.size() != 2)
            throw ParseError(path, line.number,
                             "expected 'description output' (use - for the empty string)");
        MachinePair p{BitString::parse(line.tokens[0], path, line.number),
                      BitString::parse(line.tokens[1], path, line.number)};
        out.push_back({line.number, std::move(p)});
    }
    return out;
}

namespace detail {

inline std::size_t line_of(const std::vector<NumberedPair>& pairs, const MachinePair& p) {
    for (const auto& np : pairs)
        if (np.pair == p) return np.line;
    return 0;
}

}  // namespace detail

// Loads and checks a monotone machine; contract violations are reported with
// the line numbers of a witnessing pair of entries.
inline MonotoneMachine load_monotone_machine(const std::string& path) {
    auto numbered = load_machine_pairs(path);
    std::vector<MachinePair> pairs;
    pairs.reserve(numbered.size());
    for (const auto& np : numbered) pairs.push_back(np.pair);
    auto m = MonotoneMachine::from_pairs(std::move(pairs));
    auto report = check_monotone_consistency(m, numbered.size());
    if (!report.ok) {
        std::size_t l1 = detail::line_of(numbered, report.witness->first);
        std::size_t l2 = detail::line_of(numbered, report.witness->second);
        throw ParseError(path, std::max(l1, l2),
                         "not a monotone machine: " + report.message() + " (lines " +
                             std::to_string(l1) + " and " + std::to_string(l2) + ")");
    }
    return m;
}

inline PrefixFreeMachine load_prefix_machine(const std::string& path) {
    auto numbered = load_machine_pairs(path);
    std::vector<MachinePair> pairs;
    pairs.reserve(numbered.size());
    for (const auto& np : numbered) pairs.push_back(np.pair);
    auto m = PrefixFreeMachine::from_pairs(std::move(pairs));
    auto report = check_prefix_free(m, numbered.size());
    if (!report.ok) {
        std::size_t l1 = detail::line_of(numbered, report.witness->first);
        std::size_t l2 = detail::line_of(numbered, report.witness->second);
        throw ParseError(path, std::max(l1, l2),
                         "not a prefix-free machine: " + report.message() + " (lines " +
                             std::to_string(l1) + " and " + std::to_string(l2) + ")");
    }
    return m;
}

template <class MachineT>
void write_machine_file(const std::string& path, const MachineT& m) {
    auto sz = m.size();
    if (!sz) throw DomainError("cannot write an unbounded machine to a file");
    std::ofstream out(path);
    if (!out) throw DomainError("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < *sz; ++i) {
        const MachinePair* p = m.pair_at(i);
        out << p->description.display() << ' ' << p->output.display() << '\n';
    }
}

inline MarkovChain load_markov_file(const std::string& path) {
    MarkovChain chain;
    std::map<std::size_t, MarkovChain::State> states;
    bool saw_start = false;
    for (const auto& line : detail::read_lines(path)) {
        const auto& t = line.tokens;
        if (t[0] == "start") {
            if (t.size() != 2 || saw_start)
                throw ParseError(path, line.number, "expected a single 'start <state>' line");
            chain.start = std::stoul(t[1]);
            saw_start = true;
        } else if (t[0] == "state") {
            if (t.size() != 5)
                throw ParseError(path, line.number,
                                 "expected 'state <index> <p1> <next0> <next1>'");
            std::size_t idx = std::stoul(t[1]);
            if (states.count(idx))
                throw ParseError(path, line.number,
                                 "state " + t[1] + " defined twice");
            states[idx] = {parse_rat(t[2], path, line.number), std::stoul(t[3]),
                           std::stoul(t[4])};
        } else {
            throw ParseError(path, line.number, "unknown directive '" + t[0] + "'");
        }
    }
    for (std::size_t i = 0; i < states.size(); ++i)
        if (!states.count(i))
            throw ParseError(path, 0, "state indices must be 0.." +
                                          std::to_string(states.size() - 1) +
                                          " with no gaps");
    for (auto& [idx, st] : states) chain.states.push_back(st);
    chain.validate();
    return chain;
}

// Premeasure tables are `sigma num/den` rows covering the complete tree down
// to the deepest listed string; an optional `extension uniform|atom` line
// picks the behaviour below the cutoff.
inline PremeasureTable load_table_file(const std::string& path) {
    PremeasureTable table;
    bool saw_extension = false;
    for (const auto& line : detail::read_lines(path)) {
        const auto& t = line.tokens;
        if (t[0] == "extension") {
            if (t.size() != 2 || saw_extension)
                throw ParseError(path, line.number,
                                 "expected a single 'extension uniform|atom' line");
            if (t[1] == "uniform")
                table.extension = PremeasureTable::Extension::Uniform;
            else if (t[1] == "atom")
                table.extension = PremeasureTable::Extension::Atom;
            else
                throw ParseError(path, line.number, "unknown extension '" + t[1] + "'");
            saw_extension = true;
            continue;
        }
        if (t.size() != 2)
            throw ParseError(path, line.number, "expected 'sigma num/den'");
        BitString sigma = BitString::parse(t[0], path, line.number);
        if (table.values.count(sigma))
            throw ParseError(path, line.number,
                             "value for '" + sigma.display() + "' given twice");
        table.values[sigma] = parse_rat(t[1], path, line.number);
        table.depth = std::max(table.depth, sigma.length());
    }
    try {
        table.validate();
    } catch (const DomainError& e) {
        throw ParseError(path, 0, e.what());
    }
    return table;
}

// Measure specifications: `uniform`, `bernoulli <num>/<den>`,
// `markov <file>`, `table <file>`. File names resolve against base_dir.
inline ComputableMeasure load_measure_spec(const std::string& spec,
                                           const std::filesystem::path& base_dir = ".") {
    std::istringstream ss(spec);
    std::vector<std::string> t;
    std::string tok;
    while (ss >> tok) t.push_back(tok);
    if (t.empty()) throw ParseError("<measure>", 0, "empty measure specification");
    if (t[0] == "uniform" && t.size() == 1) return ComputableMeasure::uniform();
    if (t[0] == "bernoulli" && t.size() == 2)
        return ComputableMeasure::bernoulli(parse_rat(t[1], "<measure>", 0));
    if (t[0] == "markov" && t.size() == 2)
        return ComputableMeasure::markov(load_markov_file(detail::resolve(t[1], base_dir)));
    if (t[0] == "table" && t.size() == 2)
        return ComputableMeasure::table(load_table_file(detail::resolve(t[1], base_dir)));
    throw ParseError("<measure>", 0,
                     "bad measure specification '" + spec +
                         "' (want: uniform | bernoulli n/d | markov file | table file)");
}

namespace detail {

inline ApproxTable load_approx_rows(const std::string& path,
                                    const std::vector<Line>& lines, std::size_t first) {
    ApproxTable table;
    for (std::size_t k = first; k < lines.size(); ++k) {
        const auto& line = lines[k];
        if (line.tokens.size() != 3)
            throw ParseError(path, line.number, "expected 'sigma t num/den'");
        BitString sigma = BitString::parse(line.tokens[0], path, line.number);
        std::uint64_t t = std::stoull(line.tokens[1]);
        Rat v = parse_rat(line.tokens[2], path, line.number);
        table.rows[sigma].emplace_back(t, v);
    }
    try {
        table.validate();
    } catch (const DomainError& e) {
        throw ParseError(path, 0, e.what());
    }
    return table;
}

struct ApproxHeader {
    bool is_table = false;
    ApproxTable::Extension extension = ApproxTable::Extension::Zero;
    std::string machine_file;
    std::string measure_spec;
};

inline ApproxHeader parse_approx_header(const std::string& path, const Line& line) {
    ApproxHeader h;
    const auto& t = line.tokens;
    if (t[0] == "table") {
        h.is_table = true;
        if (t.size() == 1) return h;
        if (t.size() == 2 && t[1] == "zero") return h;
        if (t.size() == 2 && t[1] == "halving") {
            h.extension = ApproxTable::Extension::Halving;
            return h;
        }
        throw ParseError(path, line.number, "expected 'table [zero|halving]'");
    }
    if (t[0] == "machine") {
        auto via = std::find(t.begin(), t.end(), std::string("via"));
        if (t.size() < 4 || via != t.begin() + 2)
            throw ParseError(path, line.number, "expected 'machine <file> via <measure>'");
        h.machine_file = t[1];
        for (std::size_t k = 3; k < t.size(); ++k) {
            if (k > 3) h.measure_spec += ' ';
            h.measure_spec += t[k];
        }
        return h;
    }
    throw ParseError(path, line.number,
                     "approximant files start with 'table' or 'machine <file> via <measure>'");
}

}  // namespace detail

// Approximant files: a `table [zero|halving]` header followed by
// `sigma t num/den` rows, or a single `machine <file> via <measure>` line
// naming the transformation to approximate stage by stage.
inline SemimeasureApprox load_semimeasure_approx(
    const std::string& path, const std::filesystem::path& base_dir = ".") {
    auto lines = detail::read_lines(path);
    if (lines.empty()) throw ParseError(path, 0, "empty approximant file");
    auto h = detail::parse_approx_header(path, lines[0]);
    if (h.is_table) {
        auto table = detail::load_approx_rows(path, lines, 1);
        table.extension = h.extension;
        return SemimeasureApprox::from_table(std::move(table));
    }
    if (lines.size() > 1)
        throw ParseError(path, lines[1].number, "machine approximants are a single line");
    auto m = load_monotone_machine(detail::resolve(h.machine_file, base_dir));
    auto mu = load_measure_spec(h.measure_spec, base_dir);
    return SemimeasureApprox::from_machine_transform(mu, m);
}

inline DiscreteApprox load_discrete_approx(const std::string& path,
                                           const std::filesystem::path& base_dir = ".") {
    auto lines = detail::read_lines(path);
    if (lines.empty()) throw ParseError(path, 0, "empty approximant file");
    auto h = detail::parse_approx_header(path, lines[0]);
    if (h.is_table) {
        if (h.extension != ApproxTable::Extension::Zero)
            throw ParseError(path, lines[0].number,
                             "discrete approximants use the zero extension");
        return DiscreteApprox::from_table(detail::load_approx_rows(path, lines, 1));
    }
    if (lines.size() > 1)
        throw ParseError(path, lines[1].number, "machine approximants are a single line");
    auto m = load_prefix_machine(detail::resolve(h.machine_file, base_dir));
    auto mu = load_measure_spec(h.measure_spec, base_dir);
    return DiscreteApprox::from_prefix_transform(mu, m);
}

// Weight files: `i num/den` head rows (indices 0..n-1, each exactly once)
// closed by a tail descriptor line, `finite` or `geometric <c>`; rewrites
// can produce several tail terms, written as repeated `geometric <c> <coef>`
// lines with explicit coefficients.
inline WeightFunction load_weight_function(const std::string& path) {
    auto lines = detail::read_lines(path);
    std::map<std::size_t, Rat> head_rows;
    std::vector<WeightFunction::TailTerm> tail;
    bool finite_seen = false;
    for (const auto& line : lines) {
        const auto& t = line.tokens;
        if (finite_seen)
            throw ParseError(path, line.number, "'finite' must be the last line");
        if (t[0] == "finite") {
            if (t.size() != 1 || !tail.empty())
                throw ParseError(path, line.number, "bad tail descriptor");
            finite_seen = true;
        } else if (t[0] == "geometric") {
            if (t.size() != 2 && t.size() != 3)
                throw ParseError(path, line.number,
                                 "expected 'geometric <c>' or 'geometric <c> <coef>'");
            Rat coef = t.size() == 3 ? parse_rat(t[2], path, line.number) : Rat(1);
            tail.emplace_back(std::move(coef), std::stol(t[1]));
        } else {
            if (!tail.empty())
                throw ParseError(path, line.number, "head rows must precede the tail");
            if (t.size() != 2) throw ParseError(path, line.number, "expected 'i num/den'");
            std::size_t i = std::stoul(t[0]);
            if (head_rows.count(i))
                throw ParseError(path, line.number, "weight " + t[0] + " given twice");
            head_rows[i] = parse_rat(t[1], path, line.number);
        }
    }
    if (!finite_seen && tail.empty())
        throw ParseError(path, 0, "missing tail descriptor (finite | geometric c)");
    std::vector<Rat> head;
    for (std::size_t i = 0; i < head_rows.size(); ++i) {
        auto it = head_rows.find(i);
        if (it == head_rows.end())
            throw ParseError(path, 0, "head indices must be 0.." +
                                          std::to_string(head_rows.size() - 1) +
                                          " with no gaps");
        head.push_back(it->second);
    }
    try {
        if (tail.empty()) return WeightFunction::finite(std::move(head));
        return WeightFunction::with_tail(std::move(head), std::move(tail));
    } catch (const DomainError& e) {
        throw ParseError(path, 0, e.what());
    }
}

inline void write_weight_function(const std::string& path, const WeightFunction& w) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < w.head_size(); ++i)
        out << i << ' ' << format_rat(w.at(i)) << '\n';
    if (w.tail().empty()) {
        out << "finite\n";
    } else {
        for (const auto& [coef, shift] : w.tail())
            out << "geometric " << shift << ' ' << format_rat(coef) << '\n';
    }
}

// An enumeration directory holds one machine file per index, *.txt sorted by
// file name, plus an optional encoding.txt of explicit code words (absent
// means the 1^e 0 family).
template <class MachineT>
struct LoadedEnumeration {
    Encoding encoding;
    std::shared_ptr<const MachineEnumeration<MachineT>> machines;
    std::vector<std::string> names;
};

namespace detail {

inline MonotoneMachine load_kind(const std::string& path, MonotoneMachine*) {
    return load_monotone_machine(path);
}
inline PrefixFreeMachine load_kind(const std::string& path, PrefixFreeMachine*) {
    return load_prefix_machine(path);
}

}  // namespace detail

template <class MachineT>
LoadedEnumeration<MachineT> load_enumeration_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw ParseError(dir, 0, "enumeration path is not a directory");
    std::vector<fs::path> files;
    std::optional<fs::path> encoding_file;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        if (entry.path().filename() == "encoding.txt")
            encoding_file = entry.path();
        else
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ParseError(dir, 0, "enumeration directory has no machines");

    LoadedEnumeration<MachineT> out;
    auto en = MachineEnumeration<MachineT>::make_registry();
    for (const auto& f : files) {
        std::string name = f.stem().string();
        en->register_machine(name, detail::load_kind(f.string(), (MachineT*)nullptr));
        out.names.push_back(name);
    }
    en->freeze();
    out.machines = en;

    if (encoding_file) {
        std::vector<BitString> codes;
        for (const auto& line : detail::read_lines(encoding_file->string())) {
            if (line.tokens.size() != 1)
                throw ParseError(encoding_file->string(), line.number,
                                 "expected one code word per line");
            codes.push_back(
                BitString::parse(line.tokens[0], encoding_file->string(), line.number));
        }
        if (codes.size() < files.size())
            throw ParseError(encoding_file->string(), 0,
                             "fewer code words than machines");
        try {
            out.encoding = Encoding::from_codes(std::move(codes));
        } catch (const DomainError& e) {
            throw ParseError(encoding_file->string(), 0, e.what());
        }
    } else {
        out.encoding = Encoding::ones_zero();
    }
    return out;
}

// Sigma lists: comma-separated bit strings ('-' for the empty string), or
// `upto:N` for every string of length at most N in shortlex order.
inline std::vector<BitString> parse_sigma_list(const std::string& text) {
    if (text.rfind("upto:", 0) == 0) {
        std::size_t n = std::stoul(text.substr(5));
        std::vector<BitString> out;
        std::size_t count = (std::size_t(2) << n) - 1;
        for (std::size_t k = 0; k < count; ++k)
            out.push_back(BitString::from_shortlex_index(k));
        return out;
    }
    std::vector<BitString> out;
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(BitString::parse(item, "<sigmas>", 0));
    if (out.empty()) throw ParseError("<sigmas>", 0, "empty sigma list");
    return out;
}

}  // namespace io
}  // namespace ap
