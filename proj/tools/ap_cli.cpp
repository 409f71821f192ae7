#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ap/ap.hpp"
#include "json.hpp"

namespace {

using ap::Rat;
using nlohmann::ordered_json;

// Relative output paths land in AP_OUTPUT_DIR when it is set; parent
// directories are created on demand.
std::string resolve_out(const std::string& path) {
    std::filesystem::path p(path);
    const char* env = std::getenv("AP_OUTPUT_DIR");
    if (!p.is_absolute() && env && *env) p = std::filesystem::path(env) / p;
    auto parent = p.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    return p.string();
}

std::ofstream open_out(const std::string& path) {
    std::string resolved = resolve_out(path);
    std::ofstream out(resolved);
    if (!out) throw ap::DomainError("cannot open '" + resolved + "' for writing");
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void emit(std::ostream& out, const Table& t, const std::string& format) {
    if (format == "json") {
        ordered_json arr = ordered_json::array();
        for (const auto& row : t.rows) {
            ordered_json obj;
            for (std::size_t i = 0; i < t.header.size(); ++i) obj[t.header[i]] = row[i];
            arr.push_back(std::move(obj));
        }
        out << arr.dump(2) << '\n';
        return;
    }
    const char sep = format == "csv" ? ',' : '\t';
    for (std::size_t i = 0; i < t.header.size(); ++i)
        out << (i ? std::string(1, sep) : "") << t.header[i];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? std::string(1, sep) : "") << row[i];
        out << '\n';
    }
}

void emit_table(const std::string& out_path, const Table& t, const std::string& format) {
    if (out_path.empty()) {
        emit(std::cout, t, format);
    } else {
        auto out = open_out(out_path);
        emit(out, t, format);
    }
}

std::string bool_str(bool b) { return b ? "1" : "0"; }

// --- validate ---------------------------------------------------------

struct ValidateArgs {
    std::string machine_file, kind = "monotone";
    std::string measure_spec;
    std::string weights_file;
    std::string approx_file, approx_kind = "continuous";
    std::size_t depth = 3;
    std::uint64_t t_max = 8;
};

int run_validate_machine(const ValidateArgs& a) {
    if (a.kind == "monotone") {
        auto m = ap::io::load_monotone_machine(a.machine_file);
        std::cout << "ok: monotone machine, " << *m.size() << " pairs\n";
    } else {
        auto m = ap::io::load_prefix_machine(a.machine_file);
        std::cout << "ok: prefix-free machine, " << *m.size() << " pairs\n";
    }
    return 0;
}

int run_validate_measure(const ValidateArgs& a) {
    auto mu = ap::io::load_measure_spec(a.measure_spec);
    mu.check_additivity(a.depth);
    std::cout << "ok: " << mu.describe() << ", additive to depth " << a.depth
              << (mu.is_continuous() ? ", certified nonatomic" : "") << '\n';
    return 0;
}

int run_validate_weights(const ValidateArgs& a) {
    auto w = ap::io::load_weight_function(a.weights_file);
    std::cout << "ok: total " << ap::format_rat(w.total())
              << (w.is_proper() ? " (proper)" : "") << '\n';
    return 0;
}

int run_validate_approx(const ValidateArgs& a) {
    if (a.approx_kind == "continuous") {
        auto f = ap::io::load_semimeasure_approx(a.approx_file);
        ap::check_stagewise_semimeasure(f, a.depth, a.t_max);
    } else {
        auto p = ap::io::load_discrete_approx(a.approx_file);
        std::vector<ap::BitString> support;
        for (std::size_t k = 0; k < (std::size_t(2) << a.depth) - 1; ++k)
            support.push_back(ap::BitString::from_shortlex_index(k));
        ap::check_stagewise_discrete(p, support, a.t_max);
    }
    std::cout << "ok: stagewise valid to depth " << a.depth << ", stages 0.." << a.t_max
              << '\n';
    return 0;
}

// --- transform --------------------------------------------------------

struct TransformArgs {
    std::string measure, machine_file, sigmas, out, format = "tsv";
    std::size_t stage = 0;
    bool discrete = false;
    std::uint64_t mc = 0;
    std::uint64_t seed = 1;
    std::size_t depth = 0;
    unsigned workers = 1;
};

int run_transform(const TransformArgs& a) {
    auto mu = ap::io::load_measure_spec(a.measure);
    auto sigmas = ap::io::parse_sigma_list(a.sigmas);

    if (a.mc > 0) {
        if (a.discrete)
            throw ap::DomainError("Monte Carlo sampling covers monotone transforms only");
        auto m = ap::io::load_monotone_machine(a.machine_file);
        std::size_t stage = a.stage ? a.stage : m.full_stage();
        std::size_t depth = a.depth;
        if (depth == 0)
            m.visit_stage(stage, [&](const ap::MachinePair& p) {
                depth = std::max(depth, p.description.length());
            });
        ap::SampleOptions opts;
        opts.stage = stage;
        opts.workers = a.workers;
        Table t;
        t.header = {"sigma", "estimate", "stderr", "hits", "n", "seed"};
        for (const auto& sigma : sigmas) {
            auto est = ap::sample_transform(mu, m, sigma, a.mc, depth, a.seed, opts);
            t.rows.push_back({sigma.display(), ap::format_rat(est.estimate),
                              ap::format_rat(est.stderr_bound), std::to_string(est.hits),
                              std::to_string(est.n), std::to_string(a.seed)});
        }
        emit_table(a.out, t, a.format);
        return 0;
    }

    Table t;
    t.header = {"sigma", "value", "exact", "stage"};
    if (a.discrete) {
        auto m = ap::io::load_prefix_machine(a.machine_file);
        std::size_t stage = a.stage ? a.stage : m.full_stage();
        for (const auto& sigma : sigmas) {
            auto v = ap::discrete_transform_at_stage(mu, m, sigma, stage);
            t.rows.push_back({sigma.display(), ap::format_rat(v.value), bool_str(v.exact),
                              std::to_string(v.stage)});
        }
    } else {
        auto m = ap::io::load_monotone_machine(a.machine_file);
        std::size_t stage = a.stage ? a.stage : m.full_stage();
        for (const auto& sigma : sigmas) {
            auto v = ap::transform_at_stage(mu, m, sigma, stage);
            t.rows.push_back({sigma.display(), ap::format_rat(v.value), bool_str(v.exact),
                              std::to_string(v.stage)});
        }
    }
    emit_table(a.out, t, a.format);
    return 0;
}

// --- construct --------------------------------------------------------

struct ConstructArgs {
    std::string measure, target, out, transcript;
    std::uint64_t stages = 0;
    std::size_t length_factor = 1;
    std::string universal_file;  // nonuniversal mode only
    std::size_t enum_budget = std::size_t(1) << 20;
    std::size_t expansion_cap = std::size_t(1) << 16;
};

void write_transcript(const std::string& path, const ap::Transcript& tr) {
    if (path.empty()) return;
    auto out = open_out(path);
    out << tr.text();
}

int run_construct(const std::string& mode, const ConstructArgs& a) {
    auto mu = ap::io::load_measure_spec(a.measure);
    if (mode == "discrete") {
        auto target = ap::io::load_discrete_approx(a.target);
        ap::BuildOptions opts;
        opts.stages = a.stages;
        auto res = ap::build_machine_discrete(mu, target, opts);
        ap::io::write_machine_file(resolve_out(a.out), res.machine);
        write_transcript(a.transcript, res.transcript);
        std::cout << "built prefix-free machine: " << res.state.pairs().size()
                  << " pairs, " << res.state.stages_run() << " stages, used mass "
                  << ap::format_rat(res.state.used_mass()) << '\n';
        return 0;
    }
    auto target = ap::io::load_semimeasure_approx(a.target);
    if (mode == "continuous") {
        ap::BuildOptions opts;
        opts.stages = a.stages;
        if (a.length_factor > 1) opts.lengths = ap::LengthSchedule::linear(a.length_factor);
        auto res = ap::build_machine_continuous(mu, target, opts);
        ap::check_build_invariants(res.state, mu);
        ap::io::write_machine_file(resolve_out(a.out), res.machine);
        write_transcript(a.transcript, res.transcript);
        std::cout << "built monotone machine: " << res.state.pairs().size() << " pairs, "
                  << res.state.stages_run() << " stages\n";
        return 0;
    }
    // nonuniversal
    auto u = ap::io::load_monotone_machine(a.universal_file);
    ap::NonuniversalOptions opts;
    opts.stages = a.stages;
    opts.enum_budget = a.enum_budget;
    opts.expansion_cap = a.expansion_cap;
    auto res = ap::build_machine_nonuniversal(mu, target, u, opts);
    ap::check_build_invariants(res.state, mu);
    ap::io::write_machine_file(resolve_out(a.out), res.machine);
    write_transcript(a.transcript, res.transcript);
    std::cout << "built monotone machine: " << res.state.pairs().size() << " pairs, "
              << res.state.stages_run() << " stages\n";
    for (const auto& [sigma, rho] : res.u_witness)
        std::cout << "witness " << sigma.display() << " <- " << rho.display() << " ("
                  << rho.length() << " bits)\n";
    return 0;
}

// --- mixture ----------------------------------------------------------

struct MixtureArgs {
    std::string universal_dir, measure, weights, sigmas, out, format = "tsv";
    std::size_t count = 0;
    std::size_t truncation = 0;
    std::uint64_t stage = 0;
    std::string q, u_file, kappa, nu;
    long c = 0;
    std::size_t k = 0, l = 0;
};

ap::SemimeasureFamily make_family(const MixtureArgs& a, const ap::ComputableMeasure& mu) {
    auto loaded = ap::io::load_enumeration_dir<ap::MonotoneMachine>(a.universal_dir);
    std::size_t count = a.count ? a.count : loaded.machines->registered_count();
    return ap::SemimeasureFamily::from_enumeration(*loaded.machines, mu, count);
}

int run_mixture_eval(const MixtureArgs& a) {
    auto mu = ap::io::load_measure_spec(a.measure);
    auto family = make_family(a, mu);
    auto w = ap::io::load_weight_function(a.weights);
    auto sigmas = ap::io::parse_sigma_list(a.sigmas);
    Table t;
    t.header = {"sigma", "lower", "tail_weight", "upper"};
    for (const auto& sigma : sigmas) {
        auto v = ap::mixture_eval(w, family, sigma, a.truncation, a.stage);
        t.rows.push_back({sigma.display(), ap::format_rat(v.lower),
                          ap::format_rat(v.tail_weight), ap::format_rat(v.upper)});
    }
    emit_table(a.out, t, a.format);
    return 0;
}

int run_mixture_rewrite_proper(const MixtureArgs& a) {
    auto mu = ap::io::load_measure_spec(a.measure);
    auto family = make_family(a, mu);
    auto w1 = ap::io::load_weight_function(a.weights);
    Rat q = ap::parse_rat(a.q, "<q>", 0);
    auto res = ap::proper_weight_rewrite(family, w1, q, a.c, a.k, a.l, a.truncation,
                                         a.stage);
    ap::io::write_weight_function(resolve_out(a.out), res.weights);
    std::cout << "rewrote weights: total " << ap::format_rat(res.weights.total())
              << ", absorber at index " << res.pi_index
              << (res.pi_exact ? " (exact)" : " (truncated support)")
              << ", certified root bound " << ap::format_rat(res.certified_root_upper)
              << " < q=" << ap::format_rat(q) << '\n';
    return 0;
}

int run_mixture_rewrite_universal(const MixtureArgs& a) {
    auto mu = ap::io::load_measure_spec(a.measure);
    auto family = make_family(a, mu);
    auto w = ap::io::load_weight_function(a.weights);
    auto u = ap::io::load_weight_function(a.u_file);
    ap::register_u_mixture(family, a.k, u, a.truncation);
    auto w_bar = ap::universal_weight_rewrite(family, w, a.k, u);
    ap::io::write_weight_function(resolve_out(a.out), w_bar);
    std::cout << "rewrote weights: total " << ap::format_rat(w.total()) << " -> "
              << ap::format_rat(w_bar.total()) << " (decrease "
              << ap::format_rat(Rat(w.total() - w_bar.total())) << ")\n";
    return 0;
}

int run_mixture_dominance(const MixtureArgs& a) {
    auto kappa = ap::io::load_semimeasure_approx(a.kappa);
    auto nu = ap::io::load_semimeasure_approx(a.nu);
    auto sigmas = ap::io::parse_sigma_list(a.sigmas);
    auto rep = ap::dominance_check(kappa, nu, sigmas, a.stage);
    if (!rep.dominated()) {
        std::cout << "counterexample at '" << rep.counterexample->display()
                  << "' over " << rep.cells << " cells (stage " << a.stage << ")\n";
        return 1;
    }
    std::cout << "dominates with constant " << *rep.constant << " over " << rep.cells
              << " cells (stage " << a.stage << ", empirical)\n";
    return 0;
}

// --- universal --------------------------------------------------------

struct UniversalArgs {
    std::string enum_dir, kind = "monotone", out, measure, sigma, format = "tsv";
    std::size_t stage = 0;
    std::size_t e_max = 0;
};

template <class MachineT>
int assemble_and_write(const UniversalArgs& a) {
    auto loaded = ap::io::load_enumeration_dir<MachineT>(a.enum_dir);
    auto u = ap::assemble_universal(loaded.encoding, loaded.machines);
    if (a.stage == 0) throw ap::DomainError("--stage must be positive");
    std::vector<ap::MachinePair> pairs;
    for (std::size_t i = 0; i < a.stage; ++i) {
        const ap::MachinePair* p = u.machine.pair_at(i);
        if (!p) break;
        pairs.push_back(*p);
    }
    auto snapshot = MachineT::from_pairs(pairs);
    ap::io::write_machine_file(resolve_out(a.out), snapshot);
    std::cout << "assembled " << pairs.size() << " pairs from "
              << loaded.machines->registered_count() << " machines, encoding "
              << loaded.encoding.describe() << '\n';
    for (std::size_t e = 0; e < loaded.machines->registered_count(); ++e)
        std::cout << "machine " << e << " (" << loaded.names[e] << "): code "
                  << loaded.encoding.code(e).display() << ", constant "
                  << u.constant_for(e) << '\n';
    return 0;
}

int run_universal_assemble(const UniversalArgs& a) {
    if (a.kind == "prefix") return assemble_and_write<ap::PrefixFreeMachine>(a);
    return assemble_and_write<ap::MonotoneMachine>(a);
}

int run_universal_decompose(const UniversalArgs& a) {
    auto loaded = ap::io::load_enumeration_dir<ap::MonotoneMachine>(a.enum_dir);
    auto u = ap::assemble_universal(loaded.encoding, loaded.machines);
    auto mu = ap::io::load_measure_spec(a.measure);
    ap::BitString sigma = ap::BitString::parse(a.sigma, "<sigma>", 0);
    std::size_t e_max = a.e_max ? a.e_max : loaded.machines->registered_count();
    auto d = ap::decompose_universal(mu, u, sigma, e_max, a.stage);
    Table t;
    t.header = {"e", "weight", "value", "contribution"};
    for (const auto& term : d.terms)
        t.rows.push_back({std::to_string(term.e), ap::format_rat(term.weight),
                          ap::format_rat(term.value),
                          ap::format_rat(Rat(term.weight * term.value))});
    emit_table("", t, a.format);
    std::cout << "partial " << ap::format_rat(d.partial) << ", residual weight "
              << ap::format_rat(d.residual_weight) << '\n';
    return 0;
}

// --- rebase -----------------------------------------------------------

struct RebaseArgs {
    std::string from, to, universal_dir, budgets_file, sigmas, delta, report;
    std::string mode = "monotone", format;
};

ap::RebaseBudgets load_budgets(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ap::ParseError(path, 0, "cannot open file");
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw ap::ParseError(path, 0, e.what());
    }
    ap::RebaseBudgets b;
    auto grab = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).template get<std::uint64_t>();
    };
    grab("discrete_stages", b.discrete_stages);
    grab("component_stages", b.component_stages);
    grab("target_stage_cap", b.target_stage_cap);
    grab("max_components", b.max_components);
    grab("verify_stage", b.verify_stage);
    grab("transcript_byte_cap", b.transcript_byte_cap);
    return b;
}

template <class MachineT>
int run_rebase_mode(const RebaseArgs& a) {
    auto mu = ap::io::load_measure_spec(a.from);
    auto mu_tilde = ap::io::load_measure_spec(a.to);
    auto loaded = ap::io::load_enumeration_dir<MachineT>(a.universal_dir);
    auto u = ap::assemble_universal(loaded.encoding, loaded.machines);
    auto budgets = load_budgets(a.budgets_file);
    auto sigmas = ap::io::parse_sigma_list(a.sigmas);
    Rat delta = ap::parse_rat(a.delta, "<delta>", 0);

    auto plan = ap::rebase_plan(mu, mu_tilde, u, budgets);
    auto report = ap::rebase_verify(plan, sigmas, delta);

    Table t;
    t.header = {"sigma", "a", "b", "c", "residual", "verdict"};
    for (const auto& r : report.records)
        t.rows.push_back({r.sigma.display(), ap::format_rat(r.a), ap::format_rat(r.b),
                          ap::format_rat(r.c), ap::format_rat(r.residual), r.verdict});
    std::string format = a.format;
    if (format.empty())
        format = a.report.size() > 5 && a.report.substr(a.report.size() - 5) == ".json"
                     ? "json"
                     : "tsv";
    emit_table(a.report, t, format);

    for (const auto& r : report.records)
        std::cout << r.sigma.display() << ": " << r.verdict << " (gap "
                  << ap::format_rat(Rat(r.a - r.b)) << ", residual "
                  << ap::format_rat(r.residual) << ")\n";
    std::cout << "rebase " << (report.exit_code == 0
                                   ? "pass"
                                   : report.exit_code == 1 ? "fail" : "inconclusive")
              << ": " << plan.components.size() << " components, delta "
              << ap::format_rat(delta) << ", report written to " << a.report << '\n';
    return report.exit_code;
}

int run_rebase(const RebaseArgs& a) {
    if (a.mode == "discrete") return run_rebase_mode<ap::PrefixFreeMachine>(a);
    return run_rebase_mode<ap::MonotoneMachine>(a);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact transformations of computable measures by monotone and "
                 "prefix-free machines"};
    app.require_subcommand(1);

    ValidateArgs va;
    auto* validate = app.add_subcommand("validate", "Load and check an input file");
    validate->require_subcommand(1);
    auto* vm = validate->add_subcommand("machine", "Check a machine file");
    vm->add_option("file", va.machine_file)->required();
    vm->add_option("--kind", va.kind)->check(CLI::IsMember({"monotone", "prefix"}));
    auto* vmu = validate->add_subcommand("measure", "Check a measure specification");
    vmu->add_option("spec", va.measure_spec)->required();
    vmu->add_option("--depth", va.depth);
    auto* vw = validate->add_subcommand("weights", "Check a weight file");
    vw->add_option("file", va.weights_file)->required();
    auto* vap = validate->add_subcommand("approximant", "Check an approximant file");
    vap->add_option("file", va.approx_file)->required();
    vap->add_option("--kind", va.approx_kind)
        ->check(CLI::IsMember({"continuous", "discrete"}));
    vap->add_option("--depth", va.depth);
    vap->add_option("--t-max", va.t_max);

    TransformArgs ta;
    auto* transform = app.add_subcommand("transform", "Transform a measure by a machine");
    transform->add_option("--measure", ta.measure)->required();
    transform->add_option("--machine", ta.machine_file)->required();
    transform->add_option("--sigma", ta.sigmas)->required();
    transform->add_option("--stage", ta.stage)->required();
    transform->add_flag("--discrete", ta.discrete);
    transform->add_option("--mc", ta.mc);
    transform->add_option("--seed", ta.seed);
    transform->add_option("--depth", ta.depth);
    transform->add_option("--workers", ta.workers);
    transform->add_option("--out", ta.out);
    transform->add_option("--format", ta.format)
        ->check(CLI::IsMember({"tsv", "json", "csv"}));

    ConstructArgs ca;
    auto* construct = app.add_subcommand("construct", "Build a machine toward a target");
    construct->require_subcommand(1);
    std::vector<CLI::App*> construct_modes;
    for (const char* mode : {"continuous", "discrete", "nonuniversal"}) {
        auto* sub = construct->add_subcommand(mode);
        sub->add_option("--measure", ca.measure)->required();
        sub->add_option("--target", ca.target)->required();
        sub->add_option("--stages", ca.stages)->required();
        sub->add_option("--out", ca.out)->required();
        sub->add_option("--transcript", ca.transcript);
        if (std::string(mode) == "continuous")
            sub->add_option("--length-factor", ca.length_factor);
        if (std::string(mode) == "nonuniversal") {
            sub->add_option("--universal", ca.universal_file)->required();
            sub->add_option("--enum-budget", ca.enum_budget);
            sub->add_option("--expansion-cap", ca.expansion_cap);
        }
        construct_modes.push_back(sub);
    }

    MixtureArgs ma;
    auto* mixture = app.add_subcommand("mixture", "Weighted mixtures and rewrites");
    mixture->require_subcommand(1);
    auto* meval = mixture->add_subcommand("eval", "Certified mixture bracket");
    meval->add_option("--universal", ma.universal_dir)->required();
    meval->add_option("--measure", ma.measure)->required();
    meval->add_option("--weights", ma.weights)->required();
    meval->add_option("--sigma", ma.sigmas)->required();
    meval->add_option("--truncation", ma.truncation)->required();
    meval->add_option("--stage", ma.stage)->required();
    meval->add_option("--count", ma.count);
    meval->add_option("--out", ma.out);
    meval->add_option("--format", ma.format)->check(CLI::IsMember({"tsv", "json", "csv"}));
    auto* mprop = mixture->add_subcommand("rewrite-proper", "Proper-to-proper rewrite");
    mprop->add_option("--universal", ma.universal_dir)->required();
    mprop->add_option("--measure", ma.measure)->required();
    mprop->add_option("--weights", ma.weights)->required();
    mprop->add_option("--q", ma.q)->required();
    mprop->add_option("--c", ma.c)->required();
    mprop->add_option("--k", ma.k)->required();
    mprop->add_option("--l", ma.l)->required();
    mprop->add_option("--truncation", ma.truncation)->required();
    mprop->add_option("--stage", ma.stage)->required();
    mprop->add_option("--out", ma.out)->required();
    mprop->add_option("--count", ma.count);
    auto* muni = mixture->add_subcommand("rewrite-universal", "Fold a summable u");
    muni->add_option("--universal", ma.universal_dir)->required();
    muni->add_option("--measure", ma.measure)->required();
    muni->add_option("--weights", ma.weights)->required();
    muni->add_option("--u", ma.u_file)->required();
    muni->add_option("--k", ma.k)->required();
    muni->add_option("--truncation", ma.truncation)->required();
    muni->add_option("--out", ma.out)->required();
    muni->add_option("--count", ma.count);
    auto* mdom = mixture->add_subcommand("dominance", "Empirical dominance constant");
    mdom->add_option("--kappa", ma.kappa)->required();
    mdom->add_option("--nu", ma.nu)->required();
    mdom->add_option("--sigmas", ma.sigmas)->required();
    mdom->add_option("--stage", ma.stage)->required();

    UniversalArgs ua;
    auto* universal = app.add_subcommand("universal", "Universal machines by adjunction");
    universal->require_subcommand(1);
    auto* uasm = universal->add_subcommand("assemble", "Write a dovetail snapshot");
    uasm->add_option("--enum", ua.enum_dir)->required();
    uasm->add_option("--kind", ua.kind)->check(CLI::IsMember({"monotone", "prefix"}));
    uasm->add_option("--stage", ua.stage)->required();
    uasm->add_option("--out", ua.out)->required();
    auto* udec = universal->add_subcommand("decompose", "Per-machine contributions");
    udec->add_option("--enum", ua.enum_dir)->required();
    udec->add_option("--measure", ua.measure)->required();
    udec->add_option("--sigma", ua.sigma)->required();
    udec->add_option("--stage", ua.stage)->required();
    udec->add_option("--e-max", ua.e_max);
    udec->add_option("--format", ua.format)->check(CLI::IsMember({"tsv", "json", "csv"}));

    RebaseArgs ra;
    auto* rebase = app.add_subcommand("rebase", "Re-express a universal transform");
    rebase->add_option("--from", ra.from)->required();
    rebase->add_option("--to", ra.to)->required();
    rebase->add_option("--universal", ra.universal_dir)->required();
    rebase->add_option("--budgets", ra.budgets_file)->required();
    rebase->add_option("--sigmas", ra.sigmas)->required();
    rebase->add_option("--delta", ra.delta)->required();
    rebase->add_option("--report", ra.report)->required();
    rebase->add_option("--mode", ra.mode)->check(CLI::IsMember({"monotone", "discrete"}));
    rebase->add_option("--format", ra.format)->check(CLI::IsMember({"tsv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (vm->parsed()) return run_validate_machine(va);
        if (vmu->parsed()) return run_validate_measure(va);
        if (vw->parsed()) return run_validate_weights(va);
        if (vap->parsed()) return run_validate_approx(va);
        if (transform->parsed()) return run_transform(ta);
        for (std::size_t i = 0; i < construct_modes.size(); ++i)
            if (construct_modes[i]->parsed())
                return run_construct(construct_modes[i]->get_name(), ca);
        if (meval->parsed()) return run_mixture_eval(ma);
        if (mprop->parsed()) return run_mixture_rewrite_proper(ma);
        if (muni->parsed()) return run_mixture_rewrite_universal(ma);
        if (mdom->parsed()) return run_mixture_dominance(ma);
        if (uasm->parsed()) return run_universal_assemble(ua);
        if (udec->parsed()) return run_universal_decompose(ua);
        if (rebase->parsed()) return run_rebase(ra);
        std::cerr << "no command\n";
        return 3;
    } catch (const ap::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ap::CertificationError& e) {
        std::cerr << "certification failed: " << e.what() << '\n';
        return 1;
    } catch (const ap::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
