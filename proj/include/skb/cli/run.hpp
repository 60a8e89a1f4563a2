// Command dispatch for the skbounds tool.
#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skb/bounds/bounds.hpp"
#include "skb/cli/report.hpp"
#include "skb/cli/state_file.hpp"
#include "skb/protocols.hpp"

namespace skb::cli {

enum ExitCode { kOk = 0, kUsage = 2, kInvariant = 3, kNumeric = 4 };

struct Flags {
    std::size_t restarts = 8;
    std::size_t max_iters = 20000;
    double tol = 1e-10;
    std::uint64_t seed = 1;
    std::size_t eprime_dim = 0;
    std::size_t ext_dim = 0;
    std::size_t ensemble_size = 0;
    std::size_t alphabet_cap = 4;
    std::size_t d = 0;
    std::size_t a = 1;
    bool grid = false;
    bool json = false;

    OptimizerConfig config() const {
        OptimizerConfig c;
        c.restarts = restarts;
        c.max_iters = max_iters;
        c.tol = tol;
        c.seed = seed;
        c.validate();
        return c;
    }
};

namespace detail {

inline std::vector<std::string> label_set(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, ',')) {
        if (cur.empty()) throw usage_error("empty label in '" + s + "'");
        out.push_back(cur);
    }
    return out;
}

inline std::string set_name(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
}

inline std::vector<std::string> held(const StateFile& sf, Party p) {
    std::vector<std::string> out;
    for (const auto& l : sf.layout().labels())
        if (sf.parties.at(l) == p) out.push_back(l);
    return out;
}

// Alice's, Bob's and Eve's registers grouped into A, B, E.
inline ClassicalDistribution tripartite_distribution(const StateFile& sf) {
    if (sf.kind != StateFile::Kind::classical) throw usage_error("this command needs a classical distribution file");
    const auto a = held(sf, Party::alice), b = held(sf, Party::bob), e = held(sf, Party::eve);
    if (a.empty() || b.empty() || e.empty()) throw usage_error("Alice, Bob and Eve must each hold at least one register");
    return sf.distribution.grouped({{"A", a}, {"B", b}, {"E", e}});
}

inline double log2d(std::size_t d) { return std::log2(static_cast<double>(d)); }

inline Check approx(std::string name, double v, double expected, double tol) {
    return {std::move(name), v, expected, tol, Check::Relation::approx};
}
inline Check at_most(std::string name, double v, double bound, double tol) {
    return {std::move(name), v, bound, tol, Check::Relation::at_most};
}
inline Check at_least(std::string name, double v, double bound, double tol) {
    return {std::move(name), v, bound, tol, Check::Relation::at_least};
}

inline BoundEstimate renamed(BoundEstimate e, std::string name) {
    e.name = std::move(name);
    return e;
}

inline std::size_t flower_d(const Flags& f) { return f.d ? f.d : 2; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Demos

inline Report demo_gap(const Flags& f) {
    const auto cfg = f.config();
    Report r;
    const auto p = gap_distribution();
    const auto pk = p.marginal(std::vector<std::string>{"A", "B", "E"});
    const auto pkl = p.grouped({{"A", {"A"}}, {"B", {"B"}}, {"EF", {"E", "F"}}});

    ClassicalIntrinsicOptions grid;
    grid.grid = true;
    grid.eprime_size = f.eprime_dim;
    const auto ik = classical_intrinsic(pk, grid, cfg);
    const auto ikl = classical_intrinsic(pkl, ClassicalIntrinsicOptions{}, cfg);
    ReducedOptions ro;
    ro.alphabet_cap = f.alphabet_cap;
    const auto red = reduced_intrinsic_classical(pk, ro, cfg);
    const double sl = shannon_entropy(p.marginal(std::vector<std::string>{"F"}).probs());

    r.values.push_back(detail::renamed(ik, "intrinsic"));
    r.values.push_back(detail::renamed(ikl, "intrinsic-with-l"));
    r.values.push_back(detail::renamed(red, "reduced"));
    r.values.push_back(exact_value("S(l)", sl));
    r.checks.push_back(detail::approx("intrinsic", ik.value, 1.5, 1e-3));
    if (ik.bracket) r.checks.push_back(detail::at_least("intrinsic grid lower bracket", ik.bracket->first, 1.5, 1e-2));
    r.checks.push_back(detail::at_most("intrinsic-with-l", ikl.value, 0.0, 1e-6));
    r.checks.push_back(detail::approx("reduced", red.value, 1.0, 1e-3));
    r.checks.push_back(detail::approx("S(l)", sl, 1.0, 1e-12));
    return r;
}

inline Ensemble flower_eve_ensemble(std::size_t d) {
    const auto rho = flower_state(d);
    return conditional_ensemble(rho, std::vector<std::string>{"A", "A'"}, std::vector<std::string>{"E"});
}

inline Report demo_flower(const Flags& f) {
    const std::size_t d = detail::flower_d(f);
    Report r;
    const auto acc = accessible_information(flower_eve_ensemble(d), f.config());
    r.values.push_back(acc);
    r.checks.push_back(detail::approx("acc", acc.value, 0.5 * detail::log2d(d), d == 2 ? 2e-2 : 5e-2));
    return r;
}

inline Report demo_bell_lock(const Flags& f) {
    const auto cfg = f.config();
    Report r;
    const auto rho = bell_lock_state();
    const auto traced = rho.reduced({"A", "B", "E"});
    const auto given = regroup(rho, {{"A", {"A"}}, {"B", {"B"}}, {"EE'", {"E", "E'"}}});
    const auto i1 = intrinsic_information(traced, cfg);
    const auto i2 = intrinsic_information(given, cfg);
    const double se = von_neumann_entropy(rho, {"E'"});
    r.values.push_back(detail::renamed(i1, "intrinsic-E'-traced"));
    r.values.push_back(detail::renamed(i2, "intrinsic-E'-to-Eve"));
    r.values.push_back(exact_value("S(E')", se));
    r.checks.push_back(detail::approx("intrinsic-E'-traced", i1.value, 2.0, 1e-2));
    r.checks.push_back(detail::at_most("intrinsic-E'-to-Eve", i2.value, 0.0, 1e-6));
    r.checks.push_back(detail::approx("S(E')", se, 1.0, 1e-10));
    r.checks.push_back(detail::at_most("drop", i1.value - i2.value, 2.0 * se, 1e-2));
    return r;
}

inline Report demo_adversary_gap(const Flags& f) {
    const std::size_t d = detail::flower_d(f);
    Report r;
    const auto rho = flower_state(d);
    // quantum Eve: S(E') + I(AA':BB'|EE') with E' a copy of the bit in AB
    ProtocolStep copy;
    copy.kind = StepKind::communicate;
    copy.party = Party::alice;
    copy.labels = {"A"};
    const SharedState s{rho, {{"A", Party::alice}, {"A'", Party::alice}, {"B", Party::bob}, {"B'", Party::bob}, {"E", Party::eve}}};
    const auto with_copy = apply_step(s, copy).state;
    const double se = von_neumann_entropy(with_copy, {"A@E"});
    const double cmi = conditional_mutual_information(with_copy, {"A", "A'"}, {"B", "B'", "A@B"}, {"E", "A@E"});
    const double quantum = se + cmi;
    const double dw_bit = mutual_information(rho, {"A"}, {"B"}) - mutual_information(rho, {"A"}, {"E"});

    // measured Eve: S(AA') - I_acc
    const auto acc = accessible_information(flower_eve_ensemble(d), f.config());
    const double sa = von_neumann_entropy(rho, {"A", "A'"});
    BoundEstimate measured = acc;
    measured.name = "measured-eve-key";
    measured.value = sa - acc.value;
    measured.direction = Direction::upper_estimate;

    BoundEstimate q = exact_value("quantum-eve-bound", quantum);
    q.direction = Direction::upper_estimate;
    q.parameters = {{"S(E')", se}, {"I(AA':BB'|EE')", cmi}};
    BoundEstimate lower = exact_value("quantum-eve-dw-bit", dw_bit);
    lower.direction = Direction::lower_bound;
    r.values.push_back(q);
    r.values.push_back(lower);
    r.values.push_back(acc);
    r.values.push_back(measured);
    r.checks.push_back(detail::approx("quantum-eve-bound", quantum, 1.0, 1e-9));
    r.checks.push_back(detail::approx("quantum-eve-dw-bit", dw_bit, 1.0, 1e-9));
    r.checks.push_back(detail::approx("measured-eve-key", measured.value, 1.0 + 0.5 * detail::log2d(d), d == 2 ? 2e-2 : 5e-2));
    r.notes.push_back("measured-eve-key = S(AA') - I_acc; I_acc is a lower estimate, so this is an upper estimate");
    return r;
}

inline Report demo_embed_counterexample(const Flags&) {
    Report r;
    const auto p = embed_counterexample_distribution();
    const auto q = qqq_embed(p);
    const auto v = embed_counterexample_vector();
    const double qqq_diff = max_entry_diff(q.matrix(), ComplexMatrix::projector(v));

    const auto ccq = ccq_embed(p, {"E"}).reduced({"A", "B", "E"});
    const ComplexVector plus{1 / std::sqrt(2.0), 1 / std::sqrt(2.0)};
    const ComplexVector k00{1, 0, 0, 0}, k11{0, 0, 0, 1};
    auto expected = kron(ComplexMatrix::projector(k00), ComplexMatrix::projector(plus));
    expected += kron(ComplexMatrix::projector(k11), ComplexMatrix::identity(2) * 0.5);
    expected *= 0.5;
    const double ccq_diff = max_entry_diff(ccq.matrix(), expected);
    const double ccc_key = key_quality(from_distribution(p.marginal(std::vector<std::string>{"A", "B", "E"})), 1);
    const double ccq_key = key_quality(ccq, 1);

    r.values.push_back(exact_value("qqq-vs-psi", qqq_diff));
    r.values.push_back(exact_value("ccq-vs-display", ccq_diff));
    r.values.push_back(exact_value("key-distance-ccc", ccc_key));
    r.values.push_back(exact_value("key-distance-ccq", ccq_key));
    r.values.push_back(exact_value("unique-k", check_unique_k(p, {"E"}) ? 1.0 : 0.0));
    r.checks.push_back(detail::at_most("qqq-vs-psi", qqq_diff, 0.0, 1e-12));
    r.checks.push_back(detail::at_most("ccq-vs-display", ccq_diff, 0.0, 1e-12));
    r.checks.push_back(detail::at_most("key-distance-ccc", ccc_key, 0.0, 1e-12));
    r.checks.push_back(detail::approx("key-distance-ccq", ccq_key, 0.25, 1e-12));
    return r;
}

// ---------------------------------------------------------------------------
// State-file commands

inline Report cmd_entropy(const StateFile& sf, const std::vector<std::string>& sets) {
    Report r;
    const auto rho = sf.as_density();
    std::vector<std::vector<std::string>> groups;
    for (const auto& s : sets) groups.push_back(detail::label_set(s));
    if (groups.empty()) {
        for (const auto& l : rho.layout().labels()) groups.push_back({l});
        if (rho.layout().size() > 1) groups.push_back(rho.layout().labels());
    }
    for (const auto& g : groups)
        r.values.push_back(exact_value("S(" + detail::set_name(g) + ")", von_neumann_entropy(rho, std::span<const std::string>(g))));
    return r;
}

inline Report cmd_mi(const StateFile& sf, const std::string& x, const std::string& y) {
    Report r;
    const auto a = detail::label_set(x), b = detail::label_set(y);
    r.values.push_back(exact_value("I(" + x + ":" + y + ")", mutual_information(sf.as_density(), a, b)));
    return r;
}

inline Report cmd_cmi(const StateFile& sf, const std::string& x, const std::string& y, const std::string& z) {
    Report r;
    const auto a = detail::label_set(x), b = detail::label_set(y), c = detail::label_set(z);
    r.values.push_back(exact_value("I(" + x + ":" + y + "|" + z + ")", conditional_mutual_information(sf.as_density(), a, b, c)));
    return r;
}

inline Report cmd_bound(const std::string& kind, const StateFile& sf, const Flags& f) {
    const auto cfg = f.config();
    Report r;
    const bool classical = sf.kind == StateFile::Kind::classical;
    if (kind == "dw") {
        r.values.push_back(dw_lower_bound(sf.shared().tripartite()));
    } else if (kind == "intrinsic") {
        if (classical) {
            ClassicalIntrinsicOptions o;
            o.eprime_size = f.eprime_dim;
            o.grid = f.grid;
            r.values.push_back(classical_intrinsic(detail::tripartite_distribution(sf), o, cfg));
        } else {
            IntrinsicOptions o;
            o.eprime_dim = f.eprime_dim;
            r.values.push_back(intrinsic_information(sf.shared().tripartite(), o, cfg));
        }
    } else if (kind == "reduced") {
        ReducedOptions o;
        o.a = f.a;
        o.alphabet_cap = f.alphabet_cap;
        if (f.ext_dim) o.ext_dim = f.ext_dim;
        if (classical && f.a == 1) r.values.push_back(reduced_intrinsic_classical(detail::tripartite_distribution(sf), o, cfg));
        else r.values.push_back(reduced_intrinsic_information(sf.shared().tripartite(), o, cfg));
    } else if (kind == "squashed" || kind == "rel-ent") {
        // Alice–Bob split of a purification of the tripartite state
        const auto split = purification_split(sf.shared().tripartite());
        if (kind == "squashed") {
            SquashedOptions o;
            if (f.ext_dim) o.ext_dim = f.ext_dim;
            r.values.push_back(squashed_entanglement(split, o, cfg));
        } else {
            RelEntOptions o;
            o.ensemble_size = f.ensemble_size;
            o.optimize = split.dim() <= kRelEntSearchDimCap || f.ensemble_size > 0;
            r.values.push_back(relative_entropy_of_entanglement(split, o, cfg));
            if (!o.optimize) r.notes.push_back("split dimension above " + std::to_string(kRelEntSearchDimCap) +
                                               ": closed-form candidates only (set --ensemble-size to search)");
        }
    } else if (kind == "acc") {
        auto given = detail::held(sf, Party::alice);
        const auto bob = detail::held(sf, Party::bob), eve = detail::held(sf, Party::eve);
        given.insert(given.end(), bob.begin(), bob.end());
        if (eve.empty()) throw usage_error("acc: Eve holds nothing");
        r.values.push_back(accessible_information(conditional_ensemble(sf.as_density(), given, eve), cfg));
    } else if (kind == "eof") {
        r.values.push_back(eof_induced(detail::tripartite_distribution(sf), cfg));
    } else {
        throw usage_error("unknown bound '" + kind + "'");
    }
    return r;
}

inline Report cmd_check(const std::string& kind, const StateFile& sf, const std::string& protocol_path, const Flags& f) {
    Report r;
    if (kind == "unique-k") {
        if (sf.kind != StateFile::Kind::classical) throw usage_error("check unique-k needs a classical distribution file");
        const bool ok = check_unique_k(sf.distribution, detail::held(sf, Party::eve));
        r.values.push_back(exact_value("unique-k", ok ? 1.0 : 0.0));
        r.checks.push_back(detail::approx("unique-k", ok ? 1.0 : 0.0, 1.0, 0.0));
    } else if (kind == "commute") {
        if (sf.kind != StateFile::Kind::classical) throw usage_error("check commute needs a classical distribution file");
        if (protocol_path.empty()) throw usage_error("check commute needs a protocol file");
        std::ifstream in(protocol_path);
        if (!in) throw usage_error("cannot open protocol file '" + protocol_path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        const auto proto = parse_protocol(ss.str());
        const double dist = commutation_check(sf.distribution, sf.parties, proto);
        r.values.push_back(exact_value("commutation-distance", dist));
        r.checks.push_back(detail::at_most("commutation-distance", dist, 0.0, 1e-10));
    } else if (kind == "monotone") {
        const auto rep = monotone_report(sf.shared().tripartite(), f.config());
        for (const auto* e : rep.all()) r.values.push_back(*e);
        for (const auto& s : rep.skipped) r.notes.push_back("skipped " + s);
        if (rep.dw)
            for (const auto* e : rep.all())
                if (e->direction == Direction::upper_estimate)
                    r.checks.push_back(detail::at_least(e->name + " >= dw", e->value, rep.dw->value, 1e-6));
    } else {
        throw usage_error("unknown check '" + kind + "'");
    }
    return r;
}

inline StateFile named_state_file(const std::string& name, std::size_t d) {
    if (name == "tau1" || name == "tau2") {
        const auto t = ideal_key_state(name == "tau1" ? 1 : 2, trivial_state());
        return density_file(t);
    }
    if (name == "gap") return classical_file(gap_distribution());
    if (name == "counterexample-dist") return classical_file(embed_counterexample_distribution(),
                                                            {{"A", Party::alice}, {"B", Party::bob}, {"A'", Party::alice}, {"E", Party::eve}});
    const auto s = named_example(name, d ? d : 2);
    return density_file(s.state, s.owner);
}

// ---------------------------------------------------------------------------

struct Outcome {
    int code = kOk;
    std::string out;
    std::string err;
};

inline Outcome run(const std::vector<std::string>& args) {
    Outcome res;
    Flags f;
    CLI::App app{"Secret-key bounds for tripartite states", "skbounds"};
    app.require_subcommand(1);
    app.add_option("--restarts", f.restarts, "optimizer restarts")->check(CLI::PositiveNumber);
    app.add_option("--max-iters", f.max_iters, "iterations per restart")->check(CLI::PositiveNumber);
    app.add_option("--tol", f.tol, "optimizer tolerance")->check(CLI::PositiveNumber);
    app.add_option("--seed", f.seed, "random seed");
    app.add_option("--eprime-dim", f.eprime_dim, "dimension of Eve's processed register (0: |E|)");
    app.add_option("--ext-dim", f.ext_dim, "extension dimension (squashed, reduced a=2)");
    app.add_option("--ensemble-size", f.ensemble_size, "separable ensemble size for rel-ent (0: auto)");
    app.add_option("--alphabet-cap", f.alphabet_cap, "alphabet cap for reduced intrinsic (a=1)")->check(CLI::PositiveNumber);
    app.add_option("--d", f.d, "flower dimension");
    app.add_option("--a", f.a, "reduced intrinsic variant (1 or 2)");
    app.add_flag("--grid", f.grid, "grid oracle for classical intrinsic");
    app.add_flag("--json", f.json, "machine-readable output");

    std::string file, kind, x, y, z, protocol, name;
    std::vector<std::string> sets;
    auto* entropy = app.add_subcommand("entropy", "von Neumann entropies of label sets");
    entropy->add_option("file", file)->required();
    entropy->add_option("sets", sets, "comma-separated label sets");
    auto* mi = app.add_subcommand("mi", "mutual information I(X:Y)");
    mi->add_option("file", file)->required();
    mi->add_option("x", x)->required();
    mi->add_option("y", y)->required();
    auto* cmi = app.add_subcommand("cmi", "conditional mutual information I(X:Y|Z)");
    cmi->add_option("file", file)->required();
    cmi->add_option("x", x)->required();
    cmi->add_option("y", y)->required();
    cmi->add_option("z", z)->required();
    auto* bound = app.add_subcommand("bound", "one bound on a state file");
    bound->add_option("kind", kind)->required()->check(CLI::IsMember({"dw", "intrinsic", "reduced", "squashed", "rel-ent", "acc", "eof"}));
    bound->add_option("file", file)->required();
    auto* embed = app.add_subcommand("embed", "qqq or ccq embedding of a distribution file");
    embed->add_option("kind", kind)->required()->check(CLI::IsMember({"qqq", "ccq"}));
    embed->add_option("file", file)->required();
    auto* check = app.add_subcommand("check", "structural checks");
    check->add_option("kind", kind)->required()->check(CLI::IsMember({"unique-k", "commute", "monotone"}));
    check->add_option("file", file)->required();
    check->add_option("protocol", protocol, "protocol file (commute)");
    auto* demo = app.add_subcommand("demo", "worked examples with expected values");
    demo->add_option("name", name)
        ->required()
        ->check(CLI::IsMember({"gap", "flower", "bell-lock", "adversary-gap", "embed-counterexample"}));
    auto* example = app.add_subcommand("example", "write a named example as a state file");
    example->add_option("name", name)
        ->required()
        ->check(CLI::IsMember({"gap", "flower", "bell_lock", "bell-lock", "embed_counterexample", "embed-counterexample",
                               "counterexample-dist", "tau1", "tau2"}));
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    std::string command;
    for (const auto& a : args) command += (command.empty() ? "" : " ") + a;
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        res.out = app.help();
        return res;
    } catch (const CLI::ParseError& e) {
        res.code = kUsage;
        res.err = std::string("error: ") + e.what() + "\n";
        return res;
    }

    auto fail = [&](int code, const char* type, const std::string& msg) {
        res.code = code;
        if (f.json) {
            nlohmann::ordered_json j;
            j["command"] = command;
            j["error"] = {{"type", type}, {"message", msg}};
            res.out = j.dump(2) + "\n";
        } else {
            res.err = "error (" + std::string(type) + "): " + msg + "\n";
        }
    };
    try {
        if (f.a != 1 && f.a != 2) throw usage_error("--a must be 1 or 2");
        Report r;
        if (example->parsed()) {
            res.out = emit_state_file(named_state_file(name, f.d));
            return res;
        }
        if (embed->parsed()) {
            const auto sf = read_state_file(file);
            if (sf.kind != StateFile::Kind::classical) throw usage_error("embed needs a classical distribution file");
            auto rho = kind == "qqq" ? qqq_embed(sf.distribution) : ccq_embed(sf.distribution, detail::held(sf, Party::eve));
            res.out = emit_state_file(density_file(std::move(rho), sf.parties));
            return res;
        }
        if (demo->parsed()) {
            if (name == "gap") r = demo_gap(f);
            else if (name == "flower") r = demo_flower(f);
            else if (name == "bell-lock") r = demo_bell_lock(f);
            else if (name == "adversary-gap") r = demo_adversary_gap(f);
            else r = demo_embed_counterexample(f);
        } else {
            const auto sf = read_state_file(file);
            if (entropy->parsed()) r = cmd_entropy(sf, sets);
            else if (mi->parsed()) r = cmd_mi(sf, x, y);
            else if (cmi->parsed()) r = cmd_cmi(sf, x, y, z);
            else if (bound->parsed()) r = cmd_bound(kind, sf, f);
            else r = cmd_check(kind, sf, protocol, f);
        }
        r.command = command;
        res.out = emit_report(r, f.json);
    } catch (const usage_error& e) {
        fail(kUsage, "usage", e.what());
    } catch (const invariant_error& e) {
        fail(kInvariant, "invariant", e.what());
    } catch (const numeric_error& e) {
        fail(kNumeric, "numeric", e.what());
    }
    return res;
}

inline int main(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    const auto res = run(std::vector<std::string>(argv + 1, argv + argc));
    out << res.out;
    err << res.err;
    return res.code;
}

}  // namespace skb::cli
