// Acceptance run: one PASS/FAIL line per criterion, tolerances and time limits as stated.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "skb/bounds/bounds.hpp"
#include "skb/cli/run.hpp"
#include "skb/protocols.hpp"

using namespace skb;

namespace {

const std::string kFixtures = SKB_FIXTURE_DIR;

struct Verdict {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) ok = false;
        if (!detail.empty()) detail += "; ";
        detail += what + (cond ? "" : " [miss]");
    }
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

ClassicalDistribution gap_k() { return gap_distribution().marginal(std::vector<std::string>{"A", "B", "E"}); }

Verdict gap_intrinsic(const OptimizerConfig& cfg) {
    Verdict v;
    ClassicalIntrinsicOptions o;
    o.grid = true;
    const auto k = classical_intrinsic(gap_k(), o, cfg);
    const auto kl = classical_intrinsic(gap_distribution().grouped({{"A", {"A"}}, {"B", {"B"}}, {"EF", {"E", "F"}}}), cfg);
    v.require(std::abs(k.value - 1.5) <= 1e-3, "I(A:B|k) = " + num(k.value));
    v.require(k.bracket && k.bracket->first >= 1.5 - 1e-2 && k.bracket->second == k.value,
              "bracket [" + num(k.bracket ? k.bracket->first : NAN) + ", " + num(k.bracket ? k.bracket->second : NAN) + "]");
    v.require(kl.value <= 1e-6, "I(A:B|kl) = " + num(kl.value));
    return v;
}

Verdict gap_reduced(const OptimizerConfig& cfg) {
    Verdict v;
    const auto r = reduced_intrinsic_classical(gap_k(), ReducedOptions{}, cfg);
    const auto with_l = reduced_intrinsic_with_extension(gap_distribution(), 1, cfg);
    v.require(std::abs(r.value - 1.0) <= 1e-3, "reduced = " + num(r.value));
    v.require(std::abs(with_l.value - 1.0) <= 1e-3, "with E' = l: " + num(with_l.value));
    return v;
}

Verdict bell_measures(const OptimizerConfig& cfg) {
    Verdict v;
    const auto bell = bell_state();
    const auto er = relative_entropy_of_entanglement(bell, cfg);
    const auto sq = squashed_entanglement(bell, cfg);
    const auto in = intrinsic_information(tensor(bell, maximally_mixed(2)), cfg);
    v.require(std::abs(er.value - 1.0) <= 1e-2, "E_R = " + num(er.value));
    v.require(std::abs(sq.value - 1.0) <= 1e-3, "E_sq = " + num(sq.value));
    v.require(std::abs(in.value - 2.0) <= 1e-2, "I(A:B|E) on Bell x I/2 = " + num(in.value));
    return v;
}

Verdict flower_locking(const OptimizerConfig& cfg) {
    Verdict v;
    const auto a2 = accessible_information(cli::flower_eve_ensemble(2), cfg);
    const auto a4 = accessible_information(cli::flower_eve_ensemble(4), cfg);
    v.require(std::abs(a2.value - 0.5) <= 2e-2, "I_acc(d=2) = " + num(a2.value));
    v.require(std::abs(a4.value - 1.0) <= 5e-2, "I_acc(d=4) = " + num(a4.value));
    const auto o = cli::run({"demo", "adversary-gap", "--d", "4", "--json"});
    if (o.code != 0) {
        v.require(false, "adversary-gap exit " + std::to_string(o.code));
        return v;
    }
    double measured = NAN, quantum = NAN;
    const auto j = nlohmann::json::parse(o.out);
    for (const auto& e : j["values"]) {
        if (e["name"] == "measured-eve-key") measured = e["value"].get<double>();
        if (e["name"] == "quantum-eve-bound") quantum = e["value"].get<double>();
    }
    v.require(std::abs(measured - 2.0) <= 5e-2, "measured-Eve key = " + num(measured));
    v.require(std::abs(quantum - 1.0) <= 1e-9, "quantum-Eve bound = " + num(quantum));
    return v;
}

Verdict normalization(const OptimizerConfig& cfg) {
    Verdict v;
    for (std::size_t ell : {1u, 2u}) {
        const auto tau = cli::read_state_file(kFixtures + "/tau" + std::to_string(ell) + ".state").as_density();
        const double l = static_cast<double>(ell);
        const auto split = purification_split(tau);
        const std::vector<std::pair<std::string, double>> vals{
            {"intrinsic", intrinsic_information(tau, cfg).value},
            {"reduced", reduced_intrinsic_information(tau, ReducedOptions{}, cfg).value},
            {"squashed", squashed_entanglement(split, cfg).value},
            {"rel-ent", relative_entropy_of_entanglement(split, cfg).value},
            {"dw", dw_lower_bound(tau).value}};
        for (const auto& [name, x] : vals) v.require(std::abs(x - l) <= 1e-6, name + "(tau^" + std::to_string(ell) + ") = " + num(x));
    }
    return v;
}

Verdict commutation() {
    Verdict v;
    const auto gap = cli::read_state_file(kFixtures + "/gap.dist");
    std::ifstream in(kFixtures + "/gap.protocol");
    std::ostringstream ss;
    ss << in.rdbuf();
    const double d0 = commutation_check(gap.distribution, gap.parties, parse_protocol(ss.str()));
    v.require(d0 < 1e-10, "gap.protocol: " + num(d0));
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto rng = make_rng(seed, 0xacc6);
        const std::size_t da = 2 + uniform_index(rng, 2), db = 2 + uniform_index(rng, 2), de = 2 + uniform_index(rng, 2);
        const auto p = random_distribution(SubsystemLayout({"A", "B", "E"}, {da, db, de}), rng);
        const auto proto = random_protocol(seed, p.layout(), default_parties(p.layout()));
        worst = std::max(worst, commutation_check(p, proto));
    }
    v.require(worst < 1e-10, "100 random protocols, max " + num(worst));
    return v;
}

Verdict embedding() {
    Verdict v;
    double worst = 0;
    auto rng = make_rng(7, 0xe3bd);
    for (int t = 0; t < 50; ++t) {
        const auto p = random_unique_k_distribution(2 + uniform_index(rng, 2), 2 + uniform_index(rng, 2), 2 + uniform_index(rng, 2), rng);
        worst = std::max(worst, max_entry_diff(ccq_embed(p).matrix(), from_distribution(p).matrix()));
    }
    v.require(worst < 1e-12, "50 unique-k: max " + num(worst));
    const auto o = cli::run({"demo", "embed-counterexample", "--json"});
    double diff = NAN;
    const auto j = nlohmann::json::parse(o.out);
    for (const auto& e : j["values"])
        if (e["name"] == "ccq-vs-display") diff = e["value"].get<double>();
    v.require(diff < 1e-12, "counterexample ccq vs display: " + num(diff));
    return v;
}

Verdict eof_inequality(const OptimizerConfig& cfg) {
    Verdict v;
    double worst = -1e300;
    auto rng = make_rng(11, 0xe0f);
    ClassicalIntrinsicOptions o;
    o.grid = true;
    for (int t = 0; t < 50; ++t) {
        const auto p = random_unique_k_distribution(2 + uniform_index(rng, 2), 2 + uniform_index(rng, 2), 2 + uniform_index(rng, 2), rng);
        const double gap = classical_intrinsic(p, o, cfg).value - eof_induced(p, cfg).value;
        worst = std::max(worst, gap);
    }
    v.require(worst <= 1e-6, "50 samples, max(intrinsic - eof) = " + num(worst));
    return v;
}

Verdict bell_lock(const OptimizerConfig& cfg) {
    Verdict v;
    const auto o = cli::run({"demo", "bell-lock", "--json", "--restarts", std::to_string(cfg.restarts)});
    const auto j = nlohmann::json::parse(o.out);
    for (const auto& c : j["checks"]) v.require(c["pass"].get<bool>(), c["name"].get<std::string>() + " = " + num(c["value"].get<double>()));
    return v;
}

Verdict properties() {
    Verdict v;
    auto rng = make_rng(3, 0x9e0);
    double ssa = 1e300;
    for (int t = 0; t < 500; ++t) {
        const std::size_t da = 2 + t % 2, db = 2 + (t / 2) % 2, de = 2 + (t / 4) % 2;
        const auto rho = random_state(SubsystemLayout({"A", "B", "E"}, {da, db, de}), rng, 1 + uniform_index(rng, da * db * de));
        ssa = std::min(ssa, conditional_mutual_information(rho, {"A"}, {"B"}, {"E"}));
    }
    v.require(ssa >= -1e-9, "SSA min CMI " + num(ssa));

    double add = 0;
    for (int t = 0; t < 100; ++t) {
        const auto r1 = random_state(SubsystemLayout({"A", "B", "E"}, {2, 2, 2}), rng);
        const auto r2 = random_state(SubsystemLayout({"A2", "B2", "E2"}, {2, 2, 2}), rng);
        const auto both = tensor(r1, r2);
        const double sum = conditional_mutual_information(r1, {"A"}, {"B"}, {"E"}) + conditional_mutual_information(r2, {"A2"}, {"B2"}, {"E2"});
        add = std::max(add, std::abs(conditional_mutual_information(both, {"A", "A2"}, {"B", "B2"}, {"E", "E2"}) - sum));
    }
    v.require(add < 1e-9, "additivity max dev " + num(add));

    double mono = -1e300;
    std::size_t ops = 0;
    for (std::uint64_t s = 0; ops < 200; ++s) {
        auto r = make_rng(s, 0x10b);
        const auto start = random_ccq_state(2, 2, 2, r);
        SharedState st{start, default_parties(start.layout())};
        double prev = conditional_mutual_information(st.tripartite(), {"A"}, {"B"}, {"E"});
        for (int k = 0; k < 4 && ops < 200; ++k, ++ops) {
            st = apply_lopc(st, random_lopc_operation(s * 16 + k, st));
            const double now = conditional_mutual_information(st.tripartite(), {"A"}, {"B"}, {"E"});
            mono = std::max(mono, now - prev);
            prev = now;
        }
    }
    v.require(mono <= 1e-6, "200 LOPC ops, max increase " + num(mono));

    double slack = 1e300;
    const SubsystemLayout layout({"A", "B", "E"}, {2, 2, 2});
    for (int t = 0; t < 100; ++t) {
        const auto rho = random_density_matrix(8, rng);
        const auto noise = random_density_matrix(8, rng);
        const double w = 0.3 * uniform01(rng);
        const auto sigma = rho * (1 - w) + noise * w;
        const double eps = trace_distance(rho, sigma);
        const std::vector<std::string> a{"A"}, b{"B"}, e{"E"};
        const double d = std::abs(conditional_mutual_information(rho, layout, a, b, e) - conditional_mutual_information(sigma, layout, a, b, e));
        slack = std::min(slack, fannes_cmi_bound(eps, 2) - d);
    }
    v.require(slack >= -1e-12, "Fannes min slack " + num(slack));

    const std::vector<std::string> args{"bound", "intrinsic", kFixtures + "/bell_lock.state", "--restarts", "2", "--seed", "5", "--json"};
    const auto o1 = cli::run(args), o2 = cli::run(args);
    v.require(o1.code == 0 && o1.out == o2.out, "JSON byte-identical across runs");
    return v;
}

}  // namespace

int main() {
    const OptimizerConfig cfg;
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "gap intrinsic 3/2, (k,l) factorises", 60, [&] { return gap_intrinsic(cfg); }},
        {2, "gap reduced intrinsic 1", 60, [&] { return gap_reduced(cfg); }},
        {3, "Bell measures", 120, [&] { return bell_measures(cfg); }},
        {4, "flower locking and adversary gap", 600, [&] { return flower_locking(cfg); }},
        {5, "normalization on tau^1, tau^2", 60, [&] { return normalization(cfg); }},
        {6, "commutative diagram", 60, [] { return commutation(); }},
        {7, "embedding fidelity", 0, [] { return embedding(); }},
        {8, "intrinsic <= eof on unique-k", 300, [&] { return eof_inequality(cfg); }},
        {9, "bell_lock factor-2 drop", 0, [&] { return bell_lock(cfg); }},
        {10, "property suites", 0, [] { return properties(); }},
    };
    int failures = 0;
    const auto t_all = std::chrono::steady_clock::now();
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.ok = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_s > 0) v.require(secs < c.limit_s, "time " + num(secs) + " s < " + num(c.limit_s) + " s");
        else v.detail += "; time " + num(secs) + " s";
        if (!v.ok) ++failures;
        std::printf("%s  [%d] %s: %s\n", v.ok ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str());
        std::fflush(stdout);
    }
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_all).count();
    std::printf("%d of %zu criteria passed in %.1f s\n", static_cast<int>(criteria.size()) - failures, criteria.size(), total);
    return failures == 0 ? 0 : 1;
}
