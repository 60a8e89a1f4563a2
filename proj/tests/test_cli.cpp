#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "skb/cli/run.hpp"
#include "skb/random.hpp"

using namespace skb;
using namespace skb::cli;

namespace {

const std::string kFixtures = SKB_FIXTURE_DIR;

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_file(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / ("skb_test_" + name);
    std::ofstream(path) << text;
    return path.string();
}

struct Proc {
    int code;
    std::string out;
};

Proc run_binary(const std::string& args) {
    const std::string cmd = std::string(SKB_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

nlohmann::json values_of(const Outcome& o) {
    const auto j = nlohmann::json::parse(o.out);
    nlohmann::json m;
    for (const auto& v : j["values"]) m[v["name"].get<std::string>()] = v;
    return m;
}

const std::vector<std::string> kFixtureFiles{"gap.dist",           "flower2.state", "flower4.state", "bell_lock.state",
                                             "counterexample.state", "tau1.state",    "tau2.state"};

}  // namespace

TEST(StateFile, Tau1IsDiagonal) {
    const auto sf = read_state_file(fixture("tau1.state"));
    ASSERT_EQ(sf.kind, StateFile::Kind::density);
    const auto& m = sf.density.matrix();
    ASSERT_EQ(m.rows(), 4u);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(m(i, j), cplx(i == j && (i == 0 || i == 3) ? 0.5 : 0.0));
    EXPECT_TRUE(sf.density.is_classical("A"));
}

TEST(StateFile, GapMatchesNamedExample) {
    const auto sf = read_state_file(fixture("gap.dist"));
    ASSERT_EQ(sf.kind, StateFile::Kind::classical);
    EXPECT_EQ(sf.distribution.probs(), gap_distribution().probs());
    EXPECT_EQ(sf.distribution.layout().labels(), gap_distribution().layout().labels());
    EXPECT_EQ(sf.parties, named_example("gap").owner);
}

TEST(StateFile, FixturesMatchBuilders) {
    EXPECT_EQ(max_entry_diff(read_state_file(fixture("flower4.state")).density.matrix(), flower_state(4).matrix()), 0.0);
    EXPECT_EQ(max_entry_diff(read_state_file(fixture("bell_lock.state")).density.matrix(), bell_lock_state().matrix()), 0.0);
    const auto ce = read_state_file(fixture("counterexample.state"));
    EXPECT_EQ(max_entry_diff(ce.density.matrix(), named_example("embed_counterexample").state.matrix()), 0.0);
    EXPECT_EQ(ce.parties.at("A'"), Party::alice);
}

TEST(StateFile, EveryFixtureParsesAndValidates) {
    for (const auto& f : kFixtureFiles) {
        SCOPED_TRACE(f);
        const auto sf = read_state_file(fixture(f));
        EXPECT_NO_THROW(sf.as_density().validate());
    }
}

TEST(StateFile, FixturesRoundTripByteForByte) {
    for (const auto& f : kFixtureFiles) {
        SCOPED_TRACE(f);
        const auto text = slurp(fixture(f));
        EXPECT_EQ(emit_state_file(parse_state_file(text)), text);
    }
}

TEST(StateFile, RandomStatesRoundTripBitExact) {
    auto rng = make_rng(21);
    for (std::size_t dims : {2u, 3u}) {
        // 8 is dense, 27 goes through the sparse form
        const auto rho = random_state(SubsystemLayout({"A", "B", "E"}, {2, dims, dims == 2 ? 2u : 3u}), rng);
        const auto sf = density_file(rho);
        const auto back = parse_state_file(emit_state_file(sf));
        const auto& a = rho.matrix();
        const auto& b = back.density.matrix();
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) ASSERT_EQ(a(i, j), b(i, j));
    }
    const auto p = random_distribution(SubsystemLayout({"X", "Y", "Z"}, {3, 2, 2}), rng);
    const auto back = parse_state_file(emit_state_file(classical_file(p)));
    EXPECT_EQ(back.distribution.probs(), p.probs());
}

TEST(StateFile, Errors) {
    const std::string head = R"({"kind": "density", "dims": [["A", 2]], )";
    try {
        parse_state_file(head + R"("matrix": [[[0.45, 0], [0, 0]], [[0, 0], [0.45, 0]]]})");
        FAIL() << "trace 0.9 accepted";
    } catch (const invariant_error& e) {
        EXPECT_NE(std::string(e.what()).find("trace"), std::string::npos);
    }
    EXPECT_THROW(parse_state_file(head + R"("matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]})"), invariant_error);
    EXPECT_THROW(parse_state_file(head + R"("matrix": [[[1, 0], [0, 0]]]})"), usage_error);
    EXPECT_THROW(parse_state_file(head + R"("matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]])"), usage_error);
    EXPECT_THROW(parse_state_file(R"({"kind": "sparse", "dims": [["A", 1]]})"), usage_error);
    EXPECT_THROW(parse_state_file(R"({"kind": "classical", "dims": [["A", 2]], "probs": [{"indices": [2], "p": 1}]})"),
                 usage_error);
    EXPECT_THROW(parse_state_file(R"({"kind": "classical", "dims": [["A", 2]], "probs": [{"indices": [0], "p": 0.5}]})"),
                 invariant_error);
    EXPECT_THROW(parse_state_file(R"({"kind": "classical", "dims": [["A", 2]], "parties": {"A": "Z"},
                                      "probs": [{"indices": [0], "p": 1}]})"),
                 usage_error);
}

TEST(Report, EmptyReportIsHeaderOnly) {
    Report r;
    r.command = "noop";
    EXPECT_EQ(emit_text(r), "skbounds noop\n");
    const auto j = nlohmann::json::parse(emit_json(r));
    EXPECT_EQ(j["command"], "noop");
    EXPECT_TRUE(j["values"].empty());
}

TEST(Report, TwelveSignificantDigits) {
    Report r;
    r.command = "x";
    r.values.push_back(exact_value("pi", 3.14159265358979));
    EXPECT_NE(emit_text(r).find("3.14159265359 "), std::string::npos);
}

TEST(Report, JsonRoundTrips) {
    const auto o = run({"bound", "intrinsic", fixture("gap.dist"), "--restarts", "1", "--json"});
    ASSERT_EQ(o.code, 0) << o.err;
    const auto j = nlohmann::ordered_json::parse(o.out);
    EXPECT_EQ(j.dump(2) + "\n", o.out);
    EXPECT_EQ(j["values"][0]["direction"], "upper-estimate-of-infimum");
}

TEST(Run, DwOnTau1) {
    const auto o = run({"bound", "dw", fixture("tau1.state"), "--json"});
    ASSERT_EQ(o.code, 0) << o.err;
    const auto v = values_of(o);
    EXPECT_NEAR(v["dw"]["value"].get<double>(), 1.0, 1e-12);
    EXPECT_EQ(v["dw"]["direction"], "exact");
}

TEST(Run, EntropyCommands) {
    auto v = values_of(run({"cmi", fixture("gap.dist"), "A", "B", "E", "--json"}));
    EXPECT_NEAR(v["I(A:B|E)"]["value"].get<double>(), 1.5, 1e-12);
    v = values_of(run({"mi", fixture("tau2.state"), "A", "B", "--json"}));
    EXPECT_NEAR(v["I(A:B)"]["value"].get<double>(), 2.0, 1e-12);
    v = values_of(run({"entropy", fixture("flower2.state"), "A,A'", "E", "--json"}));
    EXPECT_NEAR(v["S(A,A')"]["value"].get<double>(), 2.0, 1e-12);
    EXPECT_NEAR(v["S(E)"]["value"].get<double>(), 1.0, 1e-12);
}

TEST(Run, Normalization) {
    for (const char* f : {"tau1.state", "tau2.state"}) {
        const double ell = f[3] == '1' ? 1.0 : 2.0;
        for (const char* b : {"dw", "squashed", "rel-ent"}) {
            SCOPED_TRACE(std::string(f) + " " + b);
            const auto v = values_of(run({"bound", b, fixture(f), "--restarts", "2", "--json"}));
            EXPECT_NEAR(v[b]["value"].get<double>(), ell, 1e-6);
        }
    }
}

TEST(Run, EmbedCcqOfUniqueKIsTheCccState) {
    const auto o = run({"embed", "ccq", fixture("gap.dist")});
    ASSERT_EQ(o.code, 0) << o.err;
    const auto sf = parse_state_file(o.out);
    EXPECT_LT(max_entry_diff(sf.density.matrix(), from_distribution(gap_distribution()).matrix()), 1e-12);
    const auto q = parse_state_file(run({"embed", "qqq", fixture("gap.dist")}).out);
    EXPECT_NEAR((q.density.matrix() * q.density.matrix()).trace().real(), 1.0, 1e-12);
}

TEST(Run, Checks) {
    auto o = run({"check", "commute", fixture("gap.dist"), fixture("gap.protocol")});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_NE(o.out.find("PASS  commutation-distance"), std::string::npos);
    o = run({"check", "unique-k", fixture("gap.dist")});
    EXPECT_NE(o.out.find("PASS  unique-k"), std::string::npos);
    const auto ce = temp_file("ce.dist", emit_state_file(named_state_file("counterexample-dist", 0)));
    o = run({"check", "unique-k", ce});
    EXPECT_NE(o.out.find("FAIL  unique-k"), std::string::npos);
    o = run({"check", "monotone", fixture("tau1.state"), "--restarts", "2"});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_EQ(o.out.find("FAIL"), std::string::npos) << o.out;
}

TEST(Run, DemosPass) {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"demo", "gap"}, {"demo", "bell-lock"}, {"demo", "embed-counterexample"}, {"demo", "flower", "--d", "2"}}) {
        const auto o = run(args);
        SCOPED_TRACE(o.out);
        ASSERT_EQ(o.code, 0) << o.err;
        EXPECT_EQ(o.out.find("FAIL"), std::string::npos);
        EXPECT_NE(o.out.find("PASS"), std::string::npos);
    }
}

TEST(Run, DemoGapMatchesGolden) {
    const auto o = run({"demo", "gap"});
    ASSERT_EQ(o.code, 0);
    EXPECT_EQ(o.out, slurp(fixture("golden/demo_gap.txt")));
    for (const char* name : {"\nintrinsic ", "\nintrinsic-with-l ", "\nreduced "}) EXPECT_NE(o.out.find(name), std::string::npos);
}

TEST(Run, ExitCodes) {
    EXPECT_EQ(run({}).code, kUsage);
    EXPECT_EQ(run({"frobnicate"}).code, kUsage);
    EXPECT_EQ(run({"bound", "nonsense", fixture("tau1.state")}).code, kUsage);
    EXPECT_EQ(run({"bound", "dw", fixture("missing.state")}).code, kUsage);
    EXPECT_EQ(run({"bound", "dw", fixture("tau1.state"), "--restarts", "0"}).code, kUsage);
    EXPECT_EQ(run({"bound", "eof", fixture("tau1.state")}).code, kUsage);
    const auto bad = temp_file("bad_trace.state", R"({"kind": "density", "dims": [["A", 1]], "matrix": [[[0.9, 0]]]})");
    const auto o = run({"bound", "dw", bad, "--json"});
    EXPECT_EQ(o.code, kInvariant);
    const auto j = nlohmann::json::parse(o.out);
    EXPECT_EQ(j["error"]["type"], "invariant");
    EXPECT_EQ(run({"entropy", bad}).code, kInvariant);
}

TEST(Binary, ExitCodesAndDeterministicJson) {
    const auto a = run_binary("bound intrinsic " + fixture("bell_lock.state") + " --restarts 2 --seed 7 --json");
    const auto b = run_binary("bound intrinsic " + fixture("bell_lock.state") + " --restarts 2 --seed 7 --json");
    EXPECT_EQ(a.code, 0);
    EXPECT_FALSE(a.out.empty());
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(run_binary("bound dw").code, 2);
    EXPECT_EQ(run_binary("bound dw " + fixture("nope.state")).code, 2);
    const auto bad = temp_file("bad_trace2.state", R"({"kind": "density", "dims": [["A", 1]], "matrix": [[[0.9, 0]]]})");
    EXPECT_EQ(run_binary("entropy " + bad).code, 3);
}
