#include <gtest/gtest.h>

#include <cmath>

#include "skb/bounds/bounds.hpp"
#include "skb/protocols.hpp"

using namespace skb;

namespace {

SharedState tau1() {
    const auto t = ideal_key_state(1, trivial_state());
    return {t, default_parties(t.layout())};
}

ClassicalDistribution ghz() {
    SubsystemLayout layout({"A", "B", "E"}, {2, 2, 2});
    std::vector<double> p(8, 0.0);
    p[0] = 0.5;
    p[7] = 0.5;
    return {layout, p};
}

double max_diff(const ComplexMatrix& a, const ComplexMatrix& b) { return max_entry_diff(a, b); }

}  // namespace

TEST(ProtocolText, RoundTrip) {
    const auto p = gap_protocol();
    ASSERT_EQ(p.steps.size(), 6u);
    const auto again = parse_protocol(format_protocol(p));
    EXPECT_EQ(format_protocol(again), format_protocol(p));
    EXPECT_EQ(p.steps[1].labels, (std::vector<std::string>{"A", "r"}));
    EXPECT_EQ(p.steps[2].kind, StepKind::communicate);
}

TEST(ProtocolText, ShortForms) {
    const auto p = parse_protocol("# comment\n\nrandomize A 0.5,0.5\npermute B 1,0  # flip\n");
    ASSERT_EQ(p.steps.size(), 2u);
    EXPECT_EQ(p.steps[0].labels.at(0), "r3");
    EXPECT_TRUE(p.steps[1].labels.empty());
    EXPECT_EQ(p.steps[1].permutation, (std::vector<std::size_t>{1, 0}));
}

TEST(ProtocolText, Errors) {
    EXPECT_THROW(parse_protocol("shuffle A x"), usage_error);
    EXPECT_THROW(parse_protocol("discard E x"), usage_error);
    EXPECT_THROW(parse_protocol("discard Q x"), usage_error);
    EXPECT_THROW(parse_protocol("permute A x 0,0"), usage_error);
    EXPECT_THROW(parse_protocol("randomize A r 0.5,abc"), usage_error);
    EXPECT_THROW(parse_protocol("communicate A"), usage_error);
}

TEST(ClassicalProtocol, EmptyIsIdentity) {
    const auto s = tau1();
    const auto out = apply_classical_protocol(s, Protocol{});
    EXPECT_EQ(max_diff(out.state.matrix(), s.state.matrix()), 0.0);
}

TEST(ClassicalProtocol, PublishingTheKeyDestroysSecrecy) {
    const auto s = tau1();
    const auto out = apply_classical_protocol(s, parse_protocol("communicate A A"));
    const auto& lay = out.state.layout();
    EXPECT_EQ(lay.labels(), (std::vector<std::string>{"A", "B", "E", "A@B", "A@E"}));
    EXPECT_EQ(out.owner.at("A@E"), Party::eve);
    EXPECT_EQ(out.owner.at("A@B"), Party::bob);
    EXPECT_NEAR(out.state.matrix().trace().real(), 1.0, 1e-14);
    out.state.validate();
    const auto tri = out.tripartite();
    EXPECT_NEAR(conditional_mutual_information(tri, {"A"}, {"B"}, {"E"}), 0.0, 1e-12);
    EXPECT_NEAR(conditional_mutual_information(s.state, {"A"}, {"B"}, {"E"}), 1.0, 1e-12);
    // the copies agree with the original
    const auto pair = out.state.reduced({"A", "A@E"});
    EXPECT_NEAR(pair.matrix()(0, 0).real(), 0.5, 1e-14);
    EXPECT_NEAR(pair.matrix()(3, 3).real(), 0.5, 1e-14);
}

TEST(ClassicalProtocol, StepErrors) {
    const auto s = tau1();
    EXPECT_THROW(apply_classical_protocol(s, parse_protocol("discard A B")), usage_error);
    EXPECT_THROW(apply_classical_protocol(s, parse_protocol("discard A Z")), usage_error);
    EXPECT_THROW(apply_classical_protocol(s, parse_protocol("permute A 0,1,2")), usage_error);
    EXPECT_THROW(apply_classical_protocol(s, parse_protocol("randomize A A 1")), usage_error);
    EXPECT_THROW(apply_classical_protocol(s, parse_protocol("communicate A A\ncommunicate A A")), usage_error);
    const auto b = bell_state();
    const SharedState q{tensor(b, trivial_state()), default_parties(tensor(b, trivial_state()).layout())};
    EXPECT_THROW(apply_classical_protocol(q, parse_protocol("communicate A A")), usage_error);
    EXPECT_THROW(apply_classical_protocol(q, parse_protocol("permute A 1,0")), usage_error);
}

TEST(ClassicalProtocol, GapProtocolMatchesExplicitEvolution) {
    const auto p = gap_distribution();
    const SharedState s = named_example("gap");
    const auto out = apply_classical_protocol(s, gap_protocol());
    ASSERT_EQ(out.state.layout().labels(), (std::vector<std::string>{"A", "B", "E", "F", "r@E"}));
    ComplexMatrix want(128, 128);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b)
            for (std::size_t e = 0; e < 2; ++e)
                for (std::size_t f = 0; f < 2; ++f)
                    for (std::size_t r = 0; r < 2; ++r) {
                        const std::size_t idx = ((((a ^ r) * 4 + (b ^ r)) * 2 + e) * 2 + f) * 2 + r;
                        want(idx, idx) += 0.5 * p.at({a, b, e, f});
                    }
    EXPECT_LT(max_diff(out.state.matrix(), want), 1e-12);
    EXPECT_EQ(out.owner.at("r@E"), Party::eve);
}

TEST(ClassicalProtocol, RandomProtocolsAreValid) {
    const auto s = named_example("gap");
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto proto = random_protocol(seed, s.state.layout(), s.owner);
        ASSERT_EQ(proto.steps.size(), 3u);
        const auto out = apply_classical_protocol(s, proto);
        EXPECT_NEAR(out.state.matrix().trace().real(), 1.0, 1e-12);
        EXPECT_LE(out.state.dim(), 512u);
        EXPECT_EQ(format_protocol(parse_protocol(format_protocol(proto))), format_protocol(proto));
    }
}

TEST(CoherentVersion, StepMapping) {
    const auto c = coherent_version(gap_protocol());
    ASSERT_EQ(c.steps.size(), 6u);
    EXPECT_EQ(c.steps[0].kind, CoherentKind::attach_superposition);
    EXPECT_EQ(c.steps[1].kind, CoherentKind::permutation_unitary);
    EXPECT_EQ(c.steps[2].kind, CoherentKind::cnot_fanout);
    EXPECT_EQ(c.steps[4].kind, CoherentKind::transfer_to_eve);
}

TEST(CoherentVersion, StaysPure) {
    const auto p = gap_distribution();
    const SharedState q{qqq_embed(p), default_parties(p.layout())};
    const auto out = apply_coherent_protocol(q, coherent_version(gap_protocol()));
    const auto& m = out.state.state.matrix();
    EXPECT_NEAR((m * m).trace().real(), 1.0, 1e-12);
    EXPECT_EQ(out.transferred, (std::vector<std::string>{"r", "r@B"}));
    EXPECT_EQ(out.state.owner.at("r"), Party::eve);
}

TEST(Commutation, EmptyProtocol) { EXPECT_LT(commutation_check(ghz(), Protocol{}), 1e-14); }

TEST(Commutation, GapProtocol) { EXPECT_LT(commutation_check(gap_distribution(), gap_protocol()), 1e-10); }

TEST(Commutation, RandomProtocols) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        auto rng = make_rng(seed, 77);
        const auto p = random_distribution(SubsystemLayout({"A", "B", "E"}, {2 + uniform_index(rng, 2), 2, 2}), rng);
        const auto proto = random_protocol(seed, p.layout(), default_parties(p.layout()));
        EXPECT_LT(commutation_check(p, proto), 1e-10) << format_protocol(proto);
    }
}

TEST(Commutation, CommunicateOnly) {
    auto rng = make_rng(3);
    const auto p = random_unique_k_distribution(2, 3, 2, rng);
    EXPECT_LT(commutation_check(p, parse_protocol("communicate A A\ncommunicate B B")), 1e-10);
}

TEST(KeyQuality, IdealKey) {
    EXPECT_LT(key_quality(ideal_key_state(1, trivial_state()), 1), 1e-14);
    EXPECT_LT(key_quality(ideal_key_state(2, maximally_mixed(3)), 2), 1e-14);
    EXPECT_THROW(key_quality(ideal_key_state(1, trivial_state()), 2), usage_error);
}

TEST(KeyQuality, MeasuredPrivateState) {
    auto rng = make_rng(11);
    const auto shield = random_state(SubsystemLayout({"A'", "B'"}, {2, 2}), rng);
    const auto gamma = twisted_key_state(1, {random_unitary(4, rng), random_unitary(4, rng)}, shield);
    const auto pur = purify(gamma, "E");
    const auto full = pure_state(pur.layout, pur.vector);
    auto ccq = dephase(full.reduced({"A", "B", "E"}), std::vector<std::string>{"A", "B"});
    EXPECT_LT(key_quality(ccq, 1), 1e-10);
}

TEST(KeyQuality, CounterexampleIsDistinguishable) {
    // Alice's A' dropped: ½|00><00|⊗|+><+| + ½|11><11|⊗I/2
    const auto v = embed_counterexample_vector();
    const auto rho = pure_state(embed_counterexample_layout(), v).reduced({"A", "B", "E"});
    const auto ccq = dephase(rho, std::vector<std::string>{"A", "B"});
    EXPECT_NEAR(key_quality(ccq, 1), 0.25, 1e-12);
}

TEST(Lopc, Deterministic) {
    auto rng = make_rng(2);
    const auto r = random_ccq_state(2, 2, 2, rng);
    const SharedState s{r, default_parties(r.layout())};
    const auto a = random_lopc_operation(9, s), b = random_lopc_operation(9, s);
    EXPECT_EQ(describe(a), describe(b));
    EXPECT_EQ(max_diff(apply_lopc(s, a).state.matrix(), apply_lopc(s, b).state.matrix()), 0.0);
}

TEST(Lopc, PreservesTraceAndNeverTouchesEve) {
    auto rng = make_rng(4);
    const auto r = random_ccq_state(2, 3, 2, rng);
    const SharedState s{r, default_parties(r.layout())};
    std::size_t copies = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto op = random_lopc_operation(seed, s);
        EXPECT_NE(op.party, Party::eve);
        const auto out = apply_lopc(s, op);
        out.state.validate();
        const auto eve_before = s.state.reduced({"E"}).matrix();
        EXPECT_LT(max_diff(out.state.reduced({"E"}).matrix(), eve_before), 1e-12);
        if (op.kind == LopcKind::public_copy) {
            ++copies;
            const auto el = copy_label(op.label, Party::eve);
            EXPECT_EQ(out.owner.at(el), Party::eve);
            // Eve's copy is perfectly correlated with the source register
            const auto pair = out.state.reduced({op.label, el});
            const std::size_t d = s.state.layout().dim_of(op.label);
            const auto src = s.state.reduced({op.label}).matrix();
            for (std::size_t x = 0; x < d; ++x) EXPECT_NEAR(pair.matrix()(x * d + x, x * d + x).real(), src(x, x).real(), 1e-12);
        }
    }
    EXPECT_GT(copies, 0u);
}

TEST(Lopc, CmiIsMonotone) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        auto rng = make_rng(seed, 5);
        const auto r = random_ccq_state(2, 2, 2, rng);
        SharedState s{r, default_parties(r.layout())};
        double prev = conditional_mutual_information(s.tripartite(), {"A"}, {"B"}, {"E"});
        for (std::uint64_t k = 0; k < 3; ++k) {
            s = apply_lopc(s, random_lopc_operation(seed * 10 + k, s));
            const double now = conditional_mutual_information(s.tripartite(), {"A"}, {"B"}, {"E"});
            EXPECT_LE(now, prev + 1e-9);
            prev = now;
        }
    }
}

TEST(Lopc, IntrinsicIsMonotoneWithWarmStarts) {
    OptimizerConfig cfg;
    cfg.seed = 3;
    cfg.restarts = 2;
    cfg.max_iters = 3000;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        auto rng = make_rng(seed, 6);
        const auto r = random_ccq_state(2, 2, 2, rng);
        const SharedState s{r, default_parties(r.layout())};
        const auto before_tri = s.tripartite();
        const auto before = intrinsic_information(before_tri, cfg);
        const std::size_t de = before_tri.layout().dims()[2];
        const auto v = decode_isometry(before.optimizer->best_params, de, de * de);

        const auto op = random_lopc_operation(seed, s);
        const auto after_state = apply_lopc(s, op);
        const auto tri = after_state.tripartite();
        const std::size_t de2 = tri.layout().dims()[2];
        IntrinsicOptions io;
        if (de2 == de) {
            io.warm_starts.push_back(v);
        } else {
            // Eve keeps her copy: V ⊗ I on (E, copy), environment padded
            const std::size_t dc = de2 / de;
            ComplexMatrix w(de2 * de2, de2);
            for (std::size_t e = 0; e < de; ++e)
                for (std::size_t c = 0; c < dc; ++c)
                    for (std::size_t ep = 0; ep < de; ++ep)
                        for (std::size_t t = 0; t < de; ++t) w((ep * dc + c) * de2 + t, e * dc + c) = v(ep * de + t, e);
            io.warm_starts.push_back(w);
        }
        const auto after = intrinsic_information(tri, io, cfg);
        EXPECT_LE(after.value, before.value + 1e-6) << describe(op);
    }
}
