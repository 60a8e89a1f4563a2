#include <gtest/gtest.h>

#include <cmath>

#include "skb/entropy.hpp"
#include "skb/optimize.hpp"

using namespace skb;

namespace {

OptimizerConfig small_cfg(std::uint64_t seed = 7) {
    OptimizerConfig c;
    c.restarts = 4;
    c.max_iters = 4000;
    c.seed = seed;
    return c;
}

// Direct CMI of p(a,b,e') = Σ_e p(a,b,e) W(e'|e) from the gap table with Eve = k.
double gap_cmi_under(const std::vector<double>& w) {
    const auto p = gap_distribution().marginal(std::vector<std::string>{"A", "B", "E"});
    std::vector<double> q(32, 0.0);
    for (std::size_t ab = 0; ab < 16; ++ab)
        for (std::size_t e = 0; e < 2; ++e)
            for (std::size_t f = 0; f < 2; ++f) q[ab * 2 + f] += p.probs()[ab * 2 + e] * w[e * 2 + f];
    return classical_cmi(q, 4, 4, 2);
}

}  // namespace

TEST(Isometry, IdentityColumnsGiveIdentityChannel) {
    const auto raw = encode_isometry(ComplexMatrix::identity(3));
    const auto ch = channel_from_isometry({3, 3, raw}, 3, 1);
    ch.validate();
    EXPECT_LT(max_entry_diff(ch.isometry, ComplexMatrix::identity(3)), 1e-15);
}

TEST(Isometry, OutDimOneTracesOut) {
    auto rng = make_rng(61);
    std::vector<double> raw(IsometryParam::size(2, 2));
    for (auto& x : raw) x = standard_normal(rng);
    const auto ch = channel_from_isometry({2, 2, raw}, 1, 2);
    const auto rho = random_state(SubsystemLayout({"A", "E"}, {2, 2}), rng);
    const auto out = apply_channel(rho, ch, "E");
    EXPECT_LT(max_entry_diff(out.matrix(), partial_trace(rho.matrix(), rho.layout(), {"A"})), 1e-14);
    EXPECT_THROW(channel_from_isometry({2, 4, std::vector<double>(16)}, 3, 1), usage_error);
}

TEST(Isometry, RandomRawIsCptp) {
    auto rng = make_rng(62);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> raw(IsometryParam::size(3, 6));
        for (auto& x : raw) x = standard_normal(rng);
        const auto ch = channel_from_isometry({3, 6, raw}, 2, 3);
        EXPECT_NO_THROW(ch.validate());
        EXPECT_LT(max_entry_diff(ch.isometry.adjoint() * ch.isometry, ComplexMatrix::identity(3)), 1e-10);
    }
}

TEST(Isometry, EncodeDecodeRoundTrip) {
    auto rng = make_rng(63);
    for (int t = 0; t < 50; ++t) {
        const auto v = random_isometry(6, 2 + t % 3, rng);
        const auto back = decode_isometry(encode_isometry(v), v.cols(), v.rows());
        EXPECT_LT(max_entry_diff(back, v), 1e-10);
    }
}

TEST(PovmParam, ComputationalAndTrivial) {
    const auto p = povm_from_isometry({2, 2, encode_isometry(ComplexMatrix::identity(2))}, 2);
    EXPECT_EQ(max_entry_diff(p.elements[0], ComplexMatrix::diagonal(std::vector<double>{1, 0})), 0.0);
    EXPECT_EQ(max_entry_diff(p.elements[1], ComplexMatrix::diagonal(std::vector<double>{0, 1})), 0.0);
    const auto one = povm_from_isometry({2, 2, encode_isometry(ComplexMatrix::identity(2))}, 1);
    ASSERT_EQ(one.elements.size(), 1u);
    EXPECT_LT(max_entry_diff(one.elements[0], ComplexMatrix::identity(2)), 1e-15);
    EXPECT_THROW(povm_from_isometry({2, 4, std::vector<double>(16)}, 3), usage_error);
}

TEST(PovmParam, RandomSumsToIdentity) {
    auto rng = make_rng(64);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> raw(IsometryParam::size(3, 9));
        for (auto& x : raw) x = standard_normal(rng);
        const auto p = povm_from_isometry({3, 9, raw}, 9);
        EXPECT_NO_THROW(p.validate());
        ComplexMatrix s(3, 3);
        for (const auto& e : p.elements) s += e;
        EXPECT_LT(max_entry_diff(s, ComplexMatrix::identity(3)), 1e-9);
    }
}

TEST(Stochastic, Rows) {
    const auto u = stochastic_from_raw(std::vector<double>(6, 0.0), 2, 3);
    for (double x : u) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
    const auto d = stochastic_from_raw(std::vector<double>{50, 0, 0, 0, 0, 50}, 2, 3);
    EXPECT_GT(d[0], 1 - 1e-12);
    EXPECT_GT(d[5], 1 - 1e-12);
    auto rng = make_rng(65);
    std::vector<double> raw(20);
    for (auto& x : raw) x = 3 * standard_normal(rng);
    const auto r = stochastic_from_raw(raw, 4, 5);
    for (std::size_t i = 0; i < 4; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < 5; ++j) {
            EXPECT_GE(r[i * 5 + j], 0.0);
            s += r[i * 5 + j];
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Minimize, ConvexBowl) {
    const std::vector<double> c{1.0, -2.0, 0.5};
    const Objective f = [&](std::span<const double> x) {
        double s = 0;
        for (std::size_t i = 0; i < 3; ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
        return s;
    };
    const auto r = multi_restart_minimize(f, 3, small_cfg());
    EXPECT_LT(r.best_value, 1e-8);
    EXPECT_EQ(r.restarts_run, 4u);
}

TEST(Minimize, StopsAtKnownFloor) {
    const Objective f = [](std::span<const double> x) { return (x[0] - 1) * (x[0] - 1) + x[1] * x[1]; };
    const auto r = multi_restart_minimize(f, 2, small_cfg(), {{1.0, 0.0}}, 0.0);
    EXPECT_EQ(r.restarts_run, 1u);
    EXPECT_EQ(r.best_value, 0.0);
    EXPECT_TRUE(r.converged);
    // a floor that is never reached changes nothing
    const auto a = multi_restart_minimize(f, 2, small_cfg(), {}, -1.0);
    const auto b = multi_restart_minimize(f, 2, small_cfg());
    EXPECT_EQ(a.restart_values, b.restart_values);
}

TEST(Minimize, Constant) {
    const Objective f = [](std::span<const double>) { return 3.25; };
    auto cfg = small_cfg();
    const auto r = multi_restart_minimize(f, 5, cfg);
    EXPECT_EQ(r.best_value, 3.25);
    EXPECT_TRUE(r.converged);
}

TEST(Minimize, NonFiniteThrows) {
    const Objective f = [](std::span<const double> x) { return x[0] > 0.1 ? NAN : x[0]; };
    EXPECT_THROW(multi_restart_minimize(f, 1, small_cfg()), numeric_error);
}

TEST(Minimize, BestNotAboveStartPoints) {
    const Objective f = [](std::span<const double> x) { return std::sin(3 * x[0]) + 0.1 * x[0] * x[0] + std::cos(2 * x[1]); };
    const std::vector<std::vector<double>> starts{{0.3, 0.2}, {-1.0, 2.0}};
    const auto r = multi_restart_minimize(f, 2, small_cfg(), starts);
    for (const auto& s : starts) EXPECT_LE(r.best_value, f(s));
    EXPECT_EQ(r.restarts_run, 6u);
    EXPECT_EQ(r.best_value, *std::min_element(r.restart_values.begin(), r.restart_values.end()));
}

TEST(Minimize, DeterministicAndOrderIndependent) {
    const Objective f = [](std::span<const double> x) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += std::cos(x[i] * (i + 1)) + 0.05 * x[i] * x[i];
        return s;
    };
    const auto a = multi_restart_minimize(f, 4, small_cfg(99));
    const auto b = multi_restart_minimize(f, 4, small_cfg(99));
    EXPECT_EQ(a.best_value, b.best_value);
    EXPECT_EQ(a.best_params, b.best_params);
    EXPECT_EQ(a.restart_values, b.restart_values);
    auto more = small_cfg(99);
    more.restarts = 8;
    const auto c = multi_restart_minimize(f, 4, more);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(c.restart_values[i], a.restart_values[i]);
    EXPECT_LE(c.best_value, a.best_value);
}

TEST(Minimize, RejectsBadConfig) {
    OptimizerConfig c;
    c.restarts = 0;
    EXPECT_THROW(c.validate(), usage_error);
    c.restarts = 1;
    c.tol = 0;
    EXPECT_THROW(c.validate(), usage_error);
}

TEST(Minimize, GapClassicalIntrinsicMatchesGridOracle) {
    // grid oracle over 2x2 stochastic maps, step 1/64
    double grid = 1e9;
    for (int a = 0; a <= 64; ++a)
        for (int b = 0; b <= 64; ++b) {
            const double s = a / 64.0, t = b / 64.0;
            grid = std::min(grid, gap_cmi_under({s, 1 - s, t, 1 - t}));
        }
    const Objective f = [](std::span<const double> x) { return gap_cmi_under(stochastic_from_raw(x, 2, 2)); };
    auto cfg = small_cfg(3);
    cfg.restarts = 20;
    const auto r = multi_restart_minimize(f, 4, cfg);
    EXPECT_NEAR(r.best_value, grid, 1e-3);
    EXPECT_NEAR(grid, 1.5, 1e-12);
}
