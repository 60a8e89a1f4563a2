// Seeded samplers for states, channels and distributions (test and demo support).
#pragma once

#include <cstdint>
#include <random>

#include "skb/states.hpp"

namespace skb {

using Rng = std::mt19937_64;

// Independent stream for (seed, stream) pairs.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x5eedu};
    return Rng(seq);
}

inline double standard_normal(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return n(rng);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline ComplexMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    ComplexMatrix g(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const double re = standard_normal(rng);
            g(i, j) = cplx(re, standard_normal(rng));
        }
    return g;
}

// Haar-distributed isometry from `in` to `out` dimensions.
inline ComplexMatrix random_isometry(std::size_t out, std::size_t in, Rng& rng) {
    return orthonormalize_columns(gaussian_matrix(out, in, rng));
}

inline ComplexMatrix random_unitary(std::size_t d, Rng& rng) { return random_isometry(d, d, rng); }

inline ComplexVector random_pure_vector(std::size_t d, Rng& rng) { return random_isometry(d, 1, rng).column(0); }

// W W† / Tr with W a d×rank Ginibre matrix.
inline ComplexMatrix random_density_matrix(std::size_t d, Rng& rng, std::size_t rank = 0) {
    if (rank == 0) rank = d;
    const auto w = gaussian_matrix(d, rank, rng);
    auto m = w * w.adjoint();
    m *= 1.0 / m.trace().real();
    for (std::size_t i = 0; i < d; ++i) m(i, i) = m(i, i).real();
    return m;
}

inline DensityState random_state(const SubsystemLayout& layout, Rng& rng, std::size_t rank = 0) {
    return DensityState(layout, random_density_matrix(layout.total_dim(), rng, rank));
}

inline QuantumChannel random_channel(std::size_t in, std::size_t out, std::size_t env, Rng& rng) {
    return {in, out, env, random_isometry(out * env, in, rng)};
}

inline std::vector<double> random_probability_vector(std::size_t n, Rng& rng) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> p(n);
    double s = 0;
    for (auto& x : p) s += (x = e(rng));
    for (auto& x : p) x /= s;
    return p;
}

inline ClassicalDistribution random_distribution(const SubsystemLayout& layout, Rng& rng) {
    return {layout, random_probability_vector(layout.total_dim(), rng)};
}

// p_{ijk} with k a (random) function of (i,j); a random subset of (i,j) cells is left empty.
inline ClassicalDistribution random_unique_k_distribution(std::size_t na, std::size_t nb, std::size_t ne, Rng& rng) {
    SubsystemLayout layout({"A", "B", "E"}, {na, nb, ne});
    std::vector<double> p(layout.total_dim(), 0.0);
    std::exponential_distribution<double> e(1.0);
    double s = 0;
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j) {
            if (uniform01(rng) < 0.25) continue;
            const std::size_t k = uniform_index(rng, ne);
            const double w = e(rng);
            p[(i * nb + j) * ne + k] = w;
            s += w;
        }
    if (s == 0) {
        p[0] = 1;
        s = 1;
    }
    for (auto& x : p) x /= s;
    return {std::move(layout), std::move(p)};
}

// Σ p_ab |ab><ab| ⊗ ρ_E^{ab} with random p and random mixed ρ_E^{ab}; A, B classical.
inline DensityState random_ccq_state(std::size_t na, std::size_t nb, std::size_t ne, Rng& rng) {
    const auto p = random_probability_vector(na * nb, rng);
    ComplexMatrix m(na * nb * ne, na * nb * ne);
    for (std::size_t x = 0; x < na * nb; ++x) {
        const auto r = random_density_matrix(ne, rng, 1 + uniform_index(rng, ne));
        for (std::size_t a = 0; a < ne; ++a)
            for (std::size_t b = 0; b < ne; ++b) m(x * ne + a, x * ne + b) = p[x] * r(a, b);
    }
    return DensityState(SubsystemLayout({"A", "B", "E"}, {na, nb, ne}), std::move(m), {"A", "B"});
}

}  // namespace skb
