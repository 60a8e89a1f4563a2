// Accessible information of ensembles, the separable-ensemble bound, and the
// entanglement of formation induced by measurements on Eve's purifying system.
#pragma once

#include <cmath>
#include <optional>

#include "skb/bounds/estimate.hpp"
#include "skb/entropy.hpp"

namespace skb {

struct AccessibleOptions {
    std::size_t n_outcomes = 0;  // 0: d²
};

namespace detail {

// P(m|x) = <m|V ρ_x V†|m> for a rank-one POVM given by the isometry V: d -> n.
inline double outcome_information(const Ensemble& ens, const ComplexMatrix& v) {
    const std::size_t n = v.rows(), d = v.cols(), nx = ens.probs.size();
    std::vector<double> joint(nx * n, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
        const auto& r = ens.states[x];
        for (std::size_t m = 0; m < n; ++m) {
            cplx acc = 0;
            for (std::size_t a = 0; a < d; ++a) {
                if (v(m, a) == cplx(0)) continue;
                cplx row = 0;
                for (std::size_t b = 0; b < d; ++b) row += r(a, b) * std::conj(v(m, b));
                acc += v(m, a) * row;
            }
            joint[x * n + m] = ens.probs[x] * std::max(0.0, acc.real());
        }
    }
    return classical_mutual_information(joint, nx, n);
}

// Rank-one refinement of the pretty-good measurement ρ̄^{-1/2} p_x ρ_x ρ̄^{-1/2}, padded with the
// kernel of ρ̄; empty if it needs more than n outcomes.
inline std::optional<ComplexMatrix> pretty_good_isometry(const Ensemble& ens, const ComplexMatrix& avg, std::size_t n) {
    const std::size_t d = ens.dim();
    const auto es = hermitian_eig(avg);
    ComplexMatrix inv_sqrt(d, d);
    std::vector<ComplexVector> rows;
    for (std::size_t k = 0; k < d; ++k) {
        const auto u = es.eigenvectors.column(k);
        if (es.eigenvalues[k] > 1e-12) inv_sqrt += ComplexMatrix::projector(u) * (1.0 / std::sqrt(es.eigenvalues[k]));
        else rows.push_back(u);
    }
    for (std::size_t x = 0; x < ens.probs.size(); ++x) {
        const auto e = inv_sqrt * ens.states[x] * inv_sqrt * ens.probs[x];
        const auto ex = hermitian_eig(e);
        for (std::size_t k = 0; k < d; ++k) {
            if (ex.eigenvalues[k] <= 1e-12) continue;
            auto u = ex.eigenvectors.column(k);
            for (auto& z : u) z *= std::sqrt(ex.eigenvalues[k]);
            rows.push_back(std::move(u));
        }
    }
    if (rows.size() > n) return std::nullopt;
    ComplexMatrix v(n, d);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t i = 0; i < d; ++i) v(r, i) = std::conj(rows[r][i]);
    return v;
}

}  // namespace detail

// max I(X:M) over rank-one POVMs with n outcomes (Naimark isometry d -> n).
inline BoundEstimate accessible_information(const Ensemble& ens, const AccessibleOptions& opt, const OptimizerConfig& cfg) {
    ens.validate();
    const std::size_t d = ens.dim();
    const std::size_t n = opt.n_outcomes ? opt.n_outcomes : d * d;
    if (n < d) throw usage_error("accessible information: n_outcomes must be at least the dimension");
    BoundEstimate est;
    est.name = "acc";
    est.direction = Direction::lower_bound;
    est.parameters = {{"n_outcomes", double(n)}};

    const Objective f = [&](std::span<const double> x) { return -detail::outcome_information(ens, decode_isometry(x, d, n)); };
    ComplexMatrix avg(d, d);
    for (std::size_t x = 0; x < ens.probs.size(); ++x) avg += ens.states[x] * ens.probs[x];
    const auto eig = hermitian_eig(avg).eigenvectors;
    // outcome j of ebt projects onto eigenvector u_j
    ComplexMatrix comp(n, d), ebt(n, d);
    for (std::size_t j = 0; j < d; ++j) {
        comp(j, j) = 1;
        for (std::size_t i = 0; i < d; ++i) ebt(j, i) = std::conj(eig(i, j));
    }
    std::vector<std::vector<double>> starts{encode_isometry(comp), encode_isometry(ebt)};
    const auto pgm = detail::pretty_good_isometry(ens, avg, n);
    if (pgm) starts.push_back(encode_isometry(*pgm));
    // Holevo quantity, an upper bound on the objective
    double holevo = von_neumann_entropy(avg);
    for (std::size_t x = 0; x < ens.probs.size(); ++x) holevo -= ens.probs[x] * von_neumann_entropy(ens.states[x]);
    auto outcome = multi_restart_minimize(f, IsometryParam::size(d, n), cfg, starts, -holevo);
    est.value = -outcome.best_value;
    const char* names[] = {"computational basis", "average-state eigenbasis", "pretty-good measurement"};
    est.witness = outcome.best_restart < starts.size() ? names[outcome.best_restart] : "optimized POVM";
    est.optimizer = std::move(outcome);
    return est;
}

inline BoundEstimate accessible_information(const Ensemble& ens, const OptimizerConfig& cfg) {
    return accessible_information(ens, AccessibleOptions{}, cfg);
}

struct ProductMember {
    double p = 0;
    ComplexMatrix a, b;
};

// Joint-measurement accessible information of {p_i, ρ_A^i ⊗ ρ_B^i}.
inline BoundEstimate separable_upper_bound(const std::vector<ProductMember>& members, const AccessibleOptions& opt,
                                           const OptimizerConfig& cfg) {
    Ensemble ens;
    for (const auto& m : members) {
        ens.probs.push_back(m.p);
        ens.states.push_back(kron(m.a, m.b));
    }
    auto est = accessible_information(ens, opt, cfg);
    est.name = "separable-acc";
    est.direction = Direction::upper_estimate;
    return est;
}

inline BoundEstimate separable_upper_bound(const std::vector<ProductMember>& members, const OptimizerConfig& cfg) {
    return separable_upper_bound(members, AccessibleOptions{}, cfg);
}

// min over rank-one measurements on E of Σ_m p_m S(A)_{φ_m}, where φ_m are the pure
// states of AB left by outcome m on the qqq embedding.
inline BoundEstimate eof_induced(const ClassicalDistribution& p, const AccessibleOptions& opt, const OptimizerConfig& cfg) {
    detail::require_parts(p, 3, "eof");
    if (!check_unique_k(p)) throw usage_error("eof: distribution violates the unique-k condition");
    const std::size_t da = p.layout().dims()[0], db = p.layout().dims()[1], de = p.layout().dims()[2], dab = da * db;
    const std::size_t n = opt.n_outcomes ? opt.n_outcomes : de * de;
    if (n < de) throw usage_error("eof: n_outcomes must be at least |E|");
    const auto psi = qqq_vector(p);

    BoundEstimate est;
    est.name = "eof";
    est.direction = Direction::upper_estimate;
    est.parameters = {{"n_outcomes", double(n)}};

    auto value = [&](const ComplexMatrix& v) {
        double total = 0;
        ComplexMatrix phi(da, db);
        for (std::size_t m = 0; m < n; ++m) {
            double w = 0;
            for (std::size_t ab = 0; ab < dab; ++ab) {
                cplx acc = 0;
                for (std::size_t e = 0; e < de; ++e) acc += v(m, e) * psi[ab * de + e];
                phi(ab / db, ab % db) = acc;
                w += std::norm(acc);
            }
            if (w <= 1e-15) continue;
            const auto ra = phi * phi.adjoint();
            total += w * von_neumann_entropy(ra * (1.0 / w));
        }
        return total;
    };
    const Objective f = [&](std::span<const double> x) { return value(decode_isometry(x, de, n)); };
    ComplexMatrix comp(n, de);
    for (std::size_t e = 0; e < de; ++e) comp(e, e) = 1;
    auto outcome = multi_restart_minimize(f, IsometryParam::size(de, n), cfg, {encode_isometry(comp)}, 0.0);
    est.value = outcome.best_value;
    est.witness = outcome.best_restart == 0 ? "computational measurement" : "optimized measurement";
    est.optimizer = std::move(outcome);
    return est;
}

inline BoundEstimate eof_induced(const ClassicalDistribution& p, const OptimizerConfig& cfg) {
    return eof_induced(p, AccessibleOptions{}, cfg);
}

}  // namespace skb
