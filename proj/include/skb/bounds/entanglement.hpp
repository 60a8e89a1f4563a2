// Squashed entanglement and relative entropy of entanglement of bipartite states.
#pragma once

#include <algorithm>
#include <cmath>

#include "skb/bounds/intrinsic.hpp"

namespace skb {

inline constexpr std::size_t kRelEntParamCap = 300;

namespace detail {

// Schmidt decomposition of a vector on (dA, dB): weights s_i² and unit vectors u_i, v_i.
struct Schmidt {
    std::vector<double> weights;
    std::vector<ComplexVector> left, right;
};

inline Schmidt schmidt(std::span<const cplx> psi, std::size_t da, std::size_t db) {
    ComplexMatrix m(da, db);
    for (std::size_t a = 0; a < da; ++a)
        for (std::size_t b = 0; b < db; ++b) m(a, b) = psi[a * db + b];
    const auto es = hermitian_eig(m * m.adjoint());
    Schmidt s;
    for (std::size_t i = 0; i < da; ++i) {
        const double w = es.eigenvalues[i];
        if (w <= 1e-14) continue;
        ComplexVector u = es.eigenvectors.column(i), v(db, 0.0);
        for (std::size_t b = 0; b < db; ++b)
            for (std::size_t a = 0; a < da; ++a) v[b] += m(a, b) * std::conj(u[a]);
        for (auto& z : v) z /= std::sqrt(w);
        s.weights.push_back(w);
        s.left.push_back(std::move(u));
        s.right.push_back(std::move(v));
    }
    return s;
}

// D(ρ||σ) with σ's eigenvalues floored at 1e-15, for use as a smooth objective.
inline double floored_relative_entropy(const ComplexMatrix& rho, double s_rho, const ComplexMatrix& sigma) {
    const auto es = hermitian_eig(sigma);
    double cross = 0;
    const std::size_t d = rho.rows();
    for (std::size_t k = 0; k < d; ++k) {
        const double l = std::max(es.eigenvalues[k], 1e-15);
        cplx w = 0;
        for (std::size_t i = 0; i < d; ++i) {
            cplx ri = 0;
            for (std::size_t j = 0; j < d; ++j) ri += rho(i, j) * es.eigenvectors(j, k);
            w += std::conj(es.eigenvectors(i, k)) * ri;
        }
        cross += w.real() * std::log2(l);
    }
    return -s_rho - cross;
}

inline ComplexMatrix partial_transpose_b(const ComplexMatrix& m, std::size_t da, std::size_t db) {
    ComplexMatrix t(m.rows(), m.cols());
    for (std::size_t a = 0; a < da; ++a)
        for (std::size_t b = 0; b < db; ++b)
            for (std::size_t a2 = 0; a2 < da; ++a2)
                for (std::size_t b2 = 0; b2 < db; ++b2) t(a * db + b, a2 * db + b2) = m(a * db + b2, a2 * db + b);
    return t;
}

inline bool is_ppt(const ComplexMatrix& m, std::size_t da, std::size_t db) {
    return hermitian_eigenvalues(partial_transpose_b(m, da, db)).back() >= -1e-13;
}

}  // namespace detail

// Restricts each side of a bipartite state to the support of its marginal.
inline DensityState compress_local_supports(const DensityState& rho) {
    detail::require_parts(rho, 2, "compress_local_supports");
    const auto& l = rho.layout().labels();
    std::vector<ComplexMatrix> proj;
    std::vector<std::size_t> dims;
    for (std::size_t side = 0; side < 2; ++side) {
        const auto marg = partial_trace(rho.matrix(), rho.layout(), std::vector<std::string>{l[side]});
        const auto es = hermitian_eig(marg);
        std::size_t r = 0;
        while (r < es.eigenvalues.size() && es.eigenvalues[r] > 1e-12) ++r;
        r = std::max<std::size_t>(r, 1);
        ComplexMatrix p(r, marg.rows());
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < marg.rows(); ++j) p(i, j) = std::conj(es.eigenvectors(j, i));
        proj.push_back(std::move(p));
        dims.push_back(r);
    }
    const auto k = kron(proj[0], proj[1]);
    auto m = k * rho.matrix() * k.adjoint();
    const double tr = m.trace().real();
    m *= 1.0 / tr;
    return DensityState::unchecked(SubsystemLayout(l, dims), std::move(m));
}

// ---------------------------------------------------------------------------
// Squashed entanglement

struct SquashedOptions {
    std::size_t ext_dim = 4;
};

// ½ inf I(A:B|E) over extensions obtained by a channel R -> E on a purification.
inline BoundEstimate squashed_entanglement(const DensityState& rho, const SquashedOptions& opt, const OptimizerConfig& cfg) {
    detail::require_parts(rho, 2, "squashed");
    if (opt.ext_dim < 1) throw usage_error("squashed: ext_dim must be >= 1");
    const std::size_t da = rho.layout().dims()[0], db = rho.layout().dims()[1], dab = da * db;
    const auto pur = purify(rho, "R#");
    const std::size_t r = pur.layout.dims().back();
    const std::size_t de = opt.ext_dim;

    BoundEstimate est;
    est.name = "squashed";
    est.direction = Direction::upper_estimate;
    est.parameters = {{"ext_dim", double(de)}, {"env_dim", double(r)}};

    const SubsystemLayout ab({"A", "B"}, {da, db});
    if (r == 1) {
        // pure: every extension is a product, so E_sq = ½ I(A:B) = S(A)
        est.value = 0.5 * mutual_information(rho.matrix(), ab, std::vector<std::string>{"A"}, std::vector<std::string>{"B"});
        est.witness = "pure state";
        return est;
    }
    // extension (I ⊗ V)|ψ> on A B E env with V: R -> E ⊗ env
    const SubsystemLayout pure({"A", "B", "E", "env"}, {da, db, de, r});
    const detail::PureCmiFn cmi(pure, {"A"}, {"B"}, {"E"});
    const Objective f = [&](std::span<const double> x) {
        return 0.5 * cmi(detail::apply_middle(pur.vector, dab, r, 1, decode_isometry(x, r, de * r)));
    };
    std::vector<std::vector<double>> starts;
    starts.push_back(encode_isometry(detail::discard_embedding(r, de, r)));
    if (de >= r) starts.push_back(encode_isometry(detail::identity_embedding(r, de, r)));
    auto outcome = multi_restart_minimize(f, IsometryParam::size(r, de * r), cfg, starts, 0.0);
    est.value = outcome.best_value;
    est.witness = outcome.best_restart == 0 ? "trivial extension" : "optimized extension";
    est.optimizer = std::move(outcome);
    return est;
}

inline BoundEstimate squashed_entanglement(const DensityState& rho, const OptimizerConfig& cfg) {
    return squashed_entanglement(rho, SquashedOptions{}, cfg);
}

// ---------------------------------------------------------------------------
// Relative entropy of entanglement

struct RelEntOptions {
    std::size_t ensemble_size = 0;  // 0: (d_A d_B)², reduced to fit kRelEntParamCap
    bool optimize = true;           // false: closed-form candidates only
};

// min D(ρ||σ) over separable σ = Σ_t q_t |a_t b_t><a_t b_t|, plus closed-form candidates.
inline BoundEstimate relative_entropy_of_entanglement(const DensityState& rho, const RelEntOptions& opt, const OptimizerConfig& cfg) {
    detail::require_parts(rho, 2, "rel-ent");
    const std::size_t da = rho.layout().dims()[0], db = rho.layout().dims()[1], dab = da * db;
    const std::size_t per = 2 * da + 2 * db + 1;
    std::size_t t_count = opt.ensemble_size ? opt.ensemble_size : dab * dab;
    const std::size_t requested = t_count;
    if (!opt.ensemble_size) t_count = std::max<std::size_t>(1, std::min(t_count, kRelEntParamCap / per));

    BoundEstimate est;
    est.name = "rel-ent";
    est.direction = Direction::upper_estimate;
    est.parameters = {{"ensemble_size", double(t_count)}};
    if (t_count != requested) est.parameters["ensemble_size_requested"] = double(requested);

    const auto& m = rho.matrix();
    const SubsystemLayout& layout = rho.layout();
    const double s_rho = von_neumann_entropy(m);

    double best = std::numeric_limits<double>::infinity();
    std::string witness;
    auto consider = [&](const ComplexMatrix& sigma, const char* name) {
        const double v = relative_entropy(m, sigma);
        if (v < best) {
            best = v;
            witness = name;
        }
    };

    // closed-form candidates
    consider(ComplexMatrix::identity(dab) * (1.0 / double(dab)), "maximally mixed");
    std::vector<double> diag(dab);
    for (std::size_t i = 0; i < dab; ++i) diag[i] = m(i, i).real();
    consider(ComplexMatrix::diagonal(diag), "computational dephasing");

    const auto ua = hermitian_eig(partial_trace(m, layout, std::vector<std::string>{layout.labels()[0]})).eigenvectors;
    const auto ub = hermitian_eig(partial_trace(m, layout, std::vector<std::string>{layout.labels()[1]})).eigenvectors;
    const auto u = kron(ua, ub);
    const auto rot = u.adjoint() * m * u;
    std::vector<double> local(dab);
    for (std::size_t i = 0; i < dab; ++i) local[i] = rot(i, i).real();
    const auto local_sigma = u * ComplexMatrix::diagonal(local) * u.adjoint();
    consider(local_sigma, "local eigenbasis dephasing");

    // up to 2x3 PPT states are separable: move each candidate towards ρ up to the PPT boundary
    if (dab <= 6) {
        const std::pair<ComplexMatrix, const char*> bases[] = {
            {ComplexMatrix::identity(dab) * (1.0 / double(dab)), "PPT boundary towards maximally mixed"},
            {ComplexMatrix::diagonal(diag), "PPT boundary towards computational dephasing"},
            {local_sigma, "PPT boundary towards local dephasing"}};
        for (const auto& [base, name] : bases) {
            auto mix = [&](double s) { return m * s + base * (1.0 - s); };
            double lo = 0, hi = 1;
            if (detail::is_ppt(mix(1), da, db)) lo = 1;
            else
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (detail::is_ppt(mix(mid), da, db) ? lo : hi) = mid;
                }
            consider(mix(lo), name);
        }
    }

    const auto es = hermitian_eig(m);
    const bool pure = es.eigenvalues.size() < 2 || es.eigenvalues[1] <= 1e-12;
    if (pure) {
        const auto sch = detail::schmidt(es.eigenvectors.column(0), da, db);
        ComplexMatrix sigma(dab, dab);
        for (std::size_t i = 0; i < sch.weights.size(); ++i) {
            const auto v = kron(sch.left[i], sch.right[i]);
            sigma += ComplexMatrix::projector(v) * sch.weights[i];
        }
        consider(sigma, "Schmidt dephasing");
        // for pure states E_R = S(A), attained by the Schmidt candidate
        est.value = best;
        est.witness = witness;
        return est;
    }
    if (!opt.optimize) {
        est.parameters["optimized"] = 0;
        est.value = best;
        est.witness = witness;
        return est;
    }

    auto decode = [&](std::span<const double> x) {
        ComplexMatrix sigma(dab, dab);
        double norm = 0;
        for (std::size_t t = 0; t < t_count; ++t) norm += x[t * per] * x[t * per];
        if (norm <= 0) return ComplexMatrix::identity(dab) * (1.0 / double(dab));
        ComplexVector a(da), b(db);
        for (std::size_t t = 0; t < t_count; ++t) {
            const double* p = &x[t * per];
            const double q = p[0] * p[0] / norm;
            if (q == 0) continue;
            double na = 0, nb = 0;
            for (std::size_t i = 0; i < da; ++i) {
                a[i] = cplx(p[1 + 2 * i], p[2 + 2 * i]);
                na += std::norm(a[i]);
            }
            for (std::size_t i = 0; i < db; ++i) {
                b[i] = cplx(p[1 + 2 * da + 2 * i], p[2 + 2 * da + 2 * i]);
                nb += std::norm(b[i]);
            }
            if (na <= 0 || nb <= 0) continue;
            const double scale = q / (na * nb);
            for (std::size_t i = 0; i < dab; ++i)
                for (std::size_t j = 0; j < dab; ++j)
                    sigma(i, j) += scale * a[i / db] * b[i % db] * std::conj(a[j / db] * b[j % db]);
        }
        return sigma;
    };
    // product-basis-diagonal σ as parameters: term (i, j) -> |u_i>|v_j>
    auto encode_diagonal = [&](const ComplexMatrix& ba, const ComplexMatrix& bb, const std::vector<double>& w) {
        std::vector<double> x(t_count * per, 0.0);
        for (std::size_t k = 0; k < dab; ++k) {
            double* p = &x[k * per];
            p[0] = std::sqrt(std::max(0.0, w[k]));
            for (std::size_t i = 0; i < da; ++i) {
                p[1 + 2 * i] = ba(i, k / db).real();
                p[2 + 2 * i] = ba(i, k / db).imag();
            }
            for (std::size_t i = 0; i < db; ++i) {
                p[1 + 2 * da + 2 * i] = bb(i, k % db).real();
                p[2 + 2 * da + 2 * i] = bb(i, k % db).imag();
            }
        }
        return x;
    };
    std::vector<std::vector<double>> starts;
    if (t_count >= dab) {
        starts.push_back(encode_diagonal(ComplexMatrix::identity(da), ComplexMatrix::identity(db), std::vector<double>(dab, 1.0)));
        starts.push_back(encode_diagonal(ComplexMatrix::identity(da), ComplexMatrix::identity(db), diag));
        starts.push_back(encode_diagonal(ua, ub, local));
    }
    const Objective f = [&](std::span<const double> x) { return detail::floored_relative_entropy(m, s_rho, decode(x)); };
    auto outcome = multi_restart_minimize(f, t_count * per, cfg, starts, 0.0);
    const double exact = relative_entropy(m, decode(outcome.best_params));
    if (exact < best) {
        best = exact;
        witness = "optimized separable state";
    }
    est.optimizer = std::move(outcome);
    est.value = best;
    est.witness = witness;
    return est;
}

inline BoundEstimate relative_entropy_of_entanglement(const DensityState& rho, const OptimizerConfig& cfg) {
    return relative_entropy_of_entanglement(rho, RelEntOptions{}, cfg);
}

}  // namespace skb
