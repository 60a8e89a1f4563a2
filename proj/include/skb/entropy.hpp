// Entropic functionals in bits: von Neumann entropy, (conditional) mutual information,
// relative entropy, plus the classical counterparts on probability tensors.
#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "skb/states.hpp"

namespace skb {

inline constexpr double kNegativeEigTol = 1e-10;

inline double xlog2x(double x) { return x > 0 ? x * std::log2(x) : 0.0; }

// −Σ λ log λ; eigenvalues in [−1e-10, 0) count as 0, anything lower throws.
inline double entropy_of_spectrum(std::span<const double> ev) {
    double s = 0;
    for (double l : ev) {
        if (l < -kNegativeEigTol) throw invariant_error("entropy: negative eigenvalue " + std::to_string(l));
        s -= xlog2x(l);
    }
    return s < 0 ? 0.0 : s;
}

inline double von_neumann_entropy(const ComplexMatrix& m) {
    const auto ev = hermitian_eigenvalues(m);
    return entropy_of_spectrum(ev);
}

inline double shannon_entropy(std::span<const double> p) {
    double s = 0;
    for (double x : p) s -= xlog2x(x);
    return s < 0 ? 0.0 : s;
}

inline double binary_entropy(double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw usage_error("binary_entropy: argument outside [0, 1]");
    return -xlog2x(eps) - xlog2x(1.0 - eps);
}

// Conditional Fannes-type continuity bound 8ε log dA + 4H(ε).
inline double fannes_cmi_bound(double eps, std::size_t dA) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw usage_error("fannes_cmi_bound: eps outside [0, 1]");
    return 8.0 * eps * std::log2(static_cast<double>(dA)) + 4.0 * binary_entropy(eps);
}

namespace detail {

inline void require_disjoint(std::initializer_list<std::span<const std::string>> sets) {
    std::vector<std::string> seen;
    for (const auto& s : sets)
        for (const auto& l : s) {
            if (std::find(seen.begin(), seen.end(), l) != seen.end())
                throw usage_error("label '" + l + "' appears in more than one argument set");
            seen.push_back(l);
        }
}

inline std::vector<std::string> join(std::span<const std::string> a, std::span<const std::string> b) {
    std::vector<std::string> r(a.begin(), a.end());
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

}  // namespace detail

// Entropy of the reduced operator on `labels` (empty set gives 0).
inline double subsystem_entropy(const ComplexMatrix& m, const SubsystemLayout& layout, std::span<const std::string> labels) {
    if (labels.empty()) return 0.0;
    if (labels.size() == layout.size()) return von_neumann_entropy(m);
    return von_neumann_entropy(partial_trace(m, layout, labels));
}

inline double mutual_information(const ComplexMatrix& m, const SubsystemLayout& layout, std::span<const std::string> a,
                                 std::span<const std::string> b) {
    detail::require_disjoint({a, b});
    const auto ab = detail::join(a, b);
    return subsystem_entropy(m, layout, a) + subsystem_entropy(m, layout, b) - subsystem_entropy(m, layout, ab);
}

// I(A:B|E) = S(AE) + S(BE) − S(ABE) − S(E)
inline double conditional_mutual_information(const ComplexMatrix& m, const SubsystemLayout& layout,
                                             std::span<const std::string> a, std::span<const std::string> b,
                                             std::span<const std::string> e) {
    detail::require_disjoint({a, b, e});
    const auto ae = detail::join(a, e);
    const auto be = detail::join(b, e);
    const auto abe = detail::join(a, be);
    return subsystem_entropy(m, layout, ae) + subsystem_entropy(m, layout, be) - subsystem_entropy(m, layout, abe) -
           subsystem_entropy(m, layout, e);
}

namespace detail {

// Entropy of the kept side of a pure vector, via the smaller Gram matrix.
inline double cut_entropy(const SplitIndex& s, std::span<const cplx> v) {
    ComplexMatrix m(s.kept_dim, s.rest_dim);
    for (std::size_t i = 0; i < v.size(); ++i) m(s.kept[i], s.rest[i]) = v[i];
    const auto g = s.kept_dim <= s.rest_dim ? m * m.adjoint() : m.adjoint() * m;
    return entropy_of_spectrum(hermitian_eigenvalues(g));
}

inline std::vector<bool> flags(const SubsystemLayout& layout, std::span<const std::string> labels) {
    std::vector<bool> f(layout.size(), false);
    for (const auto& l : labels) f[layout.index_of(l)] = true;
    return f;
}

}  // namespace detail

inline double pure_subsystem_entropy(std::span<const cplx> v, const SubsystemLayout& layout, std::span<const std::string> labels) {
    if (v.size() != layout.total_dim()) throw usage_error("vector dimension does not match layout");
    return detail::cut_entropy(detail::split_index(layout, detail::flags(layout, labels)), v);
}

// I(A:B|E) of pure vectors on a fixed layout; labels outside A, B, E purify. Index maps are
// computed once.
class PureCmi {
public:
    PureCmi(const SubsystemLayout& layout, std::span<const std::string> a, std::span<const std::string> b,
            std::span<const std::string> e)
        : dim_(layout.total_dim()) {
        detail::require_disjoint({a, b, e});
        const auto ae = detail::join(a, e), be = detail::join(b, e), abe = detail::join(a, be);
        for (const auto* set : {&ae, &be, &abe}) cuts_.push_back(detail::split_index(layout, detail::flags(layout, *set)));
        cuts_.push_back(detail::split_index(layout, detail::flags(layout, e)));
    }

    double operator()(std::span<const cplx> v) const {
        if (v.size() != dim_) throw usage_error("vector dimension does not match layout");
        return detail::cut_entropy(cuts_[0], v) + detail::cut_entropy(cuts_[1], v) - detail::cut_entropy(cuts_[2], v) -
               detail::cut_entropy(cuts_[3], v);
    }

private:
    std::size_t dim_;
    std::vector<detail::SplitIndex> cuts_;
};

inline double von_neumann_entropy(const DensityState& rho, std::span<const std::string> labels) {
    return subsystem_entropy(rho.matrix(), rho.layout(), labels);
}
inline double von_neumann_entropy(const DensityState& rho, std::initializer_list<std::string> labels) {
    std::vector<std::string> l(labels);
    return von_neumann_entropy(rho, std::span<const std::string>(l));
}
inline double von_neumann_entropy(const DensityState& rho) { return von_neumann_entropy(rho.matrix()); }

inline double mutual_information(const DensityState& rho, std::span<const std::string> a, std::span<const std::string> b) {
    return mutual_information(rho.matrix(), rho.layout(), a, b);
}
inline double mutual_information(const DensityState& rho, std::initializer_list<std::string> a,
                                 std::initializer_list<std::string> b) {
    std::vector<std::string> va(a), vb(b);
    return mutual_information(rho, va, vb);
}

inline double conditional_mutual_information(const DensityState& rho, std::span<const std::string> a,
                                             std::span<const std::string> b, std::span<const std::string> e) {
    return conditional_mutual_information(rho.matrix(), rho.layout(), a, b, e);
}
inline double conditional_mutual_information(const DensityState& rho, std::initializer_list<std::string> a,
                                             std::initializer_list<std::string> b, std::initializer_list<std::string> e) {
    std::vector<std::string> va(a), vb(b), ve(e);
    return conditional_mutual_information(rho, va, vb, ve);
}

struct EntropyReport {
    double value = 0;
    std::vector<std::string> subsystems;
};

inline EntropyReport entropy_report(const DensityState& rho, std::span<const std::string> labels) {
    return {von_neumann_entropy(rho, labels), std::vector<std::string>(labels.begin(), labels.end())};
}

// S(ρ‖σ) = Tr ρ (log ρ − log σ); +∞ when supp ρ ⊄ supp σ.
inline double relative_entropy(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) throw usage_error("relative_entropy: dimension mismatch");
    const auto es = hermitian_eig(sigma);
    const std::size_t n = rho.rows();
    // Tr ρ log σ = Σ_k log λ_k <v_k|ρ|v_k>
    double cross = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto v = es.eigenvectors.column(k);
        const auto rv = rho * std::span<const cplx>(v);
        cplx w = 0;
        for (std::size_t i = 0; i < n; ++i) w += std::conj(v[i]) * rv[i];
        const double weight = w.real();
        const double lambda = es.eigenvalues[k];
        if (lambda < 1e-12) {
            if (weight > 1e-9) return std::numeric_limits<double>::infinity();
            continue;
        }
        cross += weight * std::log2(lambda);
    }
    const double s = -von_neumann_entropy(rho) - cross;
    return s;
}

inline double relative_entropy(const DensityState& rho, const DensityState& sigma) {
    return relative_entropy(rho.matrix(), sigma.matrix());
}

// ---------------------------------------------------------------------------
// Classical quantities on a dense p[a][b][e] array (row-major, e fastest).

inline double classical_mutual_information(std::span<const double> pab, std::size_t na, std::size_t nb) {
    std::vector<double> pa(na, 0.0), pb(nb, 0.0);
    double hab = 0;
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b) {
            const double p = pab[a * nb + b];
            pa[a] += p;
            pb[b] += p;
            hab -= xlog2x(p);
        }
    return shannon_entropy(pa) + shannon_entropy(pb) - hab;
}

inline double classical_cmi(std::span<const double> pabe, std::size_t na, std::size_t nb, std::size_t ne) {
    std::vector<double> pae(na * ne, 0.0), pbe(nb * ne, 0.0), pe(ne, 0.0);
    double habe = 0;
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t e = 0; e < ne; ++e) {
                const double p = pabe[(a * nb + b) * ne + e];
                if (p == 0) continue;
                pae[a * ne + e] += p;
                pbe[b * ne + e] += p;
                pe[e] += p;
                habe -= xlog2x(p);
            }
    const double v = shannon_entropy(pae) + shannon_entropy(pbe) - habe - shannon_entropy(pe);
    return v;
}

inline double classical_cmi(const ClassicalDistribution& p, std::span<const std::string> a, std::span<const std::string> b,
                            std::span<const std::string> e) {
    detail::require_disjoint({a, b, e});
    const auto& l = p.layout();
    const std::size_t na = l.dim_of(a), nb = l.dim_of(b), ne = l.dim_of(e);
    std::vector<std::string> order = detail::join(a, b);
    order.insert(order.end(), e.begin(), e.end());
    return classical_cmi(p.marginal(order).probs(), na, nb, ne);
}

}  // namespace skb
