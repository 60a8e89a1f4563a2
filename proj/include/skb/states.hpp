// State carriers (density operators, classical distributions, POVMs, channels),
// classical-to-quantum embeddings and the named example states.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "skb/linalg.hpp"

namespace skb {

inline constexpr double kStateTol = 1e-10;
inline constexpr double kProbSumTol = 1e-12;
inline constexpr double kZeroProb = 1e-15;

namespace detail {

inline std::vector<std::string> labels_without(const SubsystemLayout& layout, std::span<const std::string> drop) {
    std::vector<std::string> keep;
    for (const auto& l : layout.labels())
        if (std::find(drop.begin(), drop.end(), l) == drop.end()) keep.push_back(l);
    return keep;
}

inline bool contains(std::span<const std::string> set, const std::string& l) {
    return std::find(set.begin(), set.end(), l) != set.end();
}

}  // namespace detail

// Hermitian, positive, unit-trace operator on a labeled tensor product. Labels in
// `classical` are registers in which the operator is block diagonal.
class DensityState {
public:
    DensityState() = default;

    DensityState(SubsystemLayout layout, ComplexMatrix matrix, std::vector<std::string> classical = {})
        : layout_(std::move(layout)), matrix_(std::move(matrix)), classical_(std::move(classical)) {
        validate();
    }

    // Skips validation; for internal results whose invariants hold by construction.
    static DensityState unchecked(SubsystemLayout layout, ComplexMatrix matrix, std::vector<std::string> classical = {}) {
        DensityState s;
        s.layout_ = std::move(layout);
        s.matrix_ = std::move(matrix);
        s.classical_ = std::move(classical);
        return s;
    }

    const SubsystemLayout& layout() const { return layout_; }
    const ComplexMatrix& matrix() const { return matrix_; }
    const std::vector<std::string>& classical() const { return classical_; }
    std::size_t dim() const { return matrix_.rows(); }

    bool is_classical(const std::string& label) const { return detail::contains(classical_, label); }
    bool all_classical(std::span<const std::string> labels) const {
        return std::all_of(labels.begin(), labels.end(), [&](const auto& l) { return is_classical(l); });
    }

    // Throws invariant_error naming the first violated invariant.
    void validate() const {
        detail::check_layout(matrix_, layout_);
        if (!matrix_.all_finite()) throw invariant_error("state: non-finite entry");
        if (hermiticity_defect(matrix_) > kStateTol) throw invariant_error("state: not Hermitian");
        const double tr = matrix_.trace().real();
        if (std::abs(tr - 1.0) > kStateTol) throw invariant_error("state: trace " + std::to_string(tr) + " != 1");
        for (const auto& l : classical_) {
            layout_.index_of(l);
            if (off_block_weight(l) > kStateTol)
                throw invariant_error("state: not block diagonal in classical register '" + l + "'");
        }
        const auto ev = hermitian_eigenvalues(matrix_);
        if (!ev.empty() && ev.back() < -kStateTol)
            throw invariant_error("state: negative eigenvalue " + std::to_string(ev.back()));
    }

    // Largest entry coupling different basis values of `label`.
    double off_block_weight(const std::string& label) const {
        const std::size_t t = layout_.index_of(label);
        const std::size_t stride = layout_.strides()[t];
        const std::size_t d = layout_.dims()[t];
        double w = 0;
        for (std::size_t i = 0; i < dim(); ++i)
            for (std::size_t j = 0; j < dim(); ++j)
                if ((i / stride) % d != (j / stride) % d) w = std::max(w, std::abs(matrix_(i, j)));
        return w;
    }

    DensityState reduced(std::span<const std::string> keep) const {
        auto layout = layout_.restricted(keep);
        std::vector<std::string> cl;
        for (const auto& l : classical_)
            if (layout.contains(l)) cl.push_back(l);
        return unchecked(std::move(layout), partial_trace(matrix_, layout_, keep), std::move(cl));
    }
    DensityState reduced(std::initializer_list<std::string> keep) const {
        std::vector<std::string> k(keep);
        return reduced(std::span<const std::string>(k));
    }

    DensityState without(std::span<const std::string> drop) const {
        const auto keep = detail::labels_without(layout_, drop);
        return reduced(std::span<const std::string>(keep));
    }

private:
    SubsystemLayout layout_;
    ComplexMatrix matrix_;
    std::vector<std::string> classical_;
};

// Nonnegative tensor over finite alphabets (lexicographic, first label most significant).
class ClassicalDistribution {
public:
    ClassicalDistribution() = default;
    ClassicalDistribution(SubsystemLayout layout, std::vector<double> probs)
        : layout_(std::move(layout)), probs_(std::move(probs)) {
        if (probs_.size() != layout_.total_dim()) throw usage_error("distribution: entry count does not match alphabet sizes");
        double s = 0;
        for (double p : probs_) {
            if (!std::isfinite(p) || p < 0) throw invariant_error("distribution: negative or non-finite probability");
            s += p;
        }
        if (std::abs(s - 1.0) > kProbSumTol) throw invariant_error("distribution: probabilities sum to " + std::to_string(s));
    }

    const SubsystemLayout& layout() const { return layout_; }
    const std::vector<double>& probs() const { return probs_; }
    std::size_t size() const { return probs_.size(); }

    std::vector<std::size_t> digits(std::size_t index) const {
        std::vector<std::size_t> d(layout_.size());
        for (std::size_t i = layout_.size(); i-- > 0;) {
            d[i] = index % layout_.dims()[i];
            index /= layout_.dims()[i];
        }
        return d;
    }
    std::size_t index(std::span<const std::size_t> digits) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < layout_.size(); ++i) {
            if (digits[i] >= layout_.dims()[i]) throw usage_error("distribution: index out of range");
            idx = idx * layout_.dims()[i] + digits[i];
        }
        return idx;
    }
    double at(std::initializer_list<std::size_t> digits) const {
        std::vector<std::size_t> d(digits);
        return probs_[index(d)];
    }

    // Marginal on `keep` (layout order) reordered into the order given.
    ClassicalDistribution marginal(std::span<const std::string> keep) const {
        std::vector<std::size_t> pos;
        std::vector<std::size_t> dims;
        for (const auto& l : keep) {
            pos.push_back(layout_.index_of(l));
            dims.push_back(layout_.dims()[pos.back()]);
        }
        SubsystemLayout out(std::vector<std::string>(keep.begin(), keep.end()), dims);
        std::vector<double> p(out.total_dim(), 0.0);
        for (std::size_t idx = 0; idx < probs_.size(); ++idx) {
            if (probs_[idx] == 0) continue;
            const auto d = digits(idx);
            std::size_t j = 0;
            for (std::size_t k = 0; k < pos.size(); ++k) j = j * dims[k] + d[pos[k]];
            p[j] += probs_[idx];
        }
        return {std::move(out), std::move(p)};
    }

    // Collapses groups of labels into single registers; every label must appear in exactly one group.
    ClassicalDistribution grouped(const std::vector<std::pair<std::string, std::vector<std::string>>>& groups) const {
        std::vector<std::string> order;
        std::vector<std::string> names;
        std::vector<std::size_t> dims;
        for (const auto& [name, members] : groups) {
            names.push_back(name);
            std::size_t d = 1;
            for (const auto& m : members) {
                order.push_back(m);
                d *= layout_.dim_of(m);
            }
            dims.push_back(d);
        }
        if (order.size() != layout_.size()) throw usage_error("grouped: groups must cover every label exactly once");
        auto m = marginal(order);
        return {SubsystemLayout(std::move(names), std::move(dims)), m.probs_};
    }

private:
    SubsystemLayout layout_;
    std::vector<double> probs_;
};

// Finite list of positive operators summing to the identity.
struct Povm {
    std::vector<ComplexMatrix> elements;

    std::size_t dim() const { return elements.empty() ? 0 : elements.front().rows(); }

    void validate() const {
        if (elements.empty()) throw invariant_error("povm: no elements");
        const std::size_t d = dim();
        ComplexMatrix sum(d, d);
        for (const auto& e : elements) {
            if (e.rows() != d || e.cols() != d) throw invariant_error("povm: element dimensions differ");
            if (hermiticity_defect(e) > kStateTol) throw invariant_error("povm: element not Hermitian");
            const auto ev = hermitian_eigenvalues(e);
            if (ev.back() < -kStateTol) throw invariant_error("povm: element not positive");
            sum += e;
        }
        if (max_entry_diff(sum, ComplexMatrix::identity(d)) > 1e-9) throw invariant_error("povm: elements do not sum to identity");
    }

    static Povm computational(std::size_t d) {
        Povm p;
        for (std::size_t k = 0; k < d; ++k) {
            ComplexMatrix e(d, d);
            e(k, k) = 1;
            p.elements.push_back(std::move(e));
        }
        return p;
    }
};

// CPTP map given by its Stinespring isometry V: in -> out ⊗ env (out most significant).
struct QuantumChannel {
    std::size_t in_dim = 1;
    std::size_t out_dim = 1;
    std::size_t env_dim = 1;
    ComplexMatrix isometry;

    void validate() const {
        if (isometry.rows() != out_dim * env_dim || isometry.cols() != in_dim)
            throw invariant_error("channel: isometry shape does not match dimensions");
        if (max_entry_diff(isometry.adjoint() * isometry, ComplexMatrix::identity(in_dim)) > 1e-9)
            throw invariant_error("channel: V†V != I");
    }

    static QuantumChannel identity(std::size_t d) { return {d, d, 1, ComplexMatrix::identity(d)}; }
};

// Applies ch to the subsystem `target`; `target` keeps its name with the output dimension.
inline ComplexMatrix apply_channel_matrix(const ComplexMatrix& m, const SubsystemLayout& layout, const std::string& target,
                                          const QuantumChannel& ch, SubsystemLayout* out_layout = nullptr) {
    if (layout.dim_of(target) != ch.in_dim) throw usage_error("apply_channel: channel input dim does not match '" + target + "'");
    const std::string env = target + "#env";
    auto r = apply_local_operator(m, layout, target, ch.isometry, {{target, ch.out_dim}, {env, ch.env_dim}});
    std::vector<std::string> keep;
    for (const auto& l : r.layout.labels())
        if (l != env) keep.push_back(l);
    if (out_layout) *out_layout = r.layout.restricted(keep);
    return partial_trace(r.matrix, r.layout, keep);
}

inline DensityState apply_channel(const DensityState& rho, const QuantumChannel& ch, const std::string& target) {
    SubsystemLayout layout;
    auto m = apply_channel_matrix(rho.matrix(), rho.layout(), target, ch, &layout);
    std::vector<std::string> cl;
    for (const auto& l : rho.classical())
        if (l != target) cl.push_back(l);
    return DensityState(std::move(layout), std::move(m), std::move(cl));
}

// Computational-basis measurement of the listed registers; they stay as classical registers.
inline DensityState dephase(const DensityState& rho, std::span<const std::string> labels) {
    const auto strides = rho.layout().strides();
    std::vector<std::pair<std::size_t, std::size_t>> sd;
    for (const auto& l : labels) {
        const auto t = rho.layout().index_of(l);
        sd.emplace_back(strides[t], rho.layout().dims()[t]);
    }
    ComplexMatrix m = rho.matrix();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            for (const auto& [s, d] : sd)
                if ((i / s) % d != (j / s) % d) {
                    m(i, j) = 0;
                    break;
                }
    auto cl = rho.classical();
    for (const auto& l : labels)
        if (!rho.is_classical(l)) cl.push_back(l);
    return DensityState::unchecked(rho.layout(), std::move(m), std::move(cl));
}

inline DensityState dephase_all(const DensityState& rho) { return dephase(rho, rho.layout().labels()); }

struct MeasurementResult {
    std::vector<double> probabilities;
    // Normalized state of the remaining subsystems for each outcome (nullopt when probability is 0).
    std::vector<std::optional<DensityState>> post_states;
};

inline MeasurementResult measure_povm(const DensityState& rho, const Povm& povm, const std::string& target) {
    povm.validate();
    if (povm.dim() != rho.layout().dim_of(target)) throw usage_error("measure_povm: element dimension does not match '" + target + "'");
    MeasurementResult out;
    std::vector<std::string> rest;
    for (const auto& l : rho.layout().labels())
        if (l != target) rest.push_back(l);
    double total = 0;
    for (const auto& e : povm.elements) {
        const auto root = hermitian_function(e, [](double x) { return x > 0 ? std::sqrt(x) : 0.0; });
        auto r = apply_local_operator(rho.matrix(), rho.layout(), target, root);
        auto post = partial_trace(r.matrix, r.layout, rest);
        const double p = std::max(0.0, post.trace().real());
        total += p;
        out.probabilities.push_back(p);
        if (p > kZeroProb) {
            post *= 1.0 / p;
            std::vector<std::string> cl;
            for (const auto& l : rho.classical())
                if (l != target) cl.push_back(l);
            out.post_states.emplace_back(DensityState::unchecked(rho.layout().restricted(rest), std::move(post), std::move(cl)));
        } else {
            out.post_states.emplace_back(std::nullopt);
        }
    }
    if (std::abs(total - 1.0) > 1e-9) throw numeric_error("measure_povm: outcome probabilities do not sum to 1");
    return out;
}

// Merges groups of labels into single subsystems, in group order. Every label must be covered.
inline DensityState regroup(const DensityState& rho, const std::vector<std::pair<std::string, std::vector<std::string>>>& groups) {
    std::vector<std::string> order;
    std::vector<std::string> names;
    std::vector<std::size_t> dims;
    std::vector<std::string> cl;
    for (const auto& [name, members] : groups) {
        names.push_back(name);
        std::size_t d = 1;
        for (const auto& m : members) {
            order.push_back(m);
            d *= rho.layout().dim_of(m);
        }
        dims.push_back(d);
        if (rho.all_classical(members)) cl.push_back(name);
    }
    if (order.size() != rho.layout().size()) throw usage_error("regroup: groups must cover every label exactly once");
    return DensityState::unchecked(SubsystemLayout(std::move(names), std::move(dims)),
                                   permute_subsystems(rho.matrix(), rho.layout(), order), std::move(cl));
}

// ---------------------------------------------------------------------------
// Parties

enum class Party { alice, bob, eve };

inline const char* party_name(Party p) {
    switch (p) {
        case Party::alice: return "A";
        case Party::bob: return "B";
        case Party::eve: return "E";
    }
    return "?";
}

inline Party parse_party(const std::string& s) {
    if (s == "A" || s == "alice" || s == "Alice") return Party::alice;
    if (s == "B" || s == "bob" || s == "Bob") return Party::bob;
    if (s == "E" || s == "eve" || s == "Eve") return Party::eve;
    throw usage_error("unknown party '" + s + "'");
}

using PartyMap = std::map<std::string, Party>;

// A state together with the assignment of its subsystems to Alice, Bob and Eve.
struct SharedState {
    DensityState state;
    PartyMap owner;

    std::vector<std::string> labels_of(Party p) const {
        std::vector<std::string> out;
        for (const auto& l : state.layout().labels()) {
            auto it = owner.find(l);
            if (it == owner.end()) throw usage_error("no party assigned to '" + l + "'");
            if (it->second == p) out.push_back(l);
        }
        return out;
    }
    std::vector<std::string> alice() const { return labels_of(Party::alice); }
    std::vector<std::string> bob() const { return labels_of(Party::bob); }
    std::vector<std::string> eve() const { return labels_of(Party::eve); }

    // Collapsed to three subsystems "A", "B", "E" (E of dimension 1 when Eve holds nothing).
    DensityState tripartite() const {
        auto rho = state;
        std::vector<std::pair<std::string, std::vector<std::string>>> groups{{"A", alice()}, {"B", bob()}, {"E", eve()}};
        if (groups[2].second.empty()) {
            auto layout = rho.layout();
            auto labels = layout.labels();
            auto dims = layout.dims();
            std::string trivial = "#trivial";
            labels.push_back(trivial);
            dims.push_back(1);
            auto cl = rho.classical();
            cl.push_back(trivial);
            rho = DensityState::unchecked(SubsystemLayout(labels, dims), rho.matrix(), cl);
            groups[2].second.push_back(trivial);
        }
        return regroup(rho, groups);
    }
};

// First label Alice, second Bob, rest Eve.
inline PartyMap default_parties(const SubsystemLayout& layout) {
    PartyMap m;
    for (std::size_t i = 0; i < layout.size(); ++i)
        m[layout.labels()[i]] = i == 0 ? Party::alice : (i == 1 ? Party::bob : Party::eve);
    return m;
}

// ---------------------------------------------------------------------------
// Builders

inline SubsystemLayout trivial_layout(const std::string& label = "E") { return SubsystemLayout({label}, {1}); }

inline DensityState trivial_state(const std::string& label = "E") {
    return DensityState(trivial_layout(label), ComplexMatrix::identity(1), {label});
}

inline DensityState maximally_mixed(std::size_t d, const std::string& label = "E") {
    auto m = ComplexMatrix::identity(d);
    m *= 1.0 / static_cast<double>(d);
    return DensityState(SubsystemLayout({label}, {d}), std::move(m), {});
}

inline DensityState pure_state(const SubsystemLayout& layout, std::span<const cplx> psi) {
    double n = 0;
    for (const auto& z : psi) n += std::norm(z);
    if (std::abs(n - 1.0) > kStateTol) throw invariant_error("pure state: vector not normalized");
    return DensityState(layout, ComplexMatrix::projector(psi));
}

inline DensityState tensor(const DensityState& a, const DensityState& b) {
    auto labels = a.layout().labels();
    auto dims = a.layout().dims();
    labels.insert(labels.end(), b.layout().labels().begin(), b.layout().labels().end());
    dims.insert(dims.end(), b.layout().dims().begin(), b.layout().dims().end());
    auto cl = a.classical();
    cl.insert(cl.end(), b.classical().begin(), b.classical().end());
    return DensityState::unchecked(SubsystemLayout(std::move(labels), std::move(dims)), kron(a.matrix(), b.matrix()),
                                   std::move(cl));
}

// (|00> + |11>)/√2
inline ComplexVector bell_vector() {
    const double s = 1.0 / std::numbers::sqrt2;
    return {s, 0, 0, s};
}

// The four Bell states Φ+, Φ−, Ψ+, Ψ−.
inline std::vector<ComplexVector> bell_basis() {
    const double s = 1.0 / std::numbers::sqrt2;
    return {{s, 0, 0, s}, {s, 0, 0, -s}, {0, s, s, 0}, {0, s, -s, 0}};
}

inline DensityState bell_state(const std::string& a = "A", const std::string& b = "B") {
    auto v = bell_vector();
    return pure_state(SubsystemLayout({a, b}, {2, 2}), v);
}

// d-dimensional discrete Fourier transform, U_jk = ω^{jk}/√d.
inline ComplexMatrix fourier_matrix(std::size_t d) {
    ComplexMatrix u(d, d);
    const double norm = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < d; ++k) {
            const double ang = 2.0 * std::numbers::pi * static_cast<double>((j * k) % d) / static_cast<double>(d);
            u(j, k) = std::polar(norm, ang);
        }
    return u;
}

// Diagonal state with entries p; every label is a classical register.
inline DensityState from_distribution(const ClassicalDistribution& p) {
    return DensityState(p.layout(), ComplexMatrix::diagonal(p.probs()), p.layout().labels());
}

// τ^ℓ = 2^{-ℓ} Σ_i |ii><ii|_AB ⊗ τ_E
inline DensityState ideal_key_state(std::size_t ell, const DensityState& eve_state) {
    if (ell < 1) throw usage_error("ideal_key_state: ell must be >= 1");
    const std::size_t n = std::size_t{1} << ell;
    ComplexMatrix ab(n * n, n * n);
    for (std::size_t i = 0; i < n; ++i) ab(i * n + i, i * n + i) = 1.0 / static_cast<double>(n);
    const DensityState key = DensityState::unchecked(SubsystemLayout({"A", "B"}, {n, n}), std::move(ab), {"A", "B"});
    auto t = tensor(key, eve_state);
    t.validate();
    return t;
}

// γ^ℓ = U (|ψ><ψ|^{⊗ℓ} ⊗ ρ_{A'B'}) U†,  U = Σ_i |ii><ii| ⊗ U^{(i)}.
// The ℓ Bell pairs are regrouped as A = A_1..A_ℓ, B = B_1..B_ℓ; the shield keeps its labels.
inline DensityState twisted_key_state(std::size_t ell, const std::vector<ComplexMatrix>& twists, const DensityState& shield) {
    if (ell < 1) throw usage_error("twisted_key_state: ell must be >= 1");
    const std::size_t n = std::size_t{1} << ell;
    if (twists.size() != n) throw usage_error("twisted_key_state: need 2^ell twist unitaries");
    const std::size_t ds = shield.dim();
    for (const auto& u : twists) {
        if (u.rows() != ds || u.cols() != ds) throw usage_error("twisted_key_state: twist dimension does not match shield");
        if (max_entry_diff(u.adjoint() * u, ComplexMatrix::identity(ds)) > 1e-9)
            throw invariant_error("twisted_key_state: twist is not unitary");
    }
    std::vector<ComplexMatrix> rotated;
    for (const auto& u : twists) rotated.push_back(u * shield.matrix());
    ComplexMatrix m(n * n * ds, n * n * ds);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const ComplexMatrix block = rotated[i] * twists[j].adjoint();
            const std::size_t r0 = (i * n + i) * ds, c0 = (j * n + j) * ds;
            for (std::size_t a = 0; a < ds; ++a)
                for (std::size_t b = 0; b < ds; ++b) m(r0 + a, c0 + b) = block(a, b) / static_cast<double>(n);
        }
    auto labels = std::vector<std::string>{"A", "B"};
    auto dims = std::vector<std::size_t>{n, n};
    labels.insert(labels.end(), shield.layout().labels().begin(), shield.layout().labels().end());
    dims.insert(dims.end(), shield.layout().dims().begin(), shield.layout().dims().end());
    return DensityState(SubsystemLayout(std::move(labels), std::move(dims)), std::move(m));
}

// |ψ> = Σ √p_x |x>
inline ComplexVector qqq_vector(const ClassicalDistribution& p) {
    ComplexVector v(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) v[i] = std::sqrt(p.probs()[i]);
    return v;
}

inline DensityState qqq_embed(const ClassicalDistribution& p) {
    return DensityState(p.layout(), ComplexMatrix::projector(qqq_vector(p)));
}

// Σ_x p_x |x><x| ⊗ |ψ^x><ψ^x|_E with |ψ^x> = Σ_k √(p_{xk}/p_x) |k>; x ranges over the
// non-Eve labels (classical in the output), Eve defaults to the last label.
inline DensityState ccq_embed(const ClassicalDistribution& p, std::vector<std::string> eve = {}) {
    const auto& layout = p.layout();
    if (eve.empty()) eve.push_back(layout.labels().back());
    std::vector<std::string> rest = detail::labels_without(layout, eve);
    std::vector<std::string> order = rest;
    order.insert(order.end(), eve.begin(), eve.end());
    const std::size_t de = layout.dim_of(eve);
    const std::size_t dx = layout.total_dim() / de;
    // amplitudes in (rest, eve) order
    auto amp = permute_subsystems(qqq_vector(p), layout, order);
    ComplexMatrix m(layout.total_dim(), layout.total_dim());
    for (std::size_t x = 0; x < dx; ++x)
        for (std::size_t k = 0; k < de; ++k)
            for (std::size_t l = 0; l < de; ++l) m(x * de + k, x * de + l) = amp[x * de + k] * amp[x * de + l];
    // back to the distribution's label order
    std::vector<std::size_t> dims;
    for (const auto& l : order) dims.push_back(layout.dim_of(l));
    SubsystemLayout ordered(order, dims);
    return DensityState(layout, permute_subsystems(m, ordered, layout.labels()), rest);
}

// True iff every assignment of the non-Eve registers admits at most one Eve value with p > 1e-15.
inline bool check_unique_k(const ClassicalDistribution& p, std::vector<std::string> eve = {}) {
    const auto& layout = p.layout();
    if (eve.empty()) eve.push_back(layout.labels().back());
    std::vector<std::string> order = detail::labels_without(layout, eve);
    order.insert(order.end(), eve.begin(), eve.end());
    const auto reordered = p.marginal(order);
    const std::size_t de = layout.dim_of(eve);
    const std::size_t dx = layout.total_dim() / de;
    for (std::size_t x = 0; x < dx; ++x) {
        int count = 0;
        for (std::size_t k = 0; k < de; ++k)
            if (reordered.probs()[x * de + k] > kZeroProb) ++count;
        if (count > 1) return false;
    }
    return true;
}

// Purification |ψ>_{XR} of ρ_X, with R of dimension rank(ρ) and labeled `label`.
struct Purification {
    SubsystemLayout layout;  // ρ's labels followed by `label`
    ComplexVector vector;
};

inline Purification purify(const DensityState& rho, const std::string& label = "R") {
    const auto es = hermitian_eig(rho.matrix());
    std::size_t rank = 0;
    for (double l : es.eigenvalues)
        if (l > 1e-12) ++rank;
    rank = std::max<std::size_t>(rank, 1);
    const std::size_t d = rho.dim();
    ComplexVector v(d * rank);
    double norm = 0;
    for (std::size_t k = 0; k < rank; ++k) {
        const double w = std::sqrt(std::max(0.0, es.eigenvalues[k]));
        for (std::size_t i = 0; i < d; ++i) v[i * rank + k] = w * es.eigenvectors(i, k);
        norm += w * w;
    }
    for (auto& z : v) z /= std::sqrt(norm);
    auto labels = rho.layout().labels();
    auto dims = rho.layout().dims();
    labels.push_back(label);
    dims.push_back(rank);
    return {SubsystemLayout(std::move(labels), std::move(dims)), std::move(v)};
}

// Ensemble {p_x, ρ_x}; used for accessible information.
struct Ensemble {
    std::vector<double> probs;
    std::vector<ComplexMatrix> states;

    std::size_t dim() const { return states.empty() ? 0 : states.front().rows(); }

    void validate() const {
        if (probs.size() != states.size() || probs.empty()) throw invariant_error("ensemble: empty or mismatched");
        double s = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] < 0) throw invariant_error("ensemble: negative weight");
            s += probs[i];
            if (states[i].rows() != dim()) throw invariant_error("ensemble: member dimensions differ");
            if (std::abs(states[i].trace().real() - 1.0) > 1e-9) throw invariant_error("ensemble: member trace != 1");
            if (hermiticity_defect(states[i]) > kStateTol) throw invariant_error("ensemble: member not Hermitian");
        }
        if (std::abs(s - 1.0) > 1e-9) throw invariant_error("ensemble: weights do not sum to 1");
    }
};

// Conditional states of `target` given each basis value of the classical registers `given`.
inline Ensemble conditional_ensemble(const DensityState& rho, std::span<const std::string> given, std::span<const std::string> target) {
    for (const auto& g : given)
        if (!rho.is_classical(g)) throw usage_error("conditional_ensemble: '" + g + "' is not a classical register");
    std::vector<std::string> keep(given.begin(), given.end());
    keep.insert(keep.end(), target.begin(), target.end());
    const auto red = rho.reduced(keep);
    std::vector<std::size_t> dims;
    for (const auto& l : keep) dims.push_back(rho.layout().dim_of(l));
    const SubsystemLayout ordered(keep, dims);
    const auto m = permute_subsystems(red.matrix(), red.layout(), keep);
    const std::size_t dt = rho.layout().dim_of(target);
    const std::size_t dg = m.rows() / dt;
    Ensemble e;
    for (std::size_t x = 0; x < dg; ++x) {
        ComplexMatrix block(dt, dt);
        for (std::size_t a = 0; a < dt; ++a)
            for (std::size_t b = 0; b < dt; ++b) block(a, b) = m(x * dt + a, x * dt + b);
        const double p = block.trace().real();
        if (p <= kZeroProb) continue;
        block *= 1.0 / p;
        e.probs.push_back(p);
        e.states.push_back(std::move(block));
    }
    double s = 0;
    for (double p : e.probs) s += p;
    for (double& p : e.probs) p /= s;
    return e;
}

// ---------------------------------------------------------------------------
// Named examples

// p_{ijkl} with the 4x4 table for p_ij, k = i+j mod 2 (i,j < 2), k = i mod 2 (i >= 2), l = ⌊i/2⌋.
// Labels A, B (size 4), E (k), F (l).
inline ClassicalDistribution gap_distribution() {
    SubsystemLayout layout({"A", "B", "E", "F"}, {4, 4, 2, 2});
    std::vector<double> p(layout.total_dim(), 0.0);
    auto set = [&](std::size_t i, std::size_t j, double v) {
        const std::size_t k = i < 2 ? (i + j) % 2 : i % 2;
        const std::size_t l = i / 2;
        p[((i * 4 + j) * 2 + k) * 2 + l] = v;
    };
    set(0, 0, 0.125);
    set(0, 1, 0.125);
    set(1, 0, 0.125);
    set(1, 1, 0.125);
    set(2, 2, 0.25);
    set(3, 3, 0.25);
    return {std::move(layout), std::move(p)};
}

// The flower state on A, B (qubits) and A', B', E (dimension d).
inline DensityState flower_state(std::size_t d) {
    if (d < 2) throw usage_error("flower: d must be >= 2");
    const auto u = fourier_matrix(d);
    SubsystemLayout layout({"A", "B", "A'", "B'", "E"}, {2, 2, d, d, d});
    ComplexMatrix m(layout.total_dim(), layout.total_dim());
    const double w = 1.0 / (2.0 * static_cast<double>(d));
    for (std::size_t bit = 0; bit < 2; ++bit)
        for (std::size_t k = 0; k < d; ++k) {
            const std::size_t base = (((bit * 2 + bit) * d + k) * d + k) * d;
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b) {
                    const cplx e = bit == 0 ? cplx(a == k && b == k ? 1.0 : 0.0) : u(a, k) * std::conj(u(b, k));
                    m(base + a, base + b) = w * e;
                }
        }
    return DensityState(std::move(layout), std::move(m), {"A", "B", "A'", "B'"});
}

// Σ_i ¼ |ii><ii|_AB ⊗ |ψ_i><ψ_i|_{EE'} over the four Bell states.
inline DensityState bell_lock_state() {
    SubsystemLayout layout({"A", "B", "E", "E'"}, {4, 4, 2, 2});
    ComplexMatrix m(64, 64);
    const auto bells = bell_basis();
    for (std::size_t i = 0; i < 4; ++i) {
        const auto proj = ComplexMatrix::projector(bells[i]);
        const std::size_t base = (i * 4 + i) * 4;
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) m(base + a, base + b) = 0.25 * proj(a, b);
    }
    return DensityState(std::move(layout), std::move(m), {"A", "B"});
}

// (|00>_AB |+>_A' |+>_E + |11>_AB |ψ+>_{A'E}) / √2 on labels A, B, A', E.
inline ComplexVector embed_counterexample_vector() {
    ComplexVector v(16, 0.0);
    auto idx = [](std::size_t a, std::size_t b, std::size_t ap, std::size_t e) { return ((a * 2 + b) * 2 + ap) * 2 + e; };
    for (std::size_t ap = 0; ap < 2; ++ap)
        for (std::size_t e = 0; e < 2; ++e) v[idx(0, 0, ap, e)] = 0.5 / std::numbers::sqrt2;
    v[idx(1, 1, 0, 0)] = 0.5;
    v[idx(1, 1, 1, 1)] = 0.5;
    return v;
}

inline SubsystemLayout embed_counterexample_layout() { return SubsystemLayout({"A", "B", "A'", "E"}, {2, 2, 2, 2}); }

// Computational-basis statistics of the counterexample state.
inline ClassicalDistribution embed_counterexample_distribution() {
    const auto v = embed_counterexample_vector();
    std::vector<double> p(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) p[i] = std::norm(v[i]);
    return {embed_counterexample_layout(), std::move(p)};
}

inline const std::vector<std::string>& named_example_names() {
    static const std::vector<std::string> names{"gap", "flower", "bell_lock", "embed_counterexample"};
    return names;
}

// Named example states with their party assignment. `d` is used by flower only.
inline SharedState named_example(const std::string& name, std::size_t d = 2) {
    if (name == "gap") {
        return {from_distribution(gap_distribution()),
                {{"A", Party::alice}, {"B", Party::bob}, {"E", Party::eve}, {"F", Party::eve}}};
    }
    if (name == "flower") {
        return {flower_state(d),
                {{"A", Party::alice}, {"A'", Party::alice}, {"B", Party::bob}, {"B'", Party::bob}, {"E", Party::eve}}};
    }
    if (name == "bell_lock" || name == "bell-lock") {
        return {bell_lock_state(), {{"A", Party::alice}, {"B", Party::bob}, {"E", Party::eve}, {"E'", Party::eve}}};
    }
    if (name == "embed_counterexample" || name == "embed-counterexample") {
        const auto v = embed_counterexample_vector();
        return {pure_state(embed_counterexample_layout(), v),
                {{"A", Party::alice}, {"A'", Party::alice}, {"B", Party::bob}, {"E", Party::eve}}};
    }
    throw usage_error("unknown example '" + name + "'");
}

}  // namespace skb
