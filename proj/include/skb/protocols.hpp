// Classical LOPC protocols (randomize, discard, permute, communicate), their coherent
// versions, the measure/protocol commutation check, key quality and sampled LOPC maps.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "skb/entropy.hpp"
#include "skb/random.hpp"

namespace skb {

enum class StepKind { randomize, discard, permute, communicate };

inline const char* step_kind_name(StepKind k) {
    switch (k) {
        case StepKind::randomize: return "randomize";
        case StepKind::discard: return "discard";
        case StepKind::permute: return "permute";
        case StepKind::communicate: return "communicate";
    }
    return "?";
}

struct ProtocolStep {
    StepKind kind = StepKind::discard;
    Party party = Party::alice;
    std::vector<std::string> labels;         // randomize: new label; permute: joint register; else one label
    std::vector<double> distribution;        // randomize
    std::vector<std::size_t> permutation;    // permute: basis index i -> permutation[i]
};

struct Protocol {
    std::vector<ProtocolStep> steps;
};

inline Party receiver_of(Party p) { return p == Party::alice ? Party::bob : Party::alice; }

// Names of the copies made by a communicate step.
inline std::string copy_label(const std::string& label, Party to) { return label + "@" + party_name(to); }

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}

inline bool is_permutation_vector(const std::vector<std::size_t>& p) {
    std::vector<bool> seen(p.size(), false);
    for (auto x : p) {
        if (x >= p.size() || seen[x]) return false;
        seen[x] = true;
    }
    return true;
}

// ρ'(f(i), f(j)) = ρ(i, j) for an injective basis map f from `from` to `to`.
inline ComplexMatrix map_basis(const ComplexMatrix& m, const std::vector<std::size_t>& f, std::size_t to_dim) {
    ComplexMatrix out(to_dim, to_dim);
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = 0; j < f.size(); ++j) out(f[i], f[j]) = m(i, j);
    return out;
}

inline std::vector<std::size_t> digits_of(std::size_t idx, const std::vector<std::size_t>& dims) {
    std::vector<std::size_t> d(dims.size());
    for (std::size_t i = dims.size(); i-- > 0;) {
        d[i] = idx % dims[i];
        idx /= dims[i];
    }
    return d;
}

inline std::size_t index_of_digits(const std::vector<std::size_t>& d, const std::vector<std::size_t>& dims) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) idx = idx * dims[i] + d[i];
    return idx;
}

inline void require_owner(const SharedState& s, const std::string& label, Party p, std::size_t step) {
    if (!s.state.layout().contains(label))
        throw usage_error("step " + std::to_string(step + 1) + ": no subsystem '" + label + "'");
    const auto it = s.owner.find(label);
    if (it == s.owner.end() || it->second != p)
        throw usage_error("step " + std::to_string(step + 1) + ": '" + label + "' is not held by " + party_name(p));
}

// Explicit register of a permute step, or everything the party holds.
inline std::vector<std::string> permute_labels(const SharedState& s, const ProtocolStep& st, std::size_t step) {
    auto labels = st.labels.empty() ? s.labels_of(st.party) : st.labels;
    if (labels.empty()) throw usage_error("step " + std::to_string(step + 1) + ": " + party_name(st.party) + " holds nothing");
    return labels;
}

inline SharedState attach(const SharedState& s, const std::string& label, Party p, const DensityState& reg) {
    if (s.state.layout().contains(label)) throw usage_error("subsystem '" + label + "' already exists");
    SharedState out{tensor(s.state, reg), s.owner};
    out.owner[label] = p;
    return out;
}

// Permutes the joint basis of `labels` (in the given order) by perm.
inline ComplexMatrix permute_register(const ComplexMatrix& m, const SubsystemLayout& layout, const std::vector<std::string>& labels,
                                      const std::vector<std::size_t>& perm) {
    std::vector<std::size_t> pos, sub;
    for (const auto& l : labels) {
        pos.push_back(layout.index_of(l));
        sub.push_back(layout.dim_of(l));
    }
    const auto& dims = layout.dims();
    std::vector<std::size_t> f(layout.total_dim());
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        auto d = digits_of(idx, dims);
        std::vector<std::size_t> j(pos.size());
        for (std::size_t k = 0; k < pos.size(); ++k) j[k] = d[pos[k]];
        const auto img = digits_of(perm[index_of_digits(j, sub)], sub);
        for (std::size_t k = 0; k < pos.size(); ++k) d[pos[k]] = img[k];
        f[idx] = index_of_digits(d, dims);
    }
    return map_basis(m, f, f.size());
}

// Attaches |0> registers `receiver_label` and `eve_label` and applies x -> (x, y + x, z + x) controlled by `label`.
inline ComplexMatrix fan_out(const ComplexMatrix& m, const SubsystemLayout& layout, const std::string& label,
                             SubsystemLayout& out_layout, const std::string& receiver_label, const std::string& eve_label) {
    const std::size_t d = layout.dim_of(label);
    auto labels = layout.labels();
    auto dims = layout.dims();
    labels.push_back(receiver_label);
    labels.push_back(eve_label);
    dims.push_back(d);
    dims.push_back(d);
    out_layout = SubsystemLayout(labels, dims);
    ComplexVector zero(d * d, 0.0);
    zero[0] = 1;
    const auto extended = kron(m, ComplexMatrix::projector(zero));
    // generalized CNOTs: unitary on the full space
    const std::size_t c = layout.index_of(label), n = dims.size();
    std::vector<std::size_t> f(out_layout.total_dim());
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        auto dg = digits_of(idx, dims);
        dg[n - 2] = (dg[n - 2] + dg[c]) % d;
        dg[n - 1] = (dg[n - 1] + dg[c]) % d;
        f[idx] = index_of_digits(dg, dims);
    }
    return map_basis(extended, f, f.size());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Text form

inline std::string format_step(const ProtocolStep& s) {
    std::ostringstream os;
    os << step_kind_name(s.kind) << " " << party_name(s.party);
    auto join_sz = [](const auto& v) {
        std::ostringstream o;
        for (std::size_t i = 0; i < v.size(); ++i) o << (i ? "," : "") << v[i];
        return o.str();
    };
    switch (s.kind) {
        case StepKind::randomize: {
            std::ostringstream p;
            p.precision(17);
            for (std::size_t i = 0; i < s.distribution.size(); ++i) p << (i ? "," : "") << s.distribution[i];
            os << " " << s.labels.at(0) << " " << p.str();
            break;
        }
        case StepKind::permute: {
            if (!s.labels.empty()) os << " ";
            for (std::size_t i = 0; i < s.labels.size(); ++i) os << (i ? "+" : "") << s.labels[i];
            os << " " << join_sz(s.permutation);
            break;
        }
        default: os << " " << s.labels.at(0);
    }
    return os.str();
}

inline std::string format_protocol(const Protocol& p) {
    std::string out;
    for (const auto& s : p.steps) out += format_step(s) + "\n";
    return out;
}

// One step per line: `randomize A [label] 0.5,0.5`, `discard B j`, `permute A a+r 1,0,3,2`,
// `communicate A k`. Blank lines and `#` comments are ignored. Randomize steps without a
// label get `r<line>`.
inline Protocol parse_protocol(const std::string& text) {
    Protocol proto;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        auto fail = [&](const std::string& msg) { return usage_error("protocol line " + std::to_string(lineno) + ": " + msg); };
        if (tok.size() < 3) throw fail("expected '<kind> <party> <arguments>'");
        ProtocolStep st;
        try {
            st.party = parse_party(tok[1]);
        } catch (const usage_error&) {
            throw fail("unknown party '" + tok[1] + "'");
        }
        if (st.party == Party::eve) throw fail("Eve does not take part in the protocol");
        auto numbers = [&](const std::string& s) {
            std::vector<double> v;
            for (const auto& x : detail::split(s, ',')) {
                std::size_t used = 0;
                double val = 0;
                try {
                    val = std::stod(x, &used);
                } catch (const std::exception&) {
                    throw fail("bad number '" + x + "'");
                }
                if (used != x.size()) throw fail("bad number '" + x + "'");
                v.push_back(val);
            }
            return v;
        };
        const std::string& kind = tok[0];
        if (kind == "randomize") {
            st.kind = StepKind::randomize;
            if (tok.size() == 3) {
                st.labels = {"r" + std::to_string(lineno)};
                st.distribution = numbers(tok[2]);
            } else if (tok.size() == 4) {
                st.labels = {tok[2]};
                st.distribution = numbers(tok[3]);
            } else {
                throw fail("randomize takes an optional label and a distribution");
            }
        } else if (kind == "discard" || kind == "communicate") {
            st.kind = kind == "discard" ? StepKind::discard : StepKind::communicate;
            if (tok.size() != 3) throw fail(kind + " takes one label");
            st.labels = {tok[2]};
        } else if (kind == "permute") {
            st.kind = StepKind::permute;
            if (tok.size() == 4) st.labels = detail::split(tok[2], '+');
            else if (tok.size() != 3) throw fail("permute takes an optional register and a permutation");
            for (double x : numbers(tok.back())) {
                if (x < 0 || x != std::floor(x)) throw fail("permutation entries must be non-negative integers");
                st.permutation.push_back(static_cast<std::size_t>(x));
            }
            if (!detail::is_permutation_vector(st.permutation)) throw fail("not a permutation");
        } else {
            throw fail("unknown step kind '" + kind + "'");
        }
        proto.steps.push_back(std::move(st));
    }
    return proto;
}

// ---------------------------------------------------------------------------
// Classical execution

inline SharedState apply_step(const SharedState& s, const ProtocolStep& st, std::size_t index = 0) {
    const auto& layout = s.state.layout();
    switch (st.kind) {
        case StepKind::randomize: {
            const auto& label = st.labels.at(0);
            if (st.distribution.empty()) throw usage_error("step " + std::to_string(index + 1) + ": empty distribution");
            const ClassicalDistribution p(SubsystemLayout({label}, {st.distribution.size()}), st.distribution);
            return detail::attach(s, label, st.party, from_distribution(p));
        }
        case StepKind::discard: {
            const auto& label = st.labels.at(0);
            detail::require_owner(s, label, st.party, index);
            SharedState out{s.state.without(std::vector<std::string>{label}), s.owner};
            out.owner.erase(label);
            return out;
        }
        case StepKind::permute: {
            const auto labels = detail::permute_labels(s, st, index);
            std::size_t d = 1;
            for (const auto& l : labels) {
                detail::require_owner(s, l, st.party, index);
                if (!s.state.is_classical(l))
                    throw usage_error("step " + std::to_string(index + 1) + ": '" + l + "' is not a classical register");
                d *= layout.dim_of(l);
            }
            if (st.permutation.size() != d || !detail::is_permutation_vector(st.permutation))
                throw usage_error("step " + std::to_string(index + 1) + ": permutation must be a bijection of " +
                                  std::to_string(d) + " values");
            const auto m = detail::permute_register(s.state.matrix(), layout, labels, st.permutation);
            return {DensityState::unchecked(layout, m, s.state.classical()), s.owner};
        }
        case StepKind::communicate: {
            const auto& label = st.labels.at(0);
            detail::require_owner(s, label, st.party, index);
            if (!s.state.is_classical(label))
                throw usage_error("step " + std::to_string(index + 1) + ": only classical registers can be communicated");
            const Party to = receiver_of(st.party);
            const auto rl = copy_label(label, to), el = copy_label(label, Party::eve);
            if (layout.contains(rl) || layout.contains(el))
                throw usage_error("step " + std::to_string(index + 1) + ": '" + label + "' was already communicated");
            SubsystemLayout out_layout;
            const auto m = detail::fan_out(s.state.matrix(), layout, label, out_layout, rl, el);
            auto cl = s.state.classical();
            cl.push_back(rl);
            cl.push_back(el);
            SharedState out{DensityState::unchecked(out_layout, m, cl), s.owner};
            out.owner[rl] = to;
            out.owner[el] = Party::eve;
            return out;
        }
    }
    return s;
}

inline SharedState apply_classical_protocol(const SharedState& s, const Protocol& proto) {
    auto cur = s;
    for (std::size_t i = 0; i < proto.steps.size(); ++i) cur = apply_step(cur, proto.steps[i], i);
    return cur;
}

// Runs the protocol on a classical stand-in of the same shape; throws usage_error on the
// first invalid step.
inline void validate_protocol(const SubsystemLayout& layout, const PartyMap& owner, const std::vector<std::string>& classical,
                              const Protocol& proto) {
    (void)apply_classical_protocol({DensityState::unchecked(layout, ComplexMatrix::identity(layout.total_dim()) *
                                                                        (1.0 / double(layout.total_dim())),
                                                            classical),
                                    owner},
                                   proto);
}

// ---------------------------------------------------------------------------
// Coherent version

enum class CoherentKind { attach_superposition, transfer_to_eve, permutation_unitary, cnot_fanout };

inline const char* coherent_kind_name(CoherentKind k) {
    switch (k) {
        case CoherentKind::attach_superposition: return "attach-superposition";
        case CoherentKind::transfer_to_eve: return "transfer-to-eve";
        case CoherentKind::permutation_unitary: return "permutation-unitary";
        case CoherentKind::cnot_fanout: return "cnot-fanout";
    }
    return "?";
}

struct CoherentStep {
    CoherentKind kind = CoherentKind::transfer_to_eve;
    ProtocolStep source;
};

struct CoherentProtocol {
    std::vector<CoherentStep> steps;
};

inline CoherentProtocol coherent_version(const Protocol& proto) {
    CoherentProtocol out;
    for (const auto& s : proto.steps) {
        CoherentKind k = CoherentKind::transfer_to_eve;
        switch (s.kind) {
            case StepKind::randomize: k = CoherentKind::attach_superposition; break;
            case StepKind::discard: k = CoherentKind::transfer_to_eve; break;
            case StepKind::permute: k = CoherentKind::permutation_unitary; break;
            case StepKind::communicate: k = CoherentKind::cnot_fanout; break;
        }
        out.steps.push_back({k, s});
    }
    return out;
}

struct CoherentResult {
    SharedState state;
    std::vector<std::string> transferred;  // registers handed to Eve by former discard steps
};

inline CoherentResult apply_coherent_protocol(const SharedState& s, const CoherentProtocol& proto) {
    CoherentResult cur{s, {}};
    for (std::size_t i = 0; i < proto.steps.size(); ++i) {
        const auto& st = proto.steps[i].source;
        const auto& layout = cur.state.state.layout();
        switch (proto.steps[i].kind) {
            case CoherentKind::attach_superposition: {
                ComplexVector v(st.distribution.size());
                for (std::size_t k = 0; k < v.size(); ++k) {
                    if (st.distribution[k] < 0) throw invariant_error("randomize: negative probability");
                    v[k] = std::sqrt(st.distribution[k]);
                }
                const auto reg = pure_state(SubsystemLayout({st.labels.at(0)}, {v.size()}), v);
                cur.state = detail::attach(cur.state, st.labels.at(0), st.party, reg);
                break;
            }
            case CoherentKind::transfer_to_eve:
                detail::require_owner(cur.state, st.labels.at(0), st.party, i);
                cur.state.owner[st.labels.at(0)] = Party::eve;
                cur.transferred.push_back(st.labels.at(0));
                break;
            case CoherentKind::permutation_unitary: {
                const auto labels = detail::permute_labels(cur.state, st, i);
                for (const auto& l : labels) detail::require_owner(cur.state, l, st.party, i);
                const auto m = detail::permute_register(cur.state.state.matrix(), layout, labels, st.permutation);
                cur.state.state = DensityState::unchecked(layout, m, cur.state.state.classical());
                break;
            }
            case CoherentKind::cnot_fanout: {
                const auto& label = st.labels.at(0);
                detail::require_owner(cur.state, label, st.party, i);
                const Party to = receiver_of(st.party);
                SubsystemLayout out_layout;
                const auto m = detail::fan_out(cur.state.state.matrix(), layout, label, out_layout, copy_label(label, to),
                                               copy_label(label, Party::eve));
                cur.state.state = DensityState::unchecked(out_layout, m, cur.state.state.classical());
                cur.state.owner[copy_label(label, to)] = to;
                cur.state.owner[copy_label(label, Party::eve)] = Party::eve;
                break;
            }
        }
    }
    return cur;
}

// Trace distance between (i) measuring Alice's and Bob's registers of the qqq embedding and
// running the protocol, and (ii) running the coherent version and then measuring; registers
// transferred to Eve in (ii) are traced out.
inline double commutation_check(const ClassicalDistribution& p, const PartyMap& owner, const Protocol& proto) {
    const SharedState qqq{qqq_embed(p), owner};
    std::vector<std::string> ab = qqq.alice();
    for (const auto& l : qqq.bob()) ab.push_back(l);
    const SharedState ccq{dephase(qqq.state, ab), owner};
    const auto classical = apply_classical_protocol(ccq, proto);

    const auto coherent = apply_coherent_protocol(qqq, coherent_version(proto));
    const auto kept = detail::labels_without(coherent.state.state.layout(), coherent.transferred);
    auto measured = coherent.state.state.reduced(kept);
    std::vector<std::string> to_measure;
    for (const auto& l : kept) {
        const auto it = coherent.state.owner.find(l);
        if (it != coherent.state.owner.end() && it->second != Party::eve) to_measure.push_back(l);
    }
    measured = dephase(measured, to_measure);
    const auto& target = classical.state.layout().labels();
    if (measured.layout().size() != target.size()) throw invariant_error("commutation check: paths produce different registers");
    const auto aligned = permute_subsystems(measured.matrix(), measured.layout(), target);
    return trace_distance(aligned, classical.state.matrix());
}

inline double commutation_check(const ClassicalDistribution& p, const Protocol& proto) {
    return commutation_check(p, default_parties(p.layout()), proto);
}

// ---------------------------------------------------------------------------
// Key quality

// Trace distance between a tripartite ccq state and τ^ℓ (on the first 2^ℓ values of A and
// B) tensored with the state's own Eve marginal.
inline double key_quality(const DensityState& rho, std::size_t ell) {
    if (rho.layout().size() != 3) throw usage_error("key_quality: expected subsystems A, B, E");
    const auto& l = rho.layout().labels();
    if (!rho.is_classical(l[0]) || !rho.is_classical(l[1])) throw usage_error("key_quality: A and B must be classical");
    if (ell < 1 || ell >= 63) throw usage_error("key_quality: ell must be >= 1");
    const std::size_t k = std::size_t{1} << ell;
    const std::size_t da = rho.layout().dims()[0], db = rho.layout().dims()[1], de = rho.layout().dims()[2];
    if (da < k || db < k) throw usage_error("key_quality: A and B need at least 2^ell values");
    const auto eve = partial_trace(rho.matrix(), rho.layout(), std::vector<std::string>{l[2]});
    ComplexMatrix ideal(rho.dim(), rho.dim());
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t base = (i * db + i) * de;
        for (std::size_t a = 0; a < de; ++a)
            for (std::size_t b = 0; b < de; ++b) ideal(base + a, base + b) = eve(a, b) / double(k);
    }
    return trace_distance(rho.matrix(), ideal);
}

// ---------------------------------------------------------------------------
// Sampled LOPC maps

enum class LopcKind { local_channel, public_copy };

struct LopcOperation {
    LopcKind kind = LopcKind::local_channel;
    Party party = Party::alice;
    std::string label;
    QuantumChannel channel;  // local_channel only; output dimension equals input dimension
};

inline std::string describe(const LopcOperation& op) {
    return std::string(op.kind == LopcKind::local_channel ? "local channel on " : "public copy of ") + op.label + " (" +
           party_name(op.party) + ")";
}

// One of: a random channel on one of Alice's or Bob's registers, or a public copy of one of
// their classical registers. Never touches Eve's registers.
inline LopcOperation random_lopc_operation(std::uint64_t seed, const SharedState& s) {
    auto rng = make_rng(seed, 0x10c);
    std::vector<std::string> ab = s.alice(), copyable;
    for (const auto& l : s.bob()) ab.push_back(l);
    if (ab.empty()) throw usage_error("random_lopc_operation: Alice and Bob hold nothing");
    for (const auto& l : ab)
        if (s.state.is_classical(l) && !s.state.layout().contains(copy_label(l, Party::eve))) copyable.push_back(l);
    LopcOperation op;
    const bool copy = !copyable.empty() && uniform_index(rng, 3) == 2;
    op.label = copy ? copyable[uniform_index(rng, copyable.size())] : ab[uniform_index(rng, ab.size())];
    op.party = s.owner.at(op.label);
    if (copy) {
        op.kind = LopcKind::public_copy;
    } else {
        const std::size_t d = s.state.layout().dim_of(op.label);
        op.kind = LopcKind::local_channel;
        op.channel = random_channel(d, d, 2, rng);
    }
    return op;
}

inline SharedState apply_lopc(const SharedState& s, const LopcOperation& op) {
    if (op.kind == LopcKind::public_copy) {
        ProtocolStep st;
        st.kind = StepKind::communicate;
        st.party = op.party;
        st.labels = {op.label};
        return apply_step(s, st);
    }
    return {apply_channel(s.state, op.channel, op.label), s.owner};
}

// ---------------------------------------------------------------------------
// Random protocols

// `steps` valid steps for Alice and Bob on the given shape; the joint dimension stays at or
// below dim_cap.
inline Protocol random_protocol(std::uint64_t seed, const SubsystemLayout& layout, const PartyMap& owner, std::size_t steps = 3,
                                std::size_t dim_cap = 512) {
    auto rng = make_rng(seed, 0x9207);
    struct Reg {
        std::string label;
        std::size_t dim;
        Party party;
    };
    std::vector<Reg> regs;
    std::size_t total = 1;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        regs.push_back({layout.labels()[i], layout.dims()[i], owner.at(layout.labels()[i])});
        total *= layout.dims()[i];
    }
    auto held = [&](Party p) {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < regs.size(); ++i)
            if (regs[i].party == p) out.push_back(i);
        return out;
    };
    auto exists = [&](const std::string& l) {
        return std::any_of(regs.begin(), regs.end(), [&](const Reg& r) { return r.label == l; });
    };
    Protocol proto;
    std::size_t fresh = 0;
    while (proto.steps.size() < steps) {
        ProtocolStep st;
        st.party = uniform_index(rng, 2) == 0 ? Party::alice : Party::bob;
        const auto mine = held(st.party);
        const std::size_t kind = uniform_index(rng, 4);
        if (kind == 1 && !mine.empty()) {
            const auto i = mine[uniform_index(rng, mine.size())];
            st.kind = StepKind::discard;
            st.labels = {regs[i].label};
            total /= regs[i].dim;
            regs.erase(regs.begin() + std::ptrdiff_t(i));
        } else if (kind == 2 && !mine.empty()) {
            st.kind = StepKind::permute;
            auto pick = mine;
            std::shuffle(pick.begin(), pick.end(), rng);
            std::size_t d = 1;
            for (std::size_t k = 0; k < pick.size() && k < 2; ++k) {
                if (k == 1 && d * regs[pick[k]].dim > 16) break;
                st.labels.push_back(regs[pick[k]].label);
                d *= regs[pick[k]].dim;
            }
            st.permutation.resize(d);
            std::iota(st.permutation.begin(), st.permutation.end(), std::size_t{0});
            std::shuffle(st.permutation.begin(), st.permutation.end(), rng);
        } else if (kind == 3 && !mine.empty()) {
            const auto i = mine[uniform_index(rng, mine.size())];
            const Party to = receiver_of(st.party);
            const auto rl = copy_label(regs[i].label, to), el = copy_label(regs[i].label, Party::eve);
            if (total * regs[i].dim * regs[i].dim > dim_cap || exists(rl) || exists(el)) continue;
            st.kind = StepKind::communicate;
            st.labels = {regs[i].label};
            total *= regs[i].dim * regs[i].dim;
            const std::size_t d = regs[i].dim;
            regs.push_back({rl, d, to});
            regs.push_back({el, d, Party::eve});
        } else {
            const std::size_t d = 2 + uniform_index(rng, 2);
            if (total * d > dim_cap) continue;
            std::string label;
            do label = "r" + std::to_string(fresh++);
            while (exists(label));
            st.kind = StepKind::randomize;
            st.labels = {label};
            st.distribution = random_probability_vector(d, rng);
            total *= d;
            regs.push_back({label, d, st.party});
        }
        proto.steps.push_back(std::move(st));
    }
    return proto;
}

// ---------------------------------------------------------------------------
// Shipped protocol for the gap distribution

// Alice draws a bit r, flips the low bit of A when r = 1 and announces r; Bob applies the
// same flip to B. Both then forget r.
inline Protocol gap_protocol() {
    return parse_protocol(
        "randomize A r 0.5,0.5\n"
        "permute A A+r 0,3,2,1,4,7,6,5\n"
        "communicate A r\n"
        "permute B B+r@B 0,3,2,1,4,7,6,5\n"
        "discard A r\n"
        "discard B r@B\n");
}

}  // namespace skb
