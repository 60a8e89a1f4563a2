// Devetak-Winter bound, quantum and classical intrinsic information, reduced intrinsic information.
#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skb/bounds/estimate.hpp"
#include "skb/entropy.hpp"

namespace skb {

inline constexpr std::size_t kDeterministicMapCap = 4096;
inline constexpr std::size_t kGridPointCap = 4'000'000;

// I(A:B) − I(A:E) on a tripartite state with classical A.
inline BoundEstimate dw_lower_bound(const DensityState& rho) {
    detail::require_parts(rho, 3, "dw");
    const auto& a = detail::label_at(rho, 0);
    const auto& b = detail::label_at(rho, 1);
    const auto& e = detail::label_at(rho, 2);
    if (!rho.is_classical(a)) throw usage_error("dw: Alice's register '" + a + "' must be classical");
    BoundEstimate r;
    r.name = "dw";
    r.direction = Direction::exact;
    r.value = mutual_information(rho, {a}, {b}) - mutual_information(rho, {a}, {e});
    r.witness = "I(A:B) - I(A:E)";
    return r;
}

// ---------------------------------------------------------------------------
// Quantum intrinsic information

struct IntrinsicOptions {
    std::size_t eprime_dim = 0;  // 0: d_E
    std::size_t env_dim = 0;     // 0: d_E
    std::vector<ComplexMatrix> warm_starts;  // isometries E -> E' ⊗ env tried as extra fixed starts
};

namespace detail {

inline double tri_cmi(const ComplexMatrix& m, const SubsystemLayout& l) {
    const std::vector<std::string> a{l.labels()[0]}, b{l.labels()[1]}, e{l.labels()[2]};
    return conditional_mutual_information(m, l, a, b, e);
}

// Applies v to the middle factor of a vector on (left, in, right).
inline ComplexVector apply_middle(std::span<const cplx> psi, std::size_t left, std::size_t in, std::size_t right,
                                  const ComplexMatrix& v) {
    const std::size_t out = v.rows();
    ComplexVector r(left * out * right, 0.0);
    for (std::size_t l = 0; l < left; ++l)
        for (std::size_t i = 0; i < in; ++i) {
            const cplx* src = &psi[(l * in + i) * right];
            for (std::size_t o = 0; o < out; ++o) {
                const cplx c = v(o, i);
                if (c == cplx(0)) continue;
                cplx* dst = &r[(l * out + o) * right];
                for (std::size_t t = 0; t < right; ++t) dst[t] += c * src[t];
            }
        }
    return r;
}

// PureCmi built from brace lists.
struct PureCmiFn {
    PureCmiFn(const SubsystemLayout& l, std::vector<std::string> a, std::vector<std::string> b, std::vector<std::string> e)
        : impl(l, a, b, e) {}
    double operator()(std::span<const cplx> v) const { return impl(v); }
    PureCmi impl;
};

// V|e> = |e>_{E'} |0>_env
inline ComplexMatrix identity_embedding(std::size_t d, std::size_t out, std::size_t env) {
    ComplexMatrix v(out * env, d);
    for (std::size_t e = 0; e < d; ++e) v(e * env, e) = 1;
    return v;
}

// V|e> = |0>_{E'} |e>_env
inline ComplexMatrix discard_embedding(std::size_t d, std::size_t out, std::size_t env) {
    ComplexMatrix v(out * env, d);
    for (std::size_t e = 0; e < d; ++e) v(e, e) = 1;
    return v;
}

}  // namespace detail

// inf over channels E -> E' of I(A:B|E'), searched over Stinespring isometries.
inline BoundEstimate intrinsic_information(const DensityState& rho, const IntrinsicOptions& opt, const OptimizerConfig& cfg) {
    detail::require_parts(rho, 3, "intrinsic");
    const auto& layout = rho.layout();
    const std::string e_label = layout.labels()[2];
    const std::size_t de = layout.dims()[2];
    const std::size_t ep = opt.eprime_dim ? opt.eprime_dim : de;
    const std::size_t env = opt.env_dim ? opt.env_dim : de;
    if (ep * env < de) throw usage_error("intrinsic: eprime_dim·env_dim must be at least d_E");

    BoundEstimate r;
    r.name = "intrinsic";
    r.direction = Direction::upper_estimate;
    r.parameters = {{"eprime_dim", double(ep)}, {"env_dim", double(env)}};

    // evaluated on a purification: |ψ>_{ABER} -> (I ⊗ V ⊗ I)|ψ> on A B E' env R
    const auto pur = purify(rho, "R#");
    const std::size_t dab = layout.dims()[0] * layout.dims()[1], dr = pur.layout.dims().back();
    const SubsystemLayout out({"A", "B", "E'", "env", "R"}, {layout.dims()[0], layout.dims()[1], ep, env, dr});
    const detail::PureCmiFn cmi(out, {"A"}, {"B"}, {"E'"});
    const Objective f = [&](std::span<const double> x) {
        return cmi(detail::apply_middle(pur.vector, dab, de, dr, decode_isometry(x, de, ep * env)));
    };
    std::vector<std::vector<double>> starts;
    if (ep >= de) starts.push_back(encode_isometry(detail::identity_embedding(de, ep, env)));
    if (env >= de) starts.push_back(encode_isometry(detail::discard_embedding(de, ep, env)));
    for (const auto& w : opt.warm_starts) {
        if (w.rows() != ep * env || w.cols() != de) throw usage_error("intrinsic: warm start has wrong shape");
        starts.push_back(encode_isometry(w));
    }
    auto outcome = multi_restart_minimize(f, IsometryParam::size(de, ep * env), cfg, starts, 0.0);
    r.value = outcome.best_value;
    r.witness = outcome.best_restart == 0 && ep >= de ? "identity channel" : "optimized channel";
    r.optimizer = std::move(outcome);
    return r;
}

inline BoundEstimate intrinsic_information(const DensityState& rho, const OptimizerConfig& cfg) {
    return intrinsic_information(rho, IntrinsicOptions{}, cfg);
}

// ---------------------------------------------------------------------------
// Classical intrinsic information

namespace detail {

// p[(a·nb + b)·ne + e]
struct ClassicalTri {
    std::size_t na = 1, nb = 1, ne = 1;
    std::vector<double> p;
};

inline ClassicalTri as_tri(const ClassicalDistribution& d) {
    require_parts(d, 3, "classical tripartite");
    return {d.layout().dims()[0], d.layout().dims()[1], d.layout().dims()[2], d.probs()};
}

// Reusable buffers for repeated CMI evaluations.
class CmiWork {
public:
    double operator()(const std::vector<double>& q, std::size_t na, std::size_t nb, std::size_t ne) {
        pae_.assign(na * ne, 0.0);
        pbe_.assign(nb * ne, 0.0);
        pe_.assign(ne, 0.0);
        double habe = 0;
        for (std::size_t a = 0; a < na; ++a)
            for (std::size_t b = 0; b < nb; ++b) {
                const double* row = &q[(a * nb + b) * ne];
                for (std::size_t e = 0; e < ne; ++e) {
                    const double x = row[e];
                    if (x <= 0) continue;
                    pae_[a * ne + e] += x;
                    pbe_[b * ne + e] += x;
                    pe_[e] += x;
                    habe -= x * std::log2(x);
                }
            }
        return shannon_entropy(pae_) + shannon_entropy(pbe_) - habe - shannon_entropy(pe_);
    }

private:
    std::vector<double> pae_, pbe_, pe_;
};

// q(a,b,e') = Σ_e p(a,b,e) W(e'|e)
inline void push_through(const ClassicalTri& t, const double* w, std::size_t ep, std::vector<double>& q) {
    const std::size_t nab = t.na * t.nb;
    q.assign(nab * ep, 0.0);
    for (std::size_t ab = 0; ab < nab; ++ab)
        for (std::size_t e = 0; e < t.ne; ++e) {
            const double x = t.p[ab * t.ne + e];
            if (x == 0) continue;
            for (std::size_t f = 0; f < ep; ++f) q[ab * ep + f] += x * w[e * ep + f];
        }
}

inline std::size_t checked_pow(std::size_t base, std::size_t exp, std::size_t cap) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (r > cap / std::max<std::size_t>(base, 1)) return cap + 1;
        r *= base;
    }
    return r;
}

inline std::size_t binom(std::size_t n, std::size_t k) {
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Integer compositions of n into k parts.
inline std::vector<std::vector<int>> compositions(int n, std::size_t k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(k, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i + 1 == k) {
            cur[i] = left;
            out.push_back(cur);
            return;
        }
        for (int v = left; v >= 0; --v) {
            cur[i] = v;
            rec(i + 1, left - v);
        }
    };
    rec(0, n);
    return out;
}

struct GridResult {
    double min_value = 0;
    double lower = 0;
    std::size_t points = 0;
    int denominator = 0;
};

// Exhaustive grid over row-stochastic maps with entries in (1/N)ℤ.
inline GridResult grid_oracle(const ClassicalTri& t, std::size_t ep, int denominator) {
    const auto rows = compositions(denominator, ep);
    const std::size_t per = rows.size();
    std::vector<std::size_t> idx(t.ne, 0), best_idx(t.ne, 0);
    std::vector<double> w(t.ne * ep), q;
    CmiWork work;
    GridResult g;
    g.denominator = denominator;
    g.min_value = std::numeric_limits<double>::infinity();
    auto eval = [&](const std::vector<std::size_t>& ix) {
        for (std::size_t e = 0; e < t.ne; ++e)
            for (std::size_t f = 0; f < ep; ++f) w[e * ep + f] = rows[ix[e]][f] / double(denominator);
        push_through(t, w.data(), ep, q);
        return work(q, t.na, t.nb, ep);
    };
    while (true) {
        const double v = eval(idx);
        ++g.points;
        if (v < g.min_value) {
            g.min_value = v;
            best_idx = idx;
        }
        std::size_t k = 0;
        while (k < t.ne && ++idx[k] == per) idx[k++] = 0;
        if (k == t.ne) break;
    }
    // largest change when one unit of mass moves inside one row of the minimizer
    double spread = 0;
    for (std::size_t e = 0; e < t.ne; ++e)
        for (std::size_t from = 0; from < ep; ++from)
            for (std::size_t to = 0; to < ep; ++to) {
                if (from == to || rows[best_idx[e]][from] == 0) continue;
                auto row = rows[best_idx[e]];
                --row[from];
                ++row[to];
                const auto it = std::find(rows.begin(), rows.end(), row);
                auto nb = best_idx;
                nb[e] = static_cast<std::size_t>(it - rows.begin());
                spread = std::max(spread, std::abs(eval(nb) - g.min_value));
            }
    g.lower = g.min_value - spread;
    return g;
}

}  // namespace detail

struct ClassicalIntrinsicOptions {
    std::size_t eprime_size = 0;  // 0: |E|
    bool grid = false;
    int grid_denominator = 0;  // grid step 1/N; 0 picks the finest of 64, 32, 16, 8, 4, 2 within the point cap
};

// Number of grid points for a given step; used to enforce the cap.
inline std::size_t grid_point_count(std::size_t ne, std::size_t ep, int denominator) {
    const std::size_t per = detail::binom(static_cast<std::size_t>(denominator) + ep - 1, ep - 1);
    return detail::checked_pow(per, ne, kGridPointCap);
}

inline BoundEstimate classical_intrinsic(const ClassicalDistribution& dist, const ClassicalIntrinsicOptions& opt,
                                         const OptimizerConfig& cfg) {
    const auto t = detail::as_tri(dist);
    const std::size_t ep = opt.eprime_size ? opt.eprime_size : t.ne;
    BoundEstimate r;
    r.name = "classical-intrinsic";
    r.direction = Direction::upper_estimate;
    r.parameters = {{"eprime_size", double(ep)}};

    detail::CmiWork work;
    std::vector<double> q;
    double best = std::numeric_limits<double>::infinity();
    std::string witness;

    // deterministic maps e -> f(e)
    if (detail::checked_pow(ep, t.ne, kDeterministicMapCap) <= kDeterministicMapCap) {
        std::vector<std::size_t> f(t.ne, 0);
        std::vector<double> w(t.ne * ep);
        while (true) {
            std::fill(w.begin(), w.end(), 0.0);
            for (std::size_t e = 0; e < t.ne; ++e) w[e * ep + f[e]] = 1.0;
            detail::push_through(t, w.data(), ep, q);
            const double v = work(q, t.na, t.nb, ep);
            if (v < best) {
                best = v;
                std::ostringstream os;
                os << "deterministic map [";
                for (std::size_t e = 0; e < t.ne; ++e) os << (e ? "," : "") << f[e];
                os << "]";
                witness = os.str();
            }
            std::size_t k = 0;
            while (k < t.ne && ++f[k] == ep) f[k++] = 0;
            if (k == t.ne) break;
        }
        r.parameters["deterministic_maps"] = double(detail::checked_pow(ep, t.ne, kDeterministicMapCap));
    }

    const Objective obj = [&](std::span<const double> x) {
        const auto w = stochastic_from_raw(x, t.ne, ep);
        detail::push_through(t, w.data(), ep, q);
        return work(q, t.na, t.nb, ep);
    };
    std::vector<std::vector<double>> starts;
    if (ep >= t.ne) {
        std::vector<double> id(t.ne * ep, 0.0);
        for (std::size_t e = 0; e < t.ne; ++e) id[e * ep + e] = 8.0;
        starts.push_back(std::move(id));
    }
    auto outcome = multi_restart_minimize(obj, t.ne * ep, cfg, starts, 0.0);
    if (outcome.best_value < best) {
        best = outcome.best_value;
        witness = "optimized stochastic map";
    }
    r.optimizer = std::move(outcome);

    if (opt.grid) {
        if (t.ne > 4 || ep > 4) throw usage_error("classical intrinsic grid: |E| and |E'| must be at most 4");
        int n = opt.grid_denominator;
        if (n == 0) {
            for (int cand : {64, 32, 16, 8, 4, 2})
                if (grid_point_count(t.ne, ep, cand) <= kGridPointCap) {
                    n = cand;
                    break;
                }
            if (n == 0) throw usage_error("classical intrinsic grid: no grid step fits the point cap");
        } else if (n < 1 || grid_point_count(t.ne, ep, n) > kGridPointCap) {
            throw usage_error("classical intrinsic grid: step 1/" + std::to_string(n) + " exceeds the point cap");
        }
        const auto g = detail::grid_oracle(t, ep, n);
        if (g.min_value < best) {
            best = g.min_value;
            witness = "grid point";
        }
        r.bracket = std::make_pair(g.lower, best);
        r.parameters["grid_step"] = 1.0 / n;
        r.parameters["grid_points"] = double(g.points);
        r.parameters["grid_min"] = g.min_value;
    }
    r.value = best;
    r.witness = witness;
    return r;
}

inline BoundEstimate classical_intrinsic(const ClassicalDistribution& dist, const OptimizerConfig& cfg) {
    return classical_intrinsic(dist, ClassicalIntrinsicOptions{}, cfg);
}

// ---------------------------------------------------------------------------
// Reduced intrinsic information

struct ReducedOptions {
    int a = 1;
    std::size_t alphabet_cap = 4;  // classical E' alphabet bound (a = 1)
    std::size_t ext_dim = 2;       // quantum E' dimension (a = 2)
    std::size_t refine = 3;        // candidates passed to the full intrinsic search
};

namespace detail {

inline double shannon(const std::vector<double>& p) { return shannon_entropy(p); }

// Deterministic maps E -> E tried inside each block of E' (all of them up to 256).
inline std::vector<std::vector<std::size_t>> eve_maps(std::size_t ne) {
    std::vector<std::vector<std::size_t>> maps;
    if (checked_pow(ne, ne, 256) > 256) {
        std::vector<std::size_t> id(ne), zero(ne, 0);
        for (std::size_t e = 0; e < ne; ++e) id[e] = e;
        return {id, zero};
    }
    std::vector<std::size_t> f(ne, 0);
    while (true) {
        maps.push_back(f);
        std::size_t k = 0;
        while (k < ne && ++f[k] == ne) f[k++] = 0;
        if (k == ne) break;
    }
    return maps;
}

struct ExtensionScore {
    double entropy = 0;
    double cmi = 0;
};

// S(E') and Σ_x p(x) min_f I(A:B|f(E), E'=x) for an extension r(a,b,e,e') (e' fastest).
// Keeping E, dropping E, and dropping E' within a block are all among the maps f.
inline ExtensionScore score_extension(const std::vector<double>& r, std::size_t na, std::size_t nb, std::size_t ne,
                                      std::size_t m, const std::vector<std::vector<std::size_t>>& maps, CmiWork& work) {
    ExtensionScore s;
    std::vector<double> pm(m, 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) pm[i % m] += r[i];
    s.entropy = shannon(pm);
    const std::size_t nabe = na * nb * ne;
    std::vector<double> block(nabe), q(nabe);
    for (std::size_t x = 0; x < m; ++x) {
        if (pm[x] <= 0) continue;
        for (std::size_t i = 0; i < nabe; ++i) block[i] = r[i * m + x] / pm[x];
        double best = std::numeric_limits<double>::infinity();
        for (const auto& f : maps) {
            std::fill(q.begin(), q.end(), 0.0);
            for (std::size_t ab = 0; ab < na * nb; ++ab)
                for (std::size_t e = 0; e < ne; ++e) q[ab * ne + f[e]] += block[ab * ne + e];
            best = std::min(best, work(q, na, nb, ne));
        }
        s.cmi += pm[x] * best;
    }
    return s;
}

// Restricted-growth strings of length n with at most cap blocks.
inline void for_each_partition(std::size_t n, std::size_t cap, const std::function<void(const std::vector<std::size_t>&, std::size_t)>& fn) {
    std::vector<std::size_t> a(n, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t blocks) {
        if (i == n) {
            fn(a, blocks);
            return;
        }
        for (std::size_t v = 0; v <= blocks && v < cap; ++v) {
            a[i] = v;
            rec(i + 1, std::max(blocks, v + 1));
        }
    };
    if (n == 0) {
        fn(a, 1);
        return;
    }
    rec(0, 0);
}

struct Candidate {
    double score = 0;  // a·S(E') + cmi
    double entropy = 0;
    double cmi = 0;
    std::vector<std::size_t> labels;  // per support point
    std::size_t blocks = 1;
};

}  // namespace detail

// Classical extensions E' = f(a,b,e), then stochastic refinements; the empty extension is included.
inline BoundEstimate reduced_intrinsic_classical(const ClassicalDistribution& dist, const ReducedOptions& opt,
                                                 const OptimizerConfig& cfg) {
    const auto t = detail::as_tri(dist);
    const double a = opt.a;
    if (opt.a != 1 && opt.a != 2) throw usage_error("reduced intrinsic: a must be 1 or 2");
    if (opt.alphabet_cap < 1) throw usage_error("reduced intrinsic: alphabet cap must be >= 1");
    BoundEstimate r;
    r.name = "reduced-intrinsic";
    r.direction = Direction::upper_estimate;
    r.parameters = {{"a", a}, {"alphabet_cap", double(opt.alphabet_cap)}};

    std::vector<std::size_t> supp;
    for (std::size_t i = 0; i < t.p.size(); ++i)
        if (t.p[i] > kZeroProb) supp.push_back(i);

    detail::CmiWork work;
    std::vector<double> ext;
    const auto maps = detail::eve_maps(t.ne);
    const double base = std::min(work(t.p, t.na, t.nb, t.ne), [&] {
        std::vector<double> pab(t.na * t.nb, 0.0);
        for (std::size_t i = 0; i < t.p.size(); ++i) pab[i / t.ne] += t.p[i];
        return classical_mutual_information(pab, t.na, t.nb);
    }());

    auto score_labels = [&](const std::vector<std::size_t>& lab, std::size_t m) {
        ext.assign(t.p.size() * m, 0.0);
        for (std::size_t s = 0; s < supp.size(); ++s) ext[supp[s] * m + lab[s]] = t.p[supp[s]];
        const auto sc = detail::score_extension(ext, t.na, t.nb, t.ne, m, maps, work);
        detail::Candidate c;
        c.entropy = sc.entropy;
        c.cmi = std::min(sc.cmi, base);
        c.score = a * c.entropy + c.cmi;
        c.labels = lab;
        c.blocks = m;
        return c;
    };

    std::vector<detail::Candidate> cands;
    auto consider = [&](const std::vector<std::size_t>& lab, std::size_t m) {
        cands.push_back(score_labels(lab, m));
        std::sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) { return x.score < y.score; });
        if (cands.size() > std::max<std::size_t>(opt.refine, 1)) cands.pop_back();
    };

    std::size_t enumerated = 0;
    if (supp.size() <= 8) {
        detail::for_each_partition(supp.size(), opt.alphabet_cap, [&](const std::vector<std::size_t>& lab, std::size_t m) {
            consider(lab, std::max<std::size_t>(m, 1));
            ++enumerated;
        });
    } else {
        // coordinate functions, then seeded random functions
        for (std::size_t coord = 0; coord < 3; ++coord) {
            const std::size_t dims[3] = {t.na, t.nb, t.ne};
            if (dims[coord] > opt.alphabet_cap) continue;
            std::vector<std::size_t> lab(supp.size());
            for (std::size_t s = 0; s < supp.size(); ++s) {
                const std::size_t i = supp[s];
                const std::size_t digit[3] = {i / (t.nb * t.ne), (i / t.ne) % t.nb, i % t.ne};
                lab[s] = digit[coord];
            }
            consider(lab, dims[coord]);
            ++enumerated;
        }
        auto rng = make_rng(cfg.seed, 0x7ed0ce);
        for (std::size_t k = 0; k < 2000; ++k) {
            const std::size_t m = 1 + uniform_index(rng, opt.alphabet_cap);
            std::vector<std::size_t> lab(supp.size());
            for (auto& l : lab) l = uniform_index(rng, m);
            consider(lab, m);
            ++enumerated;
        }
    }
    r.parameters["extensions_scored"] = double(enumerated);

    double best = std::numeric_limits<double>::infinity();
    std::string witness;
    auto describe = [&](const detail::Candidate& c) {
        std::ostringstream os;
        os << "E' = f(a,b,e) with " << c.blocks << " values: ";
        for (std::size_t s = 0; s < supp.size(); ++s) {
            const std::size_t i = supp[s];
            os << (s ? " " : "") << "(" << i / (t.nb * t.ne) << "," << (i / t.ne) % t.nb << "," << i % t.ne << ")->" << c.labels[s];
        }
        return os.str();
    };

    // full intrinsic search over Eve holding (E, E') for the best candidates
    for (const auto& c : cands) {
        double v = c.score;
        if (c.blocks > 1) {
            ext.assign(t.p.size() * c.blocks, 0.0);
            for (std::size_t s = 0; s < supp.size(); ++s) ext[supp[s] * c.blocks + c.labels[s]] = t.p[supp[s]];
            const ClassicalDistribution joint(SubsystemLayout({"A", "B", "EE'"}, {t.na, t.nb, t.ne * c.blocks}), ext);
            auto small = cfg;
            small.restarts = std::min<std::size_t>(cfg.restarts, 4);
            const auto in = classical_intrinsic(joint, small);
            v = std::min(v, a * c.entropy + in.value);
        }
        if (v < best) {
            best = v;
            witness = describe(c);
        }
    }

    // stochastic refinement around the best candidate
    if (!cands.empty() && cands.front().blocks > 1) {
        const auto& c = cands.front();
        const std::size_t m = c.blocks;
        const Objective f = [&](std::span<const double> x) {
            const auto w = stochastic_from_raw(x, supp.size(), m);
            ext.assign(t.p.size() * m, 0.0);
            for (std::size_t s = 0; s < supp.size(); ++s)
                for (std::size_t j = 0; j < m; ++j) ext[supp[s] * m + j] = t.p[supp[s]] * w[s * m + j];
            const auto sc = detail::score_extension(ext, t.na, t.nb, t.ne, m, maps, work);
            return a * sc.entropy + std::min(sc.cmi, base);
        };
        std::vector<double> start(supp.size() * m, 0.0);
        for (std::size_t s = 0; s < supp.size(); ++s) start[s * m + c.labels[s]] = 8.0;
        auto small = cfg;
        small.restarts = std::min<std::size_t>(cfg.restarts, 4);
        auto outcome = multi_restart_minimize(f, supp.size() * m, small, {start}, 0.0);
        if (outcome.best_value < best) {
            best = outcome.best_value;
            witness = "stochastic extension with " + std::to_string(m) + " values";
        }
        r.optimizer = std::move(outcome);
    }

    const auto empty = classical_intrinsic(dist, cfg);
    if (empty.value <= best) {
        best = empty.value;
        witness = "empty extension";
    }
    r.parameters["intrinsic_without_extension"] = empty.value;
    r.value = best;
    r.witness = witness;
    return r;
}

// Value for an explicitly given classical extension E' (the last register of `with_ext`):
// intrinsic information with Eve holding (E, E') plus a·S(E').
inline BoundEstimate reduced_intrinsic_with_extension(const ClassicalDistribution& with_ext, int a, const OptimizerConfig& cfg) {
    detail::require_parts(with_ext, 4, "reduced intrinsic with extension");
    const auto& l = with_ext.layout().labels();
    const auto tri = with_ext.grouped({{l[0], {l[0]}}, {l[1], {l[1]}}, {l[2] + l[3], {l[2], l[3]}}});
    const auto ext = with_ext.marginal(std::vector<std::string>{l[3]});
    const auto in = classical_intrinsic(tri, cfg);
    BoundEstimate r;
    r.name = "reduced-intrinsic";
    r.direction = Direction::upper_estimate;
    r.value = in.value + a * shannon_entropy(ext.probs());
    r.parameters = {{"a", double(a)}, {"extension_entropy", shannon_entropy(ext.probs())}, {"intrinsic_with_extension", in.value}};
    r.witness = "given extension " + l[3];
    r.optimizer = in.optimizer;
    return r;
}

// Quantum extensions from the purifying system: a POVM (a = 1, classical E') or a
// channel (a = 2) on R; the empty extension is included.
inline BoundEstimate reduced_intrinsic_information(const DensityState& rho, const ReducedOptions& opt, const OptimizerConfig& cfg) {
    detail::require_parts(rho, 3, "reduced intrinsic");
    if (opt.a != 1 && opt.a != 2) throw usage_error("reduced intrinsic: a must be 1 or 2");
    const auto& labels = rho.layout().labels();
    if (opt.a == 1 && rho.all_classical(labels)) {
        std::vector<double> p(rho.dim());
        for (std::size_t i = 0; i < rho.dim(); ++i) p[i] = std::max(0.0, rho.matrix()(i, i).real());
        double s = 0;
        for (double x : p) s += x;
        for (double& x : p) x /= s;
        return reduced_intrinsic_classical(ClassicalDistribution(rho.layout(), std::move(p)), opt, cfg);
    }
    const double a = opt.a;
    BoundEstimate r;
    r.name = "reduced-intrinsic";
    r.direction = Direction::upper_estimate;
    const std::size_t da = rho.layout().dims()[0], db = rho.layout().dims()[1], de = rho.layout().dims()[2];
    const auto pur = purify(rho, "R#");
    const std::size_t dr = pur.layout.dim_of("R#");
    const std::size_t m = opt.a == 1 ? opt.alphabet_cap : opt.ext_dim;
    if (m < 1) throw usage_error("reduced intrinsic: extension size must be >= 1");
    r.parameters = {{"a", a}, {opt.a == 1 ? "alphabet_cap" : "ext_dim", double(m)}};

    const SubsystemLayout abe({"A", "B", "E"}, {da, db, de});
    const double base = std::min(detail::tri_cmi(rho.matrix(), abe),
                                 mutual_information(rho.matrix(), abe, std::vector<std::string>{"A"}, std::vector<std::string>{"B"}));
    const std::size_t d_abe = da * db * de;

    // ρ_{ABEX} from an isometry R -> X ⊗ R' (dims m·dr)
    auto extension = [&](const ComplexMatrix& v) {
        ComplexMatrix out(d_abe * m, d_abe * m);
        if (opt.a == 1) {
            // classical X: Σ_x Tr_R[(I ⊗ K_x) ψψ† (I ⊗ K_x)†] ⊗ |x><x|, K_x = rows x·dr..x·dr+dr−1 of v
            for (std::size_t x = 0; x < m; ++x) {
                ComplexMatrix phi(d_abe, dr);
                for (std::size_t i = 0; i < d_abe; ++i)
                    for (std::size_t s = 0; s < dr; ++s) {
                        cplx acc = 0;
                        for (std::size_t t = 0; t < dr; ++t) acc += v(x * dr + s, t) * pur.vector[i * dr + t];
                        phi(i, s) = acc;
                    }
                const auto blk = phi * phi.adjoint();
                for (std::size_t i = 0; i < d_abe; ++i)
                    for (std::size_t j = 0; j < d_abe; ++j) out(i * m + x, j * m + x) = blk(i, j);
            }
        } else {
            // quantum X: Tr_{R'} of (I ⊗ V)|ψ>
            ComplexMatrix phi(d_abe * m, dr);
            for (std::size_t i = 0; i < d_abe; ++i)
                for (std::size_t x = 0; x < m; ++x)
                    for (std::size_t s = 0; s < dr; ++s) {
                        cplx acc = 0;
                        for (std::size_t t = 0; t < dr; ++t) acc += v(x * dr + s, t) * pur.vector[i * dr + t];
                        phi(i * m + x, s) = acc;
                    }
            out = phi * phi.adjoint();
        }
        return out;
    };
    // (S(X), min CMI) evaluated on pure vectors: φ = (I ⊗ V)|ψ> on A B E X R'
    const SubsystemLayout pure_x({"A", "B", "E", "X", "R"}, {da, db, de, m, dr});
    const SubsystemLayout pure_abe({"A", "B", "E", "R"}, {da, db, de, dr});
    const auto x_cut = detail::split_index(pure_x, {false, false, false, true, false});
    const detail::PureCmiFn cmi_ex(pure_x, {"A"}, {"B"}, {"E", "X"}), cmi_x(pure_x, {"A"}, {"B"}, {"X"});
    const detail::PureCmiFn cmi_e(pure_abe, {"A"}, {"B"}, {"E"}), mi(pure_abe, {"A"}, {"B"}, {});
    auto score = [&](const ComplexMatrix& v) {
        const auto phi = detail::apply_middle(pur.vector, d_abe, dr, 1, v);
        if (opt.a == 2) return std::pair{detail::cut_entropy(x_cut, phi), std::min({cmi_ex(phi), cmi_x(phi), base})};
        // classical X: branch x has weight w_x and pure state φ_x on A B E R'
        std::vector<double> w(m, 0.0);
        double c_ex = 0, c_x = 0;
        ComplexVector branch(d_abe * dr);
        for (std::size_t x = 0; x < m; ++x) {
            for (std::size_t i = 0; i < d_abe; ++i)
                for (std::size_t t = 0; t < dr; ++t) branch[i * dr + t] = phi[(i * m + x) * dr + t];
            for (const auto& z : branch) w[x] += std::norm(z);
            if (w[x] <= 1e-14) continue;
            for (auto& z : branch) z /= std::sqrt(w[x]);
            c_ex += w[x] * cmi_e(branch);
            c_x += w[x] * mi(branch);
        }
        return std::pair{shannon_entropy(w), std::min({c_ex, c_x, base})};
    };
    const Objective f = [&](std::span<const double> x) {
        const auto [s, c] = score(decode_isometry(x, dr, m * dr));
        return a * s + c;
    };
    std::vector<std::vector<double>> starts;
    {
        // trivial extension: everything to outcome / output 0
        ComplexMatrix v(m * dr, dr);
        for (std::size_t t = 0; t < dr; ++t) v(t, t) = 1;
        starts.push_back(encode_isometry(v));
    }
    auto outcome = multi_restart_minimize(f, IsometryParam::size(dr, m * dr), cfg, starts, 0.0);
    double best = outcome.best_value;
    std::string witness = "optimized extension from the purifying system";

    // full intrinsic search for the best extension when Eve's joint system is small
    if (de * m <= 4) {
        const auto v = decode_isometry(outcome.best_params, dr, m * dr);
        const auto ext = extension(v);
        const double s = score(v).first;
        const DensityState joint = DensityState::unchecked(SubsystemLayout({"A", "B", "EX"}, {da, db, de * m}), ext);
        auto small = cfg;
        small.restarts = std::min<std::size_t>(cfg.restarts, 4);
        const auto in = intrinsic_information(joint, small);
        if (a * s + in.value < best) best = a * s + in.value;
    }
    r.optimizer = std::move(outcome);

    const auto empty = intrinsic_information(rho, cfg);
    if (empty.value <= best) {
        best = empty.value;
        witness = "empty extension";
    }
    r.parameters["intrinsic_without_extension"] = empty.value;
    r.value = best;
    r.witness = witness;
    return r;
}

}  // namespace skb
