// Parameterizations (isometries, POVMs, stochastic maps) and a seeded multi-restart
// Nelder-Mead minimizer.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "skb/random.hpp"
#include "skb/states.hpp"

namespace skb {

// ---------------------------------------------------------------------------
// Parameterizations

struct IsometryParam {
    std::size_t in_dim = 1;
    std::size_t out_dim = 1;
    std::vector<double> raw;  // 2·in·out reals: column j, row i at 2·(j·out + i) (re, im)

    static std::size_t size(std::size_t in, std::size_t out) { return 2 * in * out; }
};

inline ComplexMatrix raw_to_matrix(std::span<const double> raw, std::size_t in, std::size_t out) {
    if (raw.size() != IsometryParam::size(in, out)) throw usage_error("isometry parameter has wrong length");
    ComplexMatrix m(out, in);
    for (std::size_t j = 0; j < in; ++j)
        for (std::size_t i = 0; i < out; ++i) m(i, j) = cplx(raw[2 * (j * out + i)], raw[2 * (j * out + i) + 1]);
    return m;
}

inline ComplexMatrix decode_isometry(std::span<const double> raw, std::size_t in, std::size_t out) {
    if (in > out) throw usage_error("isometry: input dimension exceeds output dimension");
    return orthonormalize_columns(raw_to_matrix(raw, in, out));
}

inline ComplexMatrix decode_isometry(const IsometryParam& p) { return decode_isometry(p.raw, p.in_dim, p.out_dim); }

// Inverse of raw_to_matrix; decode(encode(V)) reproduces an isometry V.
inline std::vector<double> encode_isometry(const ComplexMatrix& v) {
    std::vector<double> raw(IsometryParam::size(v.cols(), v.rows()));
    for (std::size_t j = 0; j < v.cols(); ++j)
        for (std::size_t i = 0; i < v.rows(); ++i) {
            raw[2 * (j * v.rows() + i)] = v(i, j).real();
            raw[2 * (j * v.rows() + i) + 1] = v(i, j).imag();
        }
    return raw;
}

inline QuantumChannel channel_from_isometry(const IsometryParam& p, std::size_t out_dim, std::size_t env_dim) {
    if (p.out_dim != out_dim * env_dim) throw usage_error("channel_from_isometry: out_dim·env_dim must equal the isometry output");
    return {p.in_dim, out_dim, env_dim, decode_isometry(p)};
}

// E_m = V† (|m><m| ⊗ I_r) V with r = out_dim / n_outcomes.
inline Povm povm_from_isometry_matrix(const ComplexMatrix& v, std::size_t n_outcomes) {
    if (n_outcomes == 0 || v.rows() % n_outcomes != 0) throw usage_error("povm_from_isometry: outcomes must divide output dim");
    const std::size_t r = v.rows() / n_outcomes, d = v.cols();
    Povm p;
    for (std::size_t m = 0; m < n_outcomes; ++m) {
        ComplexMatrix e(d, d);
        for (std::size_t s = 0; s < r; ++s) {
            const std::size_t row = m * r + s;
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b) e(a, b) += std::conj(v(row, a)) * v(row, b);
        }
        p.elements.push_back(std::move(e));
    }
    return p;
}

inline Povm povm_from_isometry(const IsometryParam& p, std::size_t n_outcomes) {
    return povm_from_isometry_matrix(decode_isometry(p), n_outcomes);
}

// Row-wise softmax; result is row-major rows×cols.
inline std::vector<double> stochastic_from_raw(std::span<const double> raw, std::size_t rows, std::size_t cols) {
    if (raw.size() != rows * cols) throw usage_error("stochastic_from_raw: wrong parameter length");
    std::vector<double> out(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < cols; ++c) mx = std::max(mx, raw[r * cols + c]);
        double s = 0;
        for (std::size_t c = 0; c < cols; ++c) s += (out[r * cols + c] = std::exp(raw[r * cols + c] - mx));
        for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] /= s;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Minimizer

struct OptimizerConfig {
    std::size_t restarts = 8;
    std::size_t max_iters = 20000;
    double tol = 1e-10;
    std::uint64_t seed = 1;
    double step_init = 0.5;

    void validate() const {
        if (restarts < 1) throw usage_error("optimizer: restarts must be >= 1");
        if (!(tol > 0)) throw usage_error("optimizer: tol must be > 0");
        if (max_iters < 1) throw usage_error("optimizer: max_iters must be >= 1");
        if (!(step_init > 0)) throw usage_error("optimizer: step_init must be > 0");
    }
};

struct OptimizationOutcome {
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<double> best_params;
    std::size_t restarts_run = 0;
    bool converged = false;
    std::vector<double> restart_values;
    std::size_t evaluations = 0;
    std::size_t best_restart = 0;
};

using Objective = std::function<double(std::span<const double>)>;

struct SimplexResult {
    std::vector<double> x;
    double value = 0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

namespace detail {

inline double checked_eval(const Objective& f, std::span<const double> x, std::size_t& evals) {
    ++evals;
    const double v = f(x);
    if (!std::isfinite(v)) throw numeric_error("objective returned a non-finite value");
    return v;
}

}  // namespace detail

// Nelder-Mead with dimension-adaptive coefficients. Stops when the spread of simplex
// values drops below tol, when the best value is within tol of `floor` (a known lower
// bound of f), or after max_iters iterations.
inline SimplexResult nelder_mead(const Objective& f, std::vector<double> x0, double step, std::size_t max_iters, double tol,
                                 double floor = -std::numeric_limits<double>::infinity()) {
    const std::size_t n = x0.size();
    SimplexResult res;
    if (n == 0) {
        res.value = detail::checked_eval(f, x0, res.evaluations);
        res.x = std::move(x0);
        res.converged = true;
        return res;
    }
    const double nd = static_cast<double>(n);
    const double alpha = 1.0, beta = 1.0 + 2.0 / nd, gamma = 0.75 - 1.0 / (2.0 * nd), delta = 1.0 - 1.0 / nd;

    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
    for (std::size_t i = 0; i <= n; ++i) vals[i] = detail::checked_eval(f, pts[i], res.evaluations);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
        if (vals[worst] - vals[best] <= tol || vals[best] <= floor + tol) {
            res.converged = true;
            break;
        }
        if (res.iterations >= max_iters) break;
        ++res.iterations;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i)
            if (i != worst)
                for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / nd;

        for (std::size_t k = 0; k < n; ++k) xr[k] = centroid[k] + alpha * (centroid[k] - pts[worst][k]);
        const double fr = detail::checked_eval(f, xr, res.evaluations);
        if (fr < vals[best]) {
            for (std::size_t k = 0; k < n; ++k) xe[k] = centroid[k] + beta * (xr[k] - centroid[k]);
            const double fe = detail::checked_eval(f, xe, res.evaluations);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        bool accepted = false;
        if (fr < vals[worst]) {
            for (std::size_t k = 0; k < n; ++k) xc[k] = centroid[k] + gamma * (xr[k] - centroid[k]);
            const double fc = detail::checked_eval(f, xc, res.evaluations);
            if (fc <= fr) {
                pts[worst] = xc;
                vals[worst] = fc;
                accepted = true;
            }
        } else {
            for (std::size_t k = 0; k < n; ++k) xc[k] = centroid[k] - gamma * (centroid[k] - pts[worst][k]);
            const double fc = detail::checked_eval(f, xc, res.evaluations);
            if (fc < vals[worst]) {
                pts[worst] = xc;
                vals[worst] = fc;
                accepted = true;
            }
        }
        if (!accepted) {
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == best) continue;
                for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + delta * (pts[i][k] - pts[best][k]);
                vals[i] = detail::checked_eval(f, pts[i], res.evaluations);
            }
        }
    }
    const std::size_t best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    res.x = pts[best];
    res.value = vals[best];
    return res;
}

// One restart: Nelder-Mead from x0, re-initialized around the incumbent until a pass
// improves by no more than tol or the iteration budget is spent.
inline SimplexResult polish(const Objective& f, std::vector<double> x0, const OptimizerConfig& cfg,
                            double floor = -std::numeric_limits<double>::infinity()) {
    SimplexResult total;
    double step = cfg.step_init;
    std::size_t budget = cfg.max_iters;
    SimplexResult cur = nelder_mead(f, std::move(x0), step, budget, cfg.tol, floor);
    total = cur;
    budget -= std::min(budget, cur.iterations);
    while (budget > 0 && total.value > floor + cfg.tol) {
        step = std::max(step * 0.5, 1e-3);
        auto next = nelder_mead(f, total.x, step, budget, cfg.tol, floor);
        total.evaluations += next.evaluations;
        total.iterations += next.iterations;
        budget -= std::min(budget, next.iterations);
        const bool improved = next.value < total.value - cfg.tol;
        if (next.value < total.value) {
            total.x = std::move(next.x);
            total.value = next.value;
        }
        total.converged = next.converged;
        if (!improved) break;
    }
    return total;
}

// Runs one local search per fixed start, then cfg.restarts searches from standard-normal
// points drawn from the stream (cfg.seed, restart index). Merged by minimum. Once a restart
// comes within tol of `floor`, a known lower bound of f, the remaining restarts are skipped.
inline OptimizationOutcome multi_restart_minimize(const Objective& f, std::size_t dim, const OptimizerConfig& cfg,
                                                  const std::vector<std::vector<double>>& fixed_starts = {},
                                                  double floor = -std::numeric_limits<double>::infinity()) {
    cfg.validate();
    OptimizationOutcome out;
    const std::size_t total = fixed_starts.size() + cfg.restarts;
    bool all_converged = true;
    for (std::size_t r = 0; r < total; ++r) {
        std::vector<double> x0;
        if (r < fixed_starts.size()) {
            x0 = fixed_starts[r];
            if (x0.size() != dim) throw usage_error("fixed start has wrong dimension");
        } else {
            auto rng = make_rng(cfg.seed, r - fixed_starts.size());
            x0.resize(dim);
            for (auto& v : x0) v = standard_normal(rng);
        }
        auto res = polish(f, std::move(x0), cfg, floor);
        out.evaluations += res.evaluations;
        out.restart_values.push_back(res.value);
        all_converged = all_converged && res.converged;
        if (res.value < out.best_value) {
            out.best_value = res.value;
            out.best_params = std::move(res.x);
            out.best_restart = r;
        }
        ++out.restarts_run;
        if (out.best_value <= floor + cfg.tol) break;
    }
    out.converged = all_converged;
    return out;
}

}  // namespace skb
