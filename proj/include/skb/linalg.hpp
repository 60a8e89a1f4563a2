// Dense complex matrix kernel: products, tensor products, partial traces,
// Hermitian spectral decomposition and the trace distance.
//
// Basis convention for composite systems: lexicographic, first label most
// significant.  Every other header relies on it.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skb/error.hpp"

namespace skb {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;

inline constexpr double kHermitianTol = 1e-10;

class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_) throw usage_error("matrix entry count does not match rows*cols");
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static ComplexMatrix diagonal(std::span<const double> d) {
        ComplexMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }
    // |v><v|
    static ComplexMatrix projector(std::span<const cplx> v) {
        ComplexMatrix m(v.size(), v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
        return m;
    }
    static ComplexMatrix column_vector(std::span<const cplx> v) {
        return ComplexMatrix(v.size(), 1, std::vector<cplx>(v.begin(), v.end()));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<cplx> entries() { return data_; }
    std::span<const cplx> entries() const { return data_; }

    ComplexMatrix adjoint() const {
        ComplexMatrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    ComplexVector column(std::size_t j) const {
        ComplexVector c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    cplx trace() const {
        cplx t = 0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    double max_abs() const {
        double m = 0;
        for (const auto& z : data_) m = std::max(m, std::abs(z));
        return m;
    }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(),
                           [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    ComplexMatrix& operator*=(cplx s) {
        for (auto& z : data_) z *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) throw usage_error("matrix product: inner dimensions differ");
        ComplexMatrix r(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx{}) continue;
                const cplx* brow = &b.data_[k * b.cols_];
                cplx* rrow = &r.data_[i * r.cols_];
                for (std::size_t j = 0; j < b.cols_; ++j) rrow[j] += aik * brow[j];
            }
        return r;
    }

    friend ComplexVector operator*(const ComplexMatrix& a, std::span<const cplx> v) {
        if (a.cols_ != v.size()) throw usage_error("matrix-vector product: dimension mismatch");
        ComplexVector r(a.rows_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j) r[i] += a(i, j) * v[j];
        return r;
    }

private:
    void check_same_shape(const ComplexMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw usage_error("matrix shapes differ");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

inline double max_entry_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw usage_error("max_entry_diff: shapes differ");
    double m = 0;
    for (std::size_t k = 0; k < a.entries().size(); ++k) m = std::max(m, std::abs(a.entries()[k] - b.entries()[k]));
    return m;
}

inline double hermiticity_defect(const ComplexMatrix& m) {
    if (!m.square()) return INFINITY;
    double d = 0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j) d = std::max(d, std::abs(m(i, j) - std::conj(m(j, i))));
    return d;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx{}) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l) r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return r;
}

inline ComplexVector kron(std::span<const cplx> a, std::span<const cplx> b) {
    ComplexVector r(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k) r[i * b.size() + k] = a[i] * b[k];
    return r;
}

// Ordered subsystem labels with their dimensions.
class SubsystemLayout {
public:
    SubsystemLayout() = default;
    SubsystemLayout(std::vector<std::string> labels, std::vector<std::size_t> dims)
        : labels_(std::move(labels)), dims_(std::move(dims)) {
        if (labels_.size() != dims_.size()) throw usage_error("layout: labels and dims differ in length");
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (dims_[i] < 1) throw usage_error("layout: dimension of '" + labels_[i] + "' must be >= 1");
            if (labels_[i].empty()) throw usage_error("layout: empty label");
            for (std::size_t j = 0; j < i; ++j)
                if (labels_[j] == labels_[i]) throw usage_error("layout: duplicate label '" + labels_[i] + "'");
        }
    }

    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t size() const { return labels_.size(); }

    std::size_t total_dim() const {
        return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
    }

    bool contains(const std::string& label) const {
        return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
    }

    std::size_t index_of(const std::string& label) const {
        auto it = std::find(labels_.begin(), labels_.end(), label);
        if (it == labels_.end()) throw usage_error("unknown subsystem label '" + label + "'");
        return static_cast<std::size_t>(it - labels_.begin());
    }

    std::size_t dim_of(const std::string& label) const { return dims_[index_of(label)]; }

    std::size_t dim_of(std::span<const std::string> labels) const {
        std::size_t d = 1;
        for (const auto& l : labels) d *= dim_of(l);
        return d;
    }

    // Sub-layout with the given labels, kept in layout order.
    SubsystemLayout restricted(std::span<const std::string> keep) const {
        std::vector<bool> flag(size(), false);
        for (const auto& l : keep) flag[index_of(l)] = true;
        std::vector<std::string> labels;
        std::vector<std::size_t> dims;
        for (std::size_t i = 0; i < size(); ++i)
            if (flag[i]) {
                labels.push_back(labels_[i]);
                dims.push_back(dims_[i]);
            }
        return {std::move(labels), std::move(dims)};
    }

    std::vector<std::size_t> strides() const {
        std::vector<std::size_t> s(size(), 1);
        for (std::size_t i = size(); i-- > 1;) s[i - 1] = s[i] * dims_[i];
        return s;
    }

    friend bool operator==(const SubsystemLayout&, const SubsystemLayout&) = default;

private:
    std::vector<std::string> labels_;
    std::vector<std::size_t> dims_;
};

namespace detail {

inline void check_layout(const ComplexMatrix& m, const SubsystemLayout& layout) {
    if (!m.square() || m.rows() != layout.total_dim())
        throw usage_error("matrix dimension " + std::to_string(m.rows()) + " does not match layout dimension " +
                          std::to_string(layout.total_dim()));
}

// For every full basis index: its index within the kept subsystems and within the rest.
struct SplitIndex {
    std::vector<std::size_t> kept;
    std::vector<std::size_t> rest;
    std::size_t kept_dim = 1;
    std::size_t rest_dim = 1;
};

inline SplitIndex split_index(const SubsystemLayout& layout, const std::vector<bool>& keep) {
    SplitIndex s;
    const auto& dims = layout.dims();
    for (std::size_t i = 0; i < dims.size(); ++i) (keep[i] ? s.kept_dim : s.rest_dim) *= dims[i];
    const std::size_t total = layout.total_dim();
    s.kept.resize(total);
    s.rest.resize(total);
    std::vector<std::size_t> digit(dims.size(), 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t k = 0, r = 0;
        for (std::size_t i = 0; i < dims.size(); ++i) {
            if (keep[i]) k = k * dims[i] + digit[i];
            else r = r * dims[i] + digit[i];
        }
        s.kept[idx] = k;
        s.rest[idx] = r;
        for (std::size_t i = dims.size(); i-- > 0;) {
            if (++digit[i] < dims[i]) break;
            digit[i] = 0;
        }
    }
    return s;
}

}  // namespace detail

// Trace over every subsystem not listed in `keep`; the result is ordered like the layout.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, const SubsystemLayout& layout,
                                   std::span<const std::string> keep) {
    detail::check_layout(m, layout);
    std::vector<bool> flag(layout.size(), false);
    for (const auto& l : keep) flag[layout.index_of(l)] = true;
    const auto s = detail::split_index(layout, flag);
    // full[k * rest_dim + r] = full index of (kept k, rest r)
    std::vector<std::size_t> full(layout.total_dim());
    for (std::size_t idx = 0; idx < full.size(); ++idx) full[s.kept[idx] * s.rest_dim + s.rest[idx]] = idx;
    ComplexMatrix r(s.kept_dim, s.kept_dim);
    for (std::size_t a = 0; a < s.kept_dim; ++a)
        for (std::size_t b = 0; b < s.kept_dim; ++b) {
            cplx acc = 0;
            for (std::size_t t = 0; t < s.rest_dim; ++t) acc += m(full[a * s.rest_dim + t], full[b * s.rest_dim + t]);
            r(a, b) = acc;
        }
    return r;
}

inline ComplexMatrix partial_trace(const ComplexMatrix& m, const SubsystemLayout& layout,
                                   std::initializer_list<std::string> keep) {
    std::vector<std::string> k(keep);
    return partial_trace(m, layout, std::span<const std::string>(k));
}

// Basis permutation taking the layout order to `order` (a permutation of the labels).
inline std::vector<std::size_t> reorder_map(const SubsystemLayout& layout, std::span<const std::string> order) {
    if (order.size() != layout.size()) throw usage_error("reorder: label list must be a permutation of the layout");
    const auto old_strides = layout.strides();
    std::vector<std::size_t> pos(order.size());
    std::vector<std::size_t> new_dims(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        pos[i] = layout.index_of(order[i]);
        new_dims[i] = layout.dims()[pos[i]];
        for (std::size_t j = 0; j < i; ++j)
            if (pos[j] == pos[i]) throw usage_error("reorder: repeated label '" + order[i] + "'");
    }
    // map[new index] = old index
    std::vector<std::size_t> map(layout.total_dim());
    std::vector<std::size_t> digit(order.size(), 0);
    for (std::size_t idx = 0; idx < map.size(); ++idx) {
        std::size_t old = 0;
        for (std::size_t i = 0; i < order.size(); ++i) old += digit[i] * old_strides[pos[i]];
        map[idx] = old;
        for (std::size_t i = order.size(); i-- > 0;) {
            if (++digit[i] < new_dims[i]) break;
            digit[i] = 0;
        }
    }
    return map;
}

inline ComplexMatrix permute_subsystems(const ComplexMatrix& m, const SubsystemLayout& layout,
                                        std::span<const std::string> order) {
    detail::check_layout(m, layout);
    const auto map = reorder_map(layout, order);
    ComplexMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < map.size(); ++i)
        for (std::size_t j = 0; j < map.size(); ++j) r(i, j) = m(map[i], map[j]);
    return r;
}

inline ComplexVector permute_subsystems(std::span<const cplx> v, const SubsystemLayout& layout,
                                        std::span<const std::string> order) {
    if (v.size() != layout.total_dim()) throw usage_error("vector dimension does not match layout");
    const auto map = reorder_map(layout, order);
    ComplexVector r(v.size());
    for (std::size_t i = 0; i < map.size(); ++i) r[i] = v[map[i]];
    return r;
}

struct LocalResult {
    ComplexMatrix matrix;
    SubsystemLayout layout;
};

// Computes (I ⊗ K ⊗ I) m (I ⊗ K ⊗ I)† with K acting on `label`. K may be rectangular
// (rows = output dim); the label is replaced in place by `replacement`, whose dims
// must multiply to K.rows(). An empty replacement keeps the label with the new dim.
inline LocalResult apply_local_operator(const ComplexMatrix& m, const SubsystemLayout& layout, const std::string& label,
                                        const ComplexMatrix& op,
                                        std::vector<std::pair<std::string, std::size_t>> replacement = {}) {
    detail::check_layout(m, layout);
    const std::size_t t = layout.index_of(label);
    const std::size_t d_in = layout.dims()[t];
    if (op.cols() != d_in) throw usage_error("local operator input dimension does not match '" + label + "'");
    const std::size_t d_out = op.rows();
    if (replacement.empty()) replacement.emplace_back(label, d_out);
    std::size_t rep_dim = 1;
    for (const auto& [l, d] : replacement) rep_dim *= d;
    if (rep_dim != d_out) throw usage_error("local operator output dimension does not match replacement labels");

    std::size_t hi = 1, lo = 1;
    for (std::size_t i = 0; i < t; ++i) hi *= layout.dims()[i];
    for (std::size_t i = t + 1; i < layout.size(); ++i) lo *= layout.dims()[i];
    const std::size_t D = hi * d_in * lo;
    const std::size_t Dn = hi * d_out * lo;

    // left multiplication: T[(h,a,l), j] = sum_x K[a,x] m[(h,x,l), j]
    ComplexMatrix left(Dn, D);
    for (std::size_t h = 0; h < hi; ++h)
        for (std::size_t x = 0; x < d_in; ++x)
            for (std::size_t l = 0; l < lo; ++l) {
                const std::size_t src = (h * d_in + x) * lo + l;
                for (std::size_t a = 0; a < d_out; ++a) {
                    const cplx k = op(a, x);
                    if (k == cplx{}) continue;
                    const std::size_t dst = (h * d_out + a) * lo + l;
                    for (std::size_t j = 0; j < D; ++j) left(dst, j) += k * m(src, j);
                }
            }
    // right multiplication: R[i, (h,b,l)] = sum_y T[i, (h,y,l)] conj(K[b,y])
    ComplexMatrix out(Dn, Dn);
    for (std::size_t i = 0; i < Dn; ++i)
        for (std::size_t h = 0; h < hi; ++h)
            for (std::size_t y = 0; y < d_in; ++y)
                for (std::size_t l = 0; l < lo; ++l) {
                    const cplx v = left(i, (h * d_in + y) * lo + l);
                    if (v == cplx{}) continue;
                    for (std::size_t b = 0; b < d_out; ++b) out(i, (h * d_out + b) * lo + l) += v * std::conj(op(b, y));
                }

    std::vector<std::string> labels;
    std::vector<std::size_t> dims;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (i == t) {
            for (const auto& [l, d] : replacement) {
                labels.push_back(l);
                dims.push_back(d);
            }
        } else {
            labels.push_back(layout.labels()[i]);
            dims.push_back(layout.dims()[i]);
        }
    }
    return {std::move(out), SubsystemLayout(std::move(labels), std::move(dims))};
}

// Same as above for a state vector.
inline ComplexVector apply_local_operator(std::span<const cplx> v, const SubsystemLayout& layout,
                                          const std::string& label, const ComplexMatrix& op) {
    if (v.size() != layout.total_dim()) throw usage_error("vector dimension does not match layout");
    const std::size_t t = layout.index_of(label);
    const std::size_t d_in = layout.dims()[t];
    if (op.cols() != d_in) throw usage_error("local operator input dimension does not match '" + label + "'");
    std::size_t hi = 1, lo = 1;
    for (std::size_t i = 0; i < t; ++i) hi *= layout.dims()[i];
    for (std::size_t i = t + 1; i < layout.size(); ++i) lo *= layout.dims()[i];
    ComplexVector r(hi * op.rows() * lo);
    for (std::size_t h = 0; h < hi; ++h)
        for (std::size_t x = 0; x < d_in; ++x)
            for (std::size_t l = 0; l < lo; ++l) {
                const cplx vx = v[(h * d_in + x) * lo + l];
                if (vx == cplx{}) continue;
                for (std::size_t a = 0; a < op.rows(); ++a) r[(h * op.rows() + a) * lo + l] += op(a, x) * vx;
            }
    return r;
}

struct HermitianEigenSystem {
    std::vector<double> eigenvalues;  // descending
    ComplexMatrix eigenvectors;       // columns, matching eigenvalues
};

namespace detail {

// Cyclic Jacobi on a dense Hermitian matrix (modified in place).
inline void jacobi_hermitian(ComplexMatrix& a, ComplexMatrix* v) {
    const std::size_t n = a.rows();
    if (n <= 1) return;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0, diag = 0;
        for (std::size_t p = 0; p < n; ++p) {
            diag += std::norm(a(p, p));
            for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
        }
        if (off == 0.0 || std::sqrt(off) <= 1e-14 * std::sqrt(diag + 2 * off)) return;
        // skip negligible entries during the first sweeps
        const double skip = sweep < 3 ? 1e-3 * std::sqrt(off) / static_cast<double>(n * n) : 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx b = a(p, q);
                const double absb = std::abs(b);
                if (absb == 0.0 || absb < skip) continue;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double zeta = (aqq - app) / (2.0 * absb);
                double t;
                if (std::abs(zeta) > 1e150) t = 0.5 / zeta;
                else t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cplx ph = std::conj(b / absb);  // e^{-i phi}
                const cplx u00 = c, u01 = s, u10 = -s * ph, u11 = c * ph;
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * u00 + akq * u10;
                    a(k, q) = akp * u01 + akq * u11;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = std::conj(u00) * apk + std::conj(u10) * aqk;
                    a(q, k) = std::conj(u01) * apk + std::conj(u11) * aqk;
                }
                a(p, q) = 0;
                a(q, p) = 0;
                a(p, p) = app - t * absb;
                a(q, q) = aqq + t * absb;
                if (v) {
                    auto& vv = *v;
                    for (std::size_t k = 0; k < n; ++k) {
                        const cplx vkp = vv(k, p), vkq = vv(k, q);
                        vv(k, p) = vkp * u00 + vkq * u10;
                        vv(k, q) = vkp * u01 + vkq * u11;
                    }
                }
            }
    }
    throw numeric_error("Jacobi eigensolver did not converge");
}

// Connected components of the sparsity graph; block-diagonal matrices decouple.
inline std::vector<std::vector<std::size_t>> hermitian_blocks(const ComplexMatrix& m) {
    const std::size_t n = m.rows();
    const double cut = 1e-15 * std::max(1.0, m.max_abs());
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(m(i, j)) > cut) {
                const auto ri = find(i), rj = find(j);
                if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
            }
    std::vector<std::vector<std::size_t>> blocks;
    std::vector<std::size_t> slot(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = find(i);
        if (slot[r] == n) {
            slot[r] = blocks.size();
            blocks.emplace_back();
        }
        blocks[slot[r]].push_back(i);
    }
    return blocks;
}

inline HermitianEigenSystem eig_impl(const ComplexMatrix& m, bool want_vectors) {
    if (!m.square()) throw usage_error("hermitian_eig: matrix is not square");
    if (!m.all_finite()) throw numeric_error("hermitian_eig: non-finite entry");
    if (hermiticity_defect(m) > kHermitianTol) throw invariant_error("hermitian_eig: matrix is not Hermitian");
    const std::size_t n = m.rows();
    std::vector<double> values(n);
    ComplexMatrix vecs = want_vectors ? ComplexMatrix(n, n) : ComplexMatrix();
    for (const auto& block : hermitian_blocks(m)) {
        const std::size_t k = block.size();
        ComplexMatrix sub(k, k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                sub(i, j) = 0.5 * (m(block[i], block[j]) + std::conj(m(block[j], block[i])));
        ComplexMatrix v = want_vectors ? ComplexMatrix::identity(k) : ComplexMatrix();
        jacobi_hermitian(sub, want_vectors ? &v : nullptr);
        for (std::size_t i = 0; i < k; ++i) {
            values[block[i]] = sub(i, i).real();
            if (want_vectors)
                for (std::size_t r = 0; r < k; ++r) vecs(block[r], block[i]) = v(r, i);
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });
    HermitianEigenSystem out;
    out.eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.eigenvalues[i] = values[order[i]];
    if (want_vectors) {
        out.eigenvectors = ComplexMatrix(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, i) = vecs(r, order[i]);
    }
    return out;
}

}  // namespace detail

// Spectral decomposition of a Hermitian matrix, eigenvalues in descending order.
inline HermitianEigenSystem hermitian_eig(const ComplexMatrix& m) { return detail::eig_impl(m, true); }

// Eigenvalues only (cheaper; used by every entropy evaluation).
inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m) {
    return detail::eig_impl(m, false).eigenvalues;
}

// f(M) = V f(Λ) V† for Hermitian M.
template <class F>
ComplexMatrix hermitian_function(const ComplexMatrix& m, F&& f) {
    const auto es = hermitian_eig(m);
    const std::size_t n = m.rows();
    ComplexMatrix r(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double fk = f(es.eigenvalues[k]);
        if (fk == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx vik = es.eigenvectors(i, k) * fk;
            for (std::size_t j = 0; j < n; ++j) r(i, j) += vik * std::conj(es.eigenvectors(j, k));
        }
    }
    return r;
}

// ½ Tr|ρ − σ|
inline double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
        throw usage_error("trace_distance: dimension mismatch");
    double s = 0;
    for (double l : hermitian_eigenvalues(rho - sigma)) s += std::abs(l);
    return 0.5 * s;
}

// Modified Gram-Schmidt (two passes) on the columns of m. A column that collapses is
// replaced by the first standard basis vector that survives orthogonalization.
inline ComplexMatrix orthonormalize_columns(const ComplexMatrix& m) {
    const std::size_t n = m.rows(), k = m.cols();
    if (k > n) throw usage_error("orthonormalize_columns: more columns than rows");
    ComplexMatrix q = m;
    std::size_t fallback = 0;
    for (std::size_t j = 0; j < k; ++j) {
        for (int attempt = 0;; ++attempt) {
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t p = 0; p < j; ++p) {
                    cplx dot = 0;
                    for (std::size_t i = 0; i < n; ++i) dot += std::conj(q(i, p)) * q(i, j);
                    for (std::size_t i = 0; i < n; ++i) q(i, j) -= dot * q(i, p);
                }
            double norm = 0;
            for (std::size_t i = 0; i < n; ++i) norm += std::norm(q(i, j));
            norm = std::sqrt(norm);
            if (norm > 1e-10) {
                for (std::size_t i = 0; i < n; ++i) q(i, j) /= norm;
                break;
            }
            if (fallback >= n) throw numeric_error("orthonormalize_columns: rank deficiency");
            for (std::size_t i = 0; i < n; ++i) q(i, j) = i == fallback ? 1.0 : 0.0;
            ++fallback;
        }
    }
    return q;
}

}  // namespace skb
