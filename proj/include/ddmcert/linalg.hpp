#pragma once

// Sparse SPD and dense symmetric-indefinite kernels.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ddmcert/core.hpp"

namespace ddmcert {

struct Triplet {
    Index row;
    Index col;
    double value;
};

/// Compressed sparse row matrix. Symmetric operators keep the full pattern
/// (both triangles) so products need no transpose pass.
class CsrMatrix {
public:
    CsrMatrix() = default;

    /// Duplicates are summed in insertion order, so mirrored contributions
    /// inserted in the same order produce bitwise symmetric entries.
    static CsrMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets) {
        std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        CsrMatrix m;
        m.rows_ = rows;
        m.cols_ = cols;
        m.row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
        for (std::size_t i = 0; i < triplets.size();) {
            const Triplet& t = triplets[i];
            if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
                throw std::out_of_range("CsrMatrix::from_triplets: index out of range");
            double sum = 0.0;
            std::size_t j = i;
            for (; j < triplets.size() && triplets[j].row == t.row && triplets[j].col == t.col; ++j)
                sum += triplets[j].value;
            m.col_idx_.push_back(t.col);
            m.values_.push_back(sum);
            ++m.row_ptr_[static_cast<std::size_t>(t.row) + 1];
            i = j;
        }
        std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
        return m;
    }

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    std::size_t nonzeros() const { return values_.size(); }

    std::span<const Index> row_cols(Index r) const {
        return {col_idx_.data() + row_ptr_[r], static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
    }
    std::span<const double> row_values(Index r) const {
        return {values_.data() + row_ptr_[r], static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
    }

    double at(Index r, Index c) const {
        const auto cs = row_cols(r);
        const auto it = std::lower_bound(cs.begin(), cs.end(), c);
        if (it == cs.end() || *it != c) return 0.0;
        return row_values(r)[static_cast<std::size_t>(it - cs.begin())];
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(static_cast<std::size_t>(std::min(rows_, cols_)), 0.0);
        for (Index r = 0; r < static_cast<Index>(d.size()); ++r) d[r] = at(r, r);
        return d;
    }

    void multiply(std::span<const double> x, std::span<double> y) const {
        for (Index r = 0; r < rows_; ++r) {
            double s = 0.0;
            for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x[col_idx_[k]];
            y[r] = s;
        }
    }
    std::vector<double> operator*(std::span<const double> x) const {
        std::vector<double> y(static_cast<std::size_t>(rows_));
        multiply(x, y);
        return y;
    }

    /// Bitwise structural and numerical symmetry.
    bool is_symmetric() const {
        if (rows_ != cols_) return false;
        for (Index r = 0; r < rows_; ++r) {
            const auto cs = row_cols(r);
            const auto vs = row_values(r);
            for (std::size_t k = 0; k < cs.size(); ++k)
                if (at(cs[k], r) != vs[k]) return false;
        }
        return true;
    }

    /// Submatrix on the given row and column index lists.
    CsrMatrix extract(std::span<const Index> row_set, std::span<const Index> col_set) const {
        std::vector<Index> col_map(static_cast<std::size_t>(cols_), -1);
        for (std::size_t j = 0; j < col_set.size(); ++j) col_map[col_set[j]] = static_cast<Index>(j);
        std::vector<Triplet> trips;
        for (std::size_t i = 0; i < row_set.size(); ++i) {
            const auto cs = row_cols(row_set[i]);
            const auto vs = row_values(row_set[i]);
            for (std::size_t k = 0; k < cs.size(); ++k)
                if (const Index c = col_map[cs[k]]; c >= 0) trips.push_back({static_cast<Index>(i), c, vs[k]});
        }
        return from_triplets(static_cast<Index>(row_set.size()), static_cast<Index>(col_set.size()), std::move(trips));
    }

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Index> row_ptr_{0};
    std::vector<Index> col_idx_;
    std::vector<double> values_;
};

using SparseSymmetric = CsrMatrix;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct SpdSolveOptions {
    double tolerance = 1e-12;
    Index max_iterations = -1;  ///< -1 means 10 * dimension
};

struct SpdSolveResult {
    std::vector<double> x;
    Index iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients. Accepts a return only when the
/// true residual ||b - Ax|| / ||b|| is below tolerance.
inline SpdSolveResult spd_solve(const CsrMatrix& a, std::span<const double> b, SpdSolveOptions opt = {},
                                std::span<const double> x0 = {}) {
    const Index n = a.rows();
    if (a.cols() != n || static_cast<Index>(b.size()) != n)
        throw std::invalid_argument("spd_solve: dimension mismatch");
    const Index cap = opt.max_iterations < 0 ? std::max<Index>(10 * n, 10) : opt.max_iterations;

    SpdSolveResult res;
    res.x.assign(static_cast<std::size_t>(n), 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), res.x.begin());
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(res.x.begin(), res.x.end(), 0.0);
        return res;
    }

    std::vector<double> inv_diag = a.diagonal();
    for (double& d : inv_diag) {
        if (!(d > 0.0)) throw SolverError("spd_solve: non-positive diagonal entry");
        d = 1.0 / d;
    }

    std::vector<double> r(n), z(n), p(n), q(n);
    auto true_residual = [&] {
        a.multiply(res.x, q);
        for (Index i = 0; i < n; ++i) r[i] = b[i] - q[i];
        return norm2(r) / bnorm;
    };

    double rel = true_residual();
    Index it = 0;
    while (rel > opt.tolerance && it < cap) {
        for (Index i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        p = z;
        double rz = dot(r, z);
        while (it < cap) {
            a.multiply(p, q);
            const double pq = dot(p, q);
            if (!(pq > 0.0)) throw SolverError("spd_solve: matrix is not positive definite", rel);
            const double alpha = rz / pq;
            for (Index i = 0; i < n; ++i) {
                res.x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            ++it;
            rel = norm2(r) / bnorm;
            if (rel <= opt.tolerance) break;
            for (Index i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (Index i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        // recurrence residual drifts; restart from the true one
        rel = true_residual();
        if (rel > opt.tolerance && it >= cap) break;
    }
    res.iterations = it;
    res.relative_residual = rel;
    if (rel > opt.tolerance)
        throw SolverError("spd_solve: iteration cap " + std::to_string(cap) + " reached, relative residual " +
                              std::to_string(rel),
                          rel);
    return res;
}

/// Row-major dense matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(Index rows, Index cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {}

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    double& operator()(Index r, Index c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
    double operator()(Index r, Index c) const { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
    std::span<double> row(Index r) { return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)}; }
    std::span<const double> row(Index r) const { return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)}; }

    std::vector<double> operator*(std::span<const double> x) const {
        std::vector<double> y(static_cast<std::size_t>(rows_), 0.0);
        for (Index r = 0; r < rows_; ++r) y[r] = dot(row(r), x);
        return y;
    }

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<double> data_;
};

/// Bunch–Kaufman LDL^T factorization P A P^T = L D L^T of a dense symmetric
/// (possibly indefinite) matrix, with 1x1 and 2x2 pivot blocks.
class SymmetricIndefiniteFactor {
public:
    /// Throws SolverError when a pivot falls below
    /// `pivot_threshold * max|diag(A)|` (numerically singular input).
    explicit SymmetricIndefiniteFactor(DenseMatrix a, double pivot_threshold = 1e-12) : w_(std::move(a)) {
        const Index n = w_.rows();
        if (w_.cols() != n) throw std::invalid_argument("SymmetricIndefiniteFactor: matrix not square");
        perm_.resize(static_cast<std::size_t>(n));
        std::iota(perm_.begin(), perm_.end(), Index{0});
        block_.assign(static_cast<std::size_t>(n), 1);

        double scale = 0.0;
        for (Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(w_(i, i)));
        if (scale == 0.0)
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < n; ++j) scale = std::max(scale, std::abs(w_(i, j)));
        const double tiny = pivot_threshold * scale;
        const double alpha = (1.0 + std::sqrt(17.0)) / 8.0;

        Index k = 0;
        while (k < n) {
            const double absakk = std::abs(w_(k, k));
            Index imax = k;
            double colmax = 0.0;
            for (Index i = k + 1; i < n; ++i)
                if (std::abs(w_(i, k)) > colmax) {
                    colmax = std::abs(w_(i, k));
                    imax = i;
                }
            if (std::max(absakk, colmax) <= tiny)
                throw SolverError("SymmetricIndefiniteFactor: singular pivot at position " + std::to_string(k));

            Index kp = k;
            int size = 1;
            if (absakk < alpha * colmax) {
                double rowmax = 0.0;
                for (Index j = k; j < n; ++j)
                    if (j != imax) rowmax = std::max(rowmax, std::abs(w_(imax, j)));
                if (absakk * rowmax >= alpha * colmax * colmax) {
                    kp = k;
                } else if (std::abs(w_(imax, imax)) >= alpha * rowmax) {
                    kp = imax;
                } else {
                    kp = imax;
                    size = 2;
                }
            }
            const Index target = k + size - 1;
            if (kp != target) swap_symmetric(target, kp);

            if (size == 1) {
                const double d = w_(k, k);
                if (std::abs(d) <= tiny)
                    throw SolverError("SymmetricIndefiniteFactor: singular pivot at position " + std::to_string(k));
                for (Index i = k + 1; i < n; ++i) {
                    const double l = w_(i, k) / d;
                    for (Index j = k + 1; j < n; ++j) w_(i, j) -= l * w_(j, k);
                }
                for (Index i = k + 1; i < n; ++i) w_(i, k) /= d;
            } else {
                const double d11 = w_(k, k), d21 = w_(k + 1, k), d22 = w_(k + 1, k + 1);
                const double det = d11 * d22 - d21 * d21;
                if (std::abs(det) <= tiny * tiny)
                    throw SolverError("SymmetricIndefiniteFactor: singular 2x2 pivot at position " + std::to_string(k));
                block_[k] = 2;
                block_[k + 1] = 0;
                std::vector<double> l1(static_cast<std::size_t>(n)), l2(static_cast<std::size_t>(n));
                for (Index i = k + 2; i < n; ++i) {
                    const double a1 = w_(i, k), a2 = w_(i, k + 1);
                    l1[i] = (a1 * d22 - a2 * d21) / det;
                    l2[i] = (a2 * d11 - a1 * d21) / det;
                }
                for (Index i = k + 2; i < n; ++i)
                    for (Index j = k + 2; j < n; ++j) w_(i, j) -= l1[i] * w_(j, k) + l2[i] * w_(j, k + 1);
                for (Index i = k + 2; i < n; ++i) {
                    w_(i, k) = l1[i];
                    w_(i, k + 1) = l2[i];
                }
            }
            k += size;
        }
    }

    Index size() const { return w_.rows(); }
    Index two_by_two_blocks() const { return std::count(block_.begin(), block_.end(), 2); }

    std::vector<double> solve(std::span<const double> b) const {
        const Index n = size();
        std::vector<double> y(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) y[i] = b[perm_[i]];
        // L y = Pb
        for (Index k = 0; k < n;) {
            if (block_[k] == 1) {
                for (Index i = k + 1; i < n; ++i) y[i] -= w_(i, k) * y[k];
                k += 1;
            } else {
                for (Index i = k + 2; i < n; ++i) y[i] -= w_(i, k) * y[k] + w_(i, k + 1) * y[k + 1];
                k += 2;
            }
        }
        for (Index k = 0; k < n;) {
            if (block_[k] == 1) {
                y[k] /= w_(k, k);
                k += 1;
            } else {
                const double d11 = w_(k, k), d21 = w_(k + 1, k), d22 = w_(k + 1, k + 1);
                const double det = d11 * d22 - d21 * d21;
                const double y1 = y[k], y2 = y[k + 1];
                y[k] = (d22 * y1 - d21 * y2) / det;
                y[k + 1] = (d11 * y2 - d21 * y1) / det;
                k += 2;
            }
        }
        // L^T
        for (Index k = n - 1; k >= 0;) {
            if (block_[k] == 0) {  // second row of a 2x2 block
                const Index s = k - 1;
                for (Index i = s + 2; i < n; ++i) {
                    y[s] -= w_(i, s) * y[i];
                    y[s + 1] -= w_(i, s + 1) * y[i];
                }
                k -= 2;
            } else {
                for (Index i = k + 1; i < n; ++i) y[k] -= w_(i, k) * y[i];
                k -= 1;
            }
        }
        std::vector<double> x(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) x[perm_[i]] = y[i];
        return x;
    }

private:
    void swap_symmetric(Index a, Index b) {
        const Index n = w_.rows();
        for (Index j = 0; j < n; ++j) std::swap(w_(a, j), w_(b, j));
        for (Index i = 0; i < n; ++i) std::swap(w_(i, a), w_(i, b));
        std::swap(perm_[a], perm_[b]);
    }

    DenseMatrix w_;
    std::vector<Index> perm_;
    std::vector<int> block_;  // 1: 1x1 pivot, 2: first row of 2x2, 0: second row of 2x2
};

/// Equality-constrained quadratic program in KKT form
///   [ H  B^T ] [x]   [g]
///   [ B   0  ] [l] = [d]
/// i.e. minimize 1/2 x^T H x - g^T x subject to B x = d.
struct SaddleSystem {
    CsrMatrix h;   ///< SPD block
    CsrMatrix b;   ///< constraints x unknowns
    std::vector<double> g;
    std::vector<double> d;
};

struct SaddleSolution {
    std::vector<double> x;
    std::vector<double> lambda;
    double kkt_residual = 0.0;         ///< relative residual of the first block row
    double constraint_residual = 0.0;  ///< max |Bx - d| / (1 + max|d|)
    bool used_schur_path = false;
};

class RankDeficientConstraints : public SolverError {
public:
    RankDeficientConstraints(std::vector<Index> rows)
        : SolverError(describe(rows)), rows_(std::move(rows)) {}
    const std::vector<Index>& offending_rows() const { return rows_; }

private:
    static std::string describe(const std::vector<Index>& rows) {
        std::string s = "saddle_solve: linearly dependent constraint rows:";
        for (Index r : rows) s += " " + std::to_string(r);
        return s;
    }
    std::vector<Index> rows_;
};

struct SaddleSolveOptions {
    Index dense_limit = 1500;  ///< KKT dimension up to which the dense factorization is used
    double tolerance = 1e-12;
    double rank_tolerance = 1e-10;
};

namespace detail {

/// Modified Gram–Schmidt with reorthogonalization over the normalized rows;
/// returns rows whose remainder is below `tol`.
inline std::vector<Index> dependent_rows(const CsrMatrix& b, double tol) {
    const Index m = b.rows(), n = b.cols();
    std::vector<std::vector<double>> basis;
    std::vector<Index> bad;
    for (Index r = 0; r < m; ++r) {
        std::vector<double> v(static_cast<std::size_t>(n), 0.0);
        const auto cs = b.row_cols(r);
        const auto vs = b.row_values(r);
        for (std::size_t k = 0; k < cs.size(); ++k) v[cs[k]] = vs[k];
        const double nv = norm2(v);
        if (nv == 0.0) {
            bad.push_back(r);
            continue;
        }
        for (double& x : v) x /= nv;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) {
                const double c = dot(v, q);
                for (Index i = 0; i < n; ++i) v[i] -= c * q[i];
            }
        const double rem = norm2(v);
        if (rem < tol) {
            bad.push_back(r);
            continue;
        }
        for (double& x : v) x /= rem;
        basis.push_back(std::move(v));
    }
    return bad;
}

inline std::vector<double> transpose_row(const CsrMatrix& b, Index r) {
    std::vector<double> v(static_cast<std::size_t>(b.cols()), 0.0);
    const auto cs = b.row_cols(r);
    const auto vs = b.row_values(r);
    for (std::size_t k = 0; k < cs.size(); ++k) v[cs[k]] = vs[k];
    return v;
}

}  // namespace detail

/// Solves the KKT system. Small systems go through a dense Bunch–Kaufman
/// factorization of the full KKT matrix; large ones through the constraint
/// Schur complement S = B H^{-1} B^T with conjugate-gradient solves on H.
inline SaddleSolution saddle_solve(const SaddleSystem& s, SaddleSolveOptions opt = {}) {
    const Index n = s.h.rows();
    const Index m = s.b.rows();
    if (s.h.cols() != n || (m > 0 && s.b.cols() != n) || static_cast<Index>(s.g.size()) != n ||
        static_cast<Index>(s.d.size()) != m)
        throw std::invalid_argument("saddle_solve: inconsistent block dimensions");
    if (m > 0)
        if (auto bad = detail::dependent_rows(s.b, opt.rank_tolerance); !bad.empty())
            throw RankDeficientConstraints(std::move(bad));

    SaddleSolution out;
    out.lambda.assign(static_cast<std::size_t>(m), 0.0);

    if (n + m <= opt.dense_limit) {
        DenseMatrix k(n + m, n + m);
        for (Index r = 0; r < n; ++r) {
            const auto cs = s.h.row_cols(r);
            const auto vs = s.h.row_values(r);
            for (std::size_t j = 0; j < cs.size(); ++j) k(r, cs[j]) = vs[j];
        }
        for (Index r = 0; r < m; ++r) {
            const auto cs = s.b.row_cols(r);
            const auto vs = s.b.row_values(r);
            for (std::size_t j = 0; j < cs.size(); ++j) {
                k(n + r, cs[j]) = vs[j];
                k(cs[j], n + r) = vs[j];
            }
        }
        std::vector<double> rhs(s.g);
        rhs.insert(rhs.end(), s.d.begin(), s.d.end());
        const SymmetricIndefiniteFactor f(k);
        std::vector<double> sol = f.solve(rhs);
        for (int refine = 0; refine < 2; ++refine) {
            std::vector<double> res = k * sol;
            for (Index i = 0; i < n + m; ++i) res[i] = rhs[i] - res[i];
            const std::vector<double> corr = f.solve(res);
            for (Index i = 0; i < n + m; ++i) sol[i] += corr[i];
        }
        out.x.assign(sol.begin(), sol.begin() + n);
        out.lambda.assign(sol.begin() + n, sol.end());
    } else {
        out.used_schur_path = true;
        const SpdSolveOptions cg{opt.tolerance, -1};
        std::vector<double> x0 = spd_solve(s.h, s.g, cg).x;
        std::vector<std::vector<double>> z(static_cast<std::size_t>(m));
        for (Index r = 0; r < m; ++r) z[r] = spd_solve(s.h, detail::transpose_row(s.b, r), cg).x;
        if (m > 0) {
            DenseMatrix schur(m, m);
            std::vector<double> bz(static_cast<std::size_t>(m));
            std::vector<std::vector<double>> bzs(static_cast<std::size_t>(m));
            for (Index c = 0; c < m; ++c) bzs[c] = s.b * z[c];
            for (Index r = 0; r < m; ++r)
                for (Index c = 0; c < m; ++c) schur(r, c) = 0.5 * (bzs[c][r] + bzs[r][c]);
            const std::vector<double> bx0 = s.b * x0;
            std::vector<double> rhs(static_cast<std::size_t>(m));
            for (Index r = 0; r < m; ++r) rhs[r] = bx0[r] - s.d[r];
            out.lambda = SymmetricIndefiniteFactor(schur).solve(rhs);
            for (Index r = 0; r < m; ++r)
                for (Index i = 0; i < n; ++i) x0[i] -= out.lambda[r] * z[r][i];
        }
        out.x = std::move(x0);
    }

    // residual report
    std::vector<double> hx = s.h * std::span<const double>(out.x);
    for (Index r = 0; r < m; ++r) {
        const auto cs = s.b.row_cols(r);
        const auto vs = s.b.row_values(r);
        for (std::size_t j = 0; j < cs.size(); ++j) hx[cs[j]] += vs[j] * out.lambda[r];
    }
    double num = 0.0, den = norm2(s.g);
    for (Index i = 0; i < n; ++i) num += (hx[i] - s.g[i]) * (hx[i] - s.g[i]);
    out.kkt_residual = std::sqrt(num) / (den > 0.0 ? den : 1.0);
    if (m > 0) {
        const std::vector<double> bx = s.b * std::span<const double>(out.x);
        double dmax = 0.0, rmax = 0.0;
        for (Index r = 0; r < m; ++r) {
            dmax = std::max(dmax, std::abs(s.d[r]));
            rmax = std::max(rmax, std::abs(bx[r] - s.d[r]));
        }
        out.constraint_residual = rmax / (1.0 + dmax);
    }
    return out;
}

}  // namespace ddmcert
