#pragma once

// Row-compressed symmetric sparse matrices plus the linear solver used by the
// discrete operators: sparse Cholesky (Eigen) below 2e5 unknowns, diagonally
// preconditioned conjugate gradients above.  Every solve verifies the
// postcondition |Ax-b| <= 1e-10 |b| and throws SolverBreakdown otherwise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "helvort/errors.hpp"

namespace helvort {

struct Csr {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    static Csr from_triplets(int n, std::vector<std::array<int, 2>>& idx,
                             std::vector<double>& v) {
        // sort by (row, col), merge duplicates
        std::vector<std::size_t> order(idx.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&idx](std::size_t a, std::size_t b) {
            return idx[a][0] != idx[b][0] ? idx[a][0] < idx[b][0] : idx[a][1] < idx[b][1];
        });
        Csr m;
        m.n = n;
        m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
        int prev_r = -1, prev_c = -1;
        for (std::size_t oi : order) {
            const int r = idx[oi][0], c = idx[oi][1];
            if (r == prev_r && c == prev_c) {
                m.val.back() += v[oi];
            } else {
                m.col.push_back(c);
                m.val.push_back(v[oi]);
                m.row_ptr[static_cast<std::size_t>(r) + 1]++;
                prev_r = r;
                prev_c = c;
            }
        }
        for (int r = 0; r < n; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
        return m;
    }

    void multiply(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(static_cast<std::size_t>(n), 0.0);
        for (int r = 0; r < n; ++r) {
            double s = 0.0;
            for (int j = row_ptr[r]; j < row_ptr[r + 1]; ++j)
                s += val[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(col[j])];
            y[static_cast<std::size_t>(r)] = s;
        }
    }

    std::vector<double> multiply(const std::vector<double>& x) const {
        std::vector<double> y;
        multiply(x, y);
        return y;
    }

    /// Value-array offset of entry (r, c); -1 if not present in the pattern.
    int offset(int r, int c) const {
        int lo = row_ptr[r], hi = row_ptr[r + 1];
        while (lo < hi) {
            const int mid = (lo + hi) / 2;
            if (col[mid] < c) lo = mid + 1;
            else hi = mid;
        }
        return (lo < row_ptr[r + 1] && col[lo] == c) ? lo : -1;
    }

    double max_asymmetry() const {
        // |A - A^T|_max, using a dense-free two-pass lookup
        double worst = 0.0;
        for (int r = 0; r < n; ++r) {
            for (int j = row_ptr[r]; j < row_ptr[r + 1]; ++j) {
                const int c = col[j];
                if (c < r) continue;
                double transposed = 0.0;
                for (int jj = row_ptr[c]; jj < row_ptr[c + 1]; ++jj)
                    if (col[jj] == r) { transposed = val[static_cast<std::size_t>(jj)]; break; }
                worst = std::max(worst, std::abs(val[static_cast<std::size_t>(j)] - transposed));
            }
        }
        return worst;
    }

    Eigen::SparseMatrix<double> to_eigen() const {
        Eigen::SparseMatrix<double> A(n, n);
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(val.size());
        for (int r = 0; r < n; ++r)
            for (int j = row_ptr[r]; j < row_ptr[r + 1]; ++j)
                trips.emplace_back(r, col[j], val[static_cast<std::size_t>(j)]);
        A.setFromTriplets(trips.begin(), trips.end());
        return A;
    }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

/// Reusable SPD solver; factorizes once, solves many right-hand sides.
class SpdSolver {
public:
    static constexpr int kCholeskyLimit = 200000;

    explicit SpdSolver(const Csr& A) : A_(&A) {
        if (A.n < kCholeskyLimit) {
            llt_ = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
            eigenA_ = A.to_eigen();
            llt_->compute(eigenA_);
            if (llt_->info() != Eigen::Success) {
                llt_.reset();  // not SPD as given; CG will report properly
            }
        }
        diag_.assign(static_cast<std::size_t>(A.n), 1.0);
        for (int r = 0; r < A.n; ++r)
            for (int j = A.row_ptr[r]; j < A.row_ptr[r + 1]; ++j)
                if (A.col[j] == r && A.val[static_cast<std::size_t>(j)] > 0)
                    diag_[static_cast<std::size_t>(r)] = A.val[static_cast<std::size_t>(j)];
    }

    std::vector<double> solve(const std::vector<double>& b) const {
        const double bnorm = norm2(b);
        if (bnorm == 0.0) return std::vector<double>(b.size(), 0.0);
        std::vector<double> x;
        if (llt_) {
            Eigen::Map<const Eigen::VectorXd> bb(b.data(), static_cast<Eigen::Index>(b.size()));
            Eigen::VectorXd xx = llt_->solve(bb);
            // one step of iterative refinement tightens the residual
            Eigen::VectorXd r = bb - eigenA_ * xx;
            xx += llt_->solve(r).eval();
            x.assign(xx.data(), xx.data() + xx.size());
        } else {
            x = pcg(b, bnorm);
        }
        std::vector<double> Ax = A_->multiply(x);
        double rn = 0.0;
        for (std::size_t i = 0; i < Ax.size(); ++i) {
            const double d = Ax[i] - b[i];
            rn += d * d;
        }
        rn = std::sqrt(rn);
        if (!(rn <= 1e-10 * bnorm)) {
            std::ostringstream msg;
            msg << "linear solve residual " << rn << " vs |b| " << bnorm;
            if (!trace_.empty()) {
                msg << "; cg trace:";
                for (double t : trace_) msg << " " << t;
            }
            throw SolverBreakdown(msg.str());
        }
        return x;
    }

private:
    const Csr* A_;
    Eigen::SparseMatrix<double> eigenA_;
    std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
    std::vector<double> diag_;
    mutable std::vector<double> trace_;

    std::vector<double> pcg(const std::vector<double>& b, double bnorm) const {
        const std::size_t n = b.size();
        std::vector<double> x(n, 0.0), r = b, z(n), p(n), Ap(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag_[i];
        p = z;
        double rz = dot(r, z);
        const double tol = std::max(1e-12, 1e-12 * bnorm);
        trace_.clear();
        const int max_iter = 20 * static_cast<int>(n) + 200;
        for (int it = 0; it < max_iter; ++it) {
            A_->multiply(p, Ap);
            const double pAp = dot(p, Ap);
            if (!(pAp > 0)) {
                trace_.push_back(norm2(r));
                throw SolverBreakdown("conjugate gradients hit a non-SPD direction");
            }
            const double alpha = rz / pAp;
            for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
            for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
            const double rn = norm2(r);
            if (it % 50 == 0) trace_.push_back(rn);
            if (rn <= tol) break;
            for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag_[i];
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        return x;
    }
};

/// Direct solver for symmetric *indefinite* systems (second variations at
/// mountain-pass points carry negative directions).  The residual guard is
/// loose: Newton directions only need enough accuracy for a line search.
class LuSolver {
public:
    explicit LuSolver(const Csr& A, double rtol = 1e-8)
        : A_(&A), rtol_(rtol), eigenA_(A.to_eigen()) {
        lu_.compute(eigenA_);
        if (lu_.info() != Eigen::Success)
            throw SolverBreakdown("sparse LU factorization failed");
    }

    std::vector<double> solve(const std::vector<double>& b) const {
        const double bnorm = norm2(b);
        if (bnorm == 0.0) return std::vector<double>(b.size(), 0.0);
        Eigen::Map<const Eigen::VectorXd> bb(b.data(), static_cast<Eigen::Index>(b.size()));
        Eigen::VectorXd xx = lu_.solve(bb);
        Eigen::VectorXd r = bb - eigenA_ * xx;
        xx += lu_.solve(r).eval();
        std::vector<double> x(xx.data(), xx.data() + xx.size());
        const std::vector<double> Ax = A_->multiply(x);
        double rn = 0.0;
        for (std::size_t i = 0; i < Ax.size(); ++i) {
            const double d = Ax[i] - b[i];
            rn += d * d;
        }
        if (!(std::sqrt(rn) <= rtol_ * bnorm))
            throw SolverBreakdown("LU solve residual above tolerance");
        return x;
    }

private:
    const Csr* A_;
    double rtol_;
    Eigen::SparseMatrix<double> eigenA_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

}  // namespace helvort
