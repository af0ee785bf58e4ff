#pragma once

#include <cmath>
#include <vector>

#include "mg1fp/matrix.hpp"

namespace mg1fp {

/// LU factorization with partial pivoting. Factored once, solved many times
/// against matrix or vector right-hand sides.
class LuFactor {
public:
    /// Pivots below this magnitude are treated as exact zeros.
    static constexpr double pivot_floor = 1e-300;

    explicit LuFactor(const Mat& a) : lu_(a), piv_(a.rows()) {
        if (!a.square()) throw DimensionMismatch("lu_factor: matrix must be square");
        const int n = lu_.rows();
        for (int k = 0; k < n; ++k) {
            int p = k;
            double best = std::abs(lu_(k, k));
            for (int i = k + 1; i < n; ++i) {
                const double v = std::abs(lu_(i, k));
                if (v > best) { best = v; p = i; }
            }
            piv_[k] = p;
            if (best < pivot_floor) throw SingularMatrix("lu_factor: zero pivot at column " + std::to_string(k));
            if (p != k)
                for (int j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
            const double inv = 1.0 / lu_(k, k);
            for (int i = k + 1; i < n; ++i) {
                const double lik = lu_(i, k) * inv;
                lu_(i, k) = lik;
                const double* rk = lu_.row(k);
                double* ri = lu_.row(i);
                for (int j = k + 1; j < n; ++j) ri[j] -= lik * rk[j];
            }
        }
    }

    int dim() const { return lu_.rows(); }

    /// Solve A*Z = B for a matrix right-hand side.
    Mat solve(const Mat& b) const {
        if (b.rows() != dim()) throw DimensionMismatch("lu_solve: right-hand side row count mismatch");
        Mat z = b;
        const int n = dim(), m = b.cols();
        for (int k = 0; k < n; ++k)
            if (piv_[k] != k)
                for (int j = 0; j < m; ++j) std::swap(z(k, j), z(piv_[k], j));
        for (int i = 1; i < n; ++i) {
            double* zi = z.row(i);
            for (int k = 0; k < i; ++k) {
                const double lik = lu_(i, k);
                const double* zk = z.row(k);
                for (int j = 0; j < m; ++j) zi[j] -= lik * zk[j];
            }
        }
        for (int i = n - 1; i >= 0; --i) {
            double* zi = z.row(i);
            for (int k = i + 1; k < n; ++k) {
                const double uik = lu_(i, k);
                const double* zk = z.row(k);
                for (int j = 0; j < m; ++j) zi[j] -= uik * zk[j];
            }
            const double inv = 1.0 / lu_(i, i);
            for (int j = 0; j < m; ++j) zi[j] *= inv;
        }
        return z;
    }

    std::vector<double> solve(const std::vector<double>& b) const {
        if (static_cast<int>(b.size()) != dim()) throw DimensionMismatch("lu_solve: vector size mismatch");
        const int n = dim();
        std::vector<double> z = b;
        for (int k = 0; k < n; ++k)
            if (piv_[k] != k) std::swap(z[k], z[piv_[k]]);
        for (int i = 1; i < n; ++i)
            for (int k = 0; k < i; ++k) z[i] -= lu_(i, k) * z[k];
        for (int i = n - 1; i >= 0; --i) {
            for (int k = i + 1; k < n; ++k) z[i] -= lu_(i, k) * z[k];
            z[i] /= lu_(i, i);
        }
        return z;
    }

private:
    Mat lu_;
    std::vector<int> piv_;
};

inline LuFactor lu_factor(const Mat& a) { return LuFactor(a); }

inline Mat lu_solve(const LuFactor& f, const Mat& b) { return f.solve(b); }

} // namespace mg1fp
