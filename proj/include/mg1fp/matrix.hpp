#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "mg1fp/errors.hpp"

namespace mg1fp {

/// Dense real matrix, row-major storage.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {
        if (rows < 1 || cols < 1) throw DimensionMismatch("Mat: dimensions must be >= 1");
    }

    static Mat zeros(int rows, int cols) { return Mat(rows, cols); }

    static Mat identity(int n) {
        Mat I(n, n);
        for (int i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    /// All entries equal to `value`.
    static Mat constant(int rows, int cols, double value) {
        Mat m(rows, cols);
        std::fill(m.a_.begin(), m.a_.end(), value);
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

    double* row(int i) { return a_.data() + static_cast<std::size_t>(i) * cols_; }
    const double* row(int i) const { return a_.data() + static_cast<std::size_t>(i) * cols_; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }
    std::size_t size() const { return a_.size(); }

    void swap(Mat& other) noexcept {
        std::swap(rows_, other.rows_);
        std::swap(cols_, other.cols_);
        a_.swap(other.a_);
    }

    bool same_shape(const Mat& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

inline void require_same_shape(const Mat& a, const Mat& b, const char* where) {
    if (!a.same_shape(b)) throw DimensionMismatch(std::string(where) + ": shape mismatch");
}

/// C = A*B into a preallocated C (no aliasing with A or B).
inline void mul_into(Mat& c, const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("mul: inner dimensions differ");
    if (c.rows() != a.rows() || c.cols() != b.cols()) throw DimensionMismatch("mul: bad output shape");
    const int n = a.rows(), p = a.cols(), m = b.cols();
    std::fill(c.data(), c.data() + c.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (int k = 0; k < p; ++k) {
            const double aik = ai[k];
            const double* bk = b.row(k);
            for (int j = 0; j < m; ++j) ci[j] += aik * bk[j];
        }
    }
}

inline Mat operator*(const Mat& a, const Mat& b) {
    Mat c(a.rows(), b.cols());
    mul_into(c, a, b);
    return c;
}

inline Mat operator+(const Mat& a, const Mat& b) {
    require_same_shape(a, b, "operator+");
    Mat c = a;
    double* cd = c.data();
    const double* bd = b.data();
    for (std::size_t t = 0; t < c.size(); ++t) cd[t] += bd[t];
    return c;
}

inline Mat operator-(const Mat& a, const Mat& b) {
    require_same_shape(a, b, "operator-");
    Mat c = a;
    double* cd = c.data();
    const double* bd = b.data();
    for (std::size_t t = 0; t < c.size(); ++t) cd[t] -= bd[t];
    return c;
}

inline Mat operator*(double s, const Mat& a) {
    Mat c = a;
    double* cd = c.data();
    for (std::size_t t = 0; t < c.size(); ++t) cd[t] *= s;
    return c;
}

inline void add_into(Mat& dst, const Mat& src) {
    require_same_shape(dst, src, "add_into");
    double* d = dst.data();
    const double* s = src.data();
    for (std::size_t t = 0; t < dst.size(); ++t) d[t] += s[t];
}

/// dst += s*src
inline void add_scaled(Mat& dst, double s, const Mat& src) {
    require_same_shape(dst, src, "add_scaled");
    double* d = dst.data();
    const double* p = src.data();
    for (std::size_t t = 0; t < dst.size(); ++t) d[t] += s * p[t];
}

inline Mat transpose(const Mat& a) {
    Mat t(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

/// Matrix infinity norm: maximum absolute row sum.
inline double inf_norm(const Mat& a) {
    double best = 0.0;
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        const double* ri = a.row(i);
        for (int j = 0; j < a.cols(); ++j) s += std::abs(ri[j]);
        best = std::max(best, s);
    }
    return best;
}

/// ||a - b||_inf without forming the difference.
inline double inf_norm_diff(const Mat& a, const Mat& b) {
    require_same_shape(a, b, "inf_norm_diff");
    double best = 0.0;
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        const double *ra = a.row(i), *rb = b.row(i);
        for (int j = 0; j < a.cols(); ++j) s += std::abs(ra[j] - rb[j]);
        best = std::max(best, s);
    }
    return best;
}

inline double max_abs(const Mat& a) {
    double best = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) best = std::max(best, std::abs(a.data()[t]));
    return best;
}

inline double min_entry(const Mat& a) {
    double best = a.data()[0];
    for (std::size_t t = 1; t < a.size(); ++t) best = std::min(best, a.data()[t]);
    return best;
}

inline std::vector<double> row_sums(const Mat& a) {
    std::vector<double> s(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        const double* ri = a.row(i);
        double acc = 0.0;
        for (int j = 0; j < a.cols(); ++j) acc += ri[j];
        s[i] = acc;
    }
    return s;
}

inline std::vector<double> mat_vec(const Mat& a, const std::vector<double>& x) {
    if (a.cols() != static_cast<int>(x.size())) throw DimensionMismatch("mat_vec: size mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        const double* ri = a.row(i);
        double acc = 0.0;
        for (int j = 0; j < a.cols(); ++j) acc += ri[j] * x[j];
        y[i] = acc;
    }
    return y;
}

inline double dot(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double vec_inf_norm(const std::vector<double>& x) {
    double best = 0.0;
    for (double v : x) best = std::max(best, std::abs(v));
    return best;
}

/// Column-stacking of a matrix into a vector of length rows*cols.
inline std::vector<double> vec_stack(const Mat& a) {
    std::vector<double> v(a.size());
    for (int j = 0; j < a.cols(); ++j)
        for (int i = 0; i < a.rows(); ++i) v[static_cast<std::size_t>(j) * a.rows() + i] = a(i, j);
    return v;
}

/// Kronecker product. Guards against accidental huge outputs.
inline Mat kron(const Mat& a, const Mat& b, int max_dim = 4096) {
    const long long r = static_cast<long long>(a.rows()) * b.rows();
    const long long c = static_cast<long long>(a.cols()) * b.cols();
    if (r > max_dim || c > max_dim)
        throw GuardExceeded("kron: output " + std::to_string(r) + "x" + std::to_string(c) +
                            " exceeds guard " + std::to_string(max_dim));
    Mat k(static_cast<int>(r), static_cast<int>(c));
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (int p = 0; p < b.rows(); ++p) {
                double* out = k.row(i * b.rows() + p) + static_cast<std::size_t>(j) * b.cols();
                const double* bp = b.row(p);
                for (int q = 0; q < b.cols(); ++q) out[q] += aij * bp[q];
            }
        }
    return k;
}

} // namespace mg1fp
