#pragma once

#include <optional>
#include <utility>

#include "mg1fp/lu.hpp"
#include "mg1fp/model.hpp"

namespace mg1fp {

/// State carried across fixed-point steps. X is the current iterate X_k;
/// after a staircase-family step, Y / corr / corr_rhs describe the half-step
/// and correction that produced it.
struct IterationState {
    Mat X;
    Mat X_prev;
    Mat Y;          // half-step iterate (I-A_0)^{-1}(A_{-1} + sum_{i>=1} A_i X^{i+1})
    Mat corr_rhs;   // A_1 (Y^2 - X^2)
    Mat corr;       // (I-A_0)^{-1} corr_rhs
    bool has_prev = false;
    bool has_halfstep = false;
    std::optional<LuFactor> lu_IA0;
    long long k = 0;
    double omega_used = 0.0;

    const LuFactor& lu() const {
        if (!lu_IA0) throw std::logic_error("IterationState: I-A_0 factorization missing");
        return *lu_IA0;
    }
};

/// Partial sum S = sum_{i=from_index}^{q} A_i X^{i+1}, evaluated by Horner:
/// S := A_q; for i = q-1 .. max(from_index,0): S := A_i + S*X; then S is
/// multiplied by the remaining power of X, and A_{-1} is added when
/// from_index == -1. Indices beyond q give an empty (zero) sum.
inline Mat power_series_tail(const MG1Model& model, const Mat& x, int from_index) {
    if (from_index < -1) throw DimensionMismatch("power_series_tail: from_index must be >= -1");
    const int n = model.n();
    if (x.rows() != n || x.cols() != n) throw DimensionMismatch("power_series_tail: X must be n x n");
    const int q = model.q();
    const int f = from_index < 0 ? 0 : from_index;
    Mat s;
    if (f > q) {
        s = Mat::zeros(n, n);
    } else {
        s = model.block(q);
        Mat tmp(n, n);
        for (int i = q - 1; i >= f; --i) {
            mul_into(tmp, s, x);
            add_into(tmp, model.block(i));
            s.swap(tmp);
        }
        for (int t = 0; t <= f; ++t) {
            mul_into(tmp, s, x);
            s.swap(tmp);
        }
    }
    if (from_index == -1) add_into(s, model.block(-1));
    return s;
}

/// Stopping metric ||X - sum_{i=-1}^{q} A_i X^{i+1}||_inf.
inline double residual(const MG1Model& model, const Mat& x) {
    return inf_norm_diff(x, power_series_tail(model, x, -1));
}

namespace detail {

inline void advance(IterationState& st, Mat&& x_next, double omega) {
    st.X_prev = std::move(st.X);
    st.X = std::move(x_next);
    st.has_prev = true;
    st.k += 1;
    st.omega_used = omega;
}

} // namespace detail

/// X_{k+1} = sum_{i=-1}^{q} A_i X_k^{i+1}
inline void step_natural(IterationState& st, const MG1Model& model) {
    st.has_halfstep = false;
    detail::advance(st, power_series_tail(model, st.X, -1), 0.0);
}

/// (I-A_0) X_{k+1} = A_{-1} + sum_{i>=1} A_i X_k^{i+1}
inline void step_traditional(IterationState& st, const MG1Model& model) {
    st.has_halfstep = false;
    Mat rhs = power_series_tail(model, st.X, 1);
    add_into(rhs, model.block(-1));
    detail::advance(st, st.lu().solve(rhs), 0.0);
}

/// (I - sum_{i>=0} A_i X_k^i) X_{k+1} = A_{-1}, with a fresh factorization
/// of the step matrix. Throws SingularMatrix when that matrix is singular.
inline void step_ubased(IterationState& st, const MG1Model& model) {
    st.has_halfstep = false;
    const int n = model.n();
    const int q = model.q();
    Mat c = model.block(q);
    Mat tmp(n, n);
    for (int i = q - 1; i >= 0; --i) {
        mul_into(tmp, c, st.X);
        add_into(tmp, model.block(i));
        c.swap(tmp);
    }
    Mat step_matrix = Mat::identity(n) - c;
    LuFactor f(step_matrix);
    detail::advance(st, f.solve(model.block(-1)), 0.0);
}

/// First stage of the two-stage staircase step: computes Y_k and the
/// correction (I-A_0)^{-1} A_1 (Y_k^2 - X_k^2) without committing X_{k+1},
/// so a relaxation weight can be chosen from the intermediates.
inline void staircase_halfstep(IterationState& st, const MG1Model& model) {
    const int n = model.n();
    Mat rhs = power_series_tail(model, st.X, 1);
    add_into(rhs, model.block(-1));
    st.Y = st.lu().solve(rhs);

    Mat ysq(n, n), xsq(n, n);
    mul_into(ysq, st.Y, st.Y);
    mul_into(xsq, st.X, st.X);
    add_scaled(ysq, -1.0, xsq);
    st.corr_rhs = Mat(n, n);
    mul_into(st.corr_rhs, model.block(1), ysq);
    st.corr = st.lu().solve(st.corr_rhs);
    st.has_halfstep = true;
}

/// Second stage: X_{k+1} = Y_k + omega * correction.
inline void staircase_apply(IterationState& st, double omega) {
    if (!st.has_halfstep) throw std::logic_error("staircase_apply: half-step not computed");
    Mat x_next = st.Y;
    add_scaled(x_next, omega, st.corr);
    detail::advance(st, std::move(x_next), omega);
}

/// Relaxed staircase step; omega = 1 is the plain two-stage step and
/// omega = 0 reproduces the traditional step.
inline void step_staircase(IterationState& st, const MG1Model& model, double omega) {
    staircase_halfstep(st, model);
    staircase_apply(st, omega);
}

} // namespace mg1fp
