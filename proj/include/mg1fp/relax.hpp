#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "mg1fp/iteration.hpp"

namespace mg1fp {

/// Knobs for the adaptive relaxation-weight selection.
struct RelaxControl {
    double omega_hat = 10.0;   // search cap
    double eps_pos = 1e-14;    // strict-positivity threshold for componentwise ratios
    double omega_floor = 1.0;  // 1 for zero-start selection, 0 for stochastic-start
};

struct ThetaEstimate {
    double theta = 1.0;
    bool finite = true;
};

/// Eligibility of a committed step (X_k, Y_k, X_{k+1}) for a given omega:
/// omega * A_1(Y^2 - X^2) <= A_1(X_next^2 - X^2) + sum_{i>=2} A_i(Y^{i+1} - X^{i+1})
/// entrywise (slack 1e-12), and row sums of X_next at most 1 + 1e-12.
inline bool check_eligibility(const MG1Model& model, const Mat& x, const Mat& y, const Mat& x_next,
                              double omega) {
    const int n = model.n();
    Mat ysq(n, n), xsq(n, n), nsq(n, n);
    mul_into(ysq, y, y);
    mul_into(xsq, x, x);
    mul_into(nsq, x_next, x_next);

    add_scaled(ysq, -1.0, xsq);   // Y^2 - X^2
    add_scaled(nsq, -1.0, xsq);   // X_next^2 - X^2
    Mat lhs(n, n), rhs(n, n);
    mul_into(lhs, model.block(1), ysq);
    mul_into(rhs, model.block(1), nsq);
    if (model.q() >= 2) {
        add_into(rhs, power_series_tail(model, y, 2));
        add_scaled(rhs, -1.0, power_series_tail(model, x, 2));
    }
    for (std::size_t t = 0; t < lhs.size(); ++t)
        if (omega * lhs.data()[t] > rhs.data()[t] + 1e-12) return false;
    for (double s : row_sums(x_next))
        if (s > 1.0 + 1e-12) return false;
    return true;
}

/// Smallest theta with Y - X >= (X - X_prev) / theta entrywise. Entries whose
/// denominator Y - X is not strictly positive are skipped when the numerator
/// is negligible too; a positive numerator over a vanishing denominator means
/// no finite theta exists.
inline ThetaEstimate theta_estimate(const Mat& x, const Mat& x_prev, const Mat& y, double eps_pos) {
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) {
            const double den = y(i, j) - x(i, j);
            const double num = x(i, j) - x_prev(i, j);
            if (den > eps_pos) {
                any = true;
                best = std::max(best, num / den);
            } else if (num > eps_pos) {
                return {0.0, false};
            }
        }
    if (!any || best <= 0.0) return {1.0, true};
    return {best, true};
}

/// Relaxation weight for the zero-start adaptive scheme. Reads X_k, X_{k-1},
/// Y_k and the correction from the pending half-step; returns a weight in
/// [1, omega_hat] further capped so that row sums of X_{k+1} stay at most 1.
/// The first step (no X_{k-1}) uses omega = 1.
inline double adaptive_omega_zero(const MG1Model& model, const IterationState& st,
                                  const RelaxControl& ctl) {
    if (!st.has_halfstep) throw std::logic_error("adaptive_omega_zero: half-step not computed");
    if (!st.has_prev) return 1.0;

    const int n = model.n();
    const double eps = ctl.eps_pos;

    Mat r(n, n), tmp(n, n);
    mul_into(r, st.Y, st.corr);
    mul_into(tmp, st.corr, st.Y);
    add_into(r, tmp);
    if (model.q() >= 2) {
        const ThetaEstimate th = theta_estimate(st.X, st.X_prev, st.Y, eps);
        if (th.finite) {
            Mat gain = power_series_tail(model, st.X, 2);
            add_scaled(gain, -1.0, power_series_tail(model, st.X_prev, 2));
            add_scaled(r, 1.0 / (ctl.omega_hat * th.theta), gain);
        }
    }

    double t = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < r.size(); ++u) {
        const double l = st.corr_rhs.data()[u];
        if (l > eps) t = std::min(t, r.data()[u] / l);
    }
    double w;
    if (t >= 1.0 - 1.0 / ctl.omega_hat)
        w = ctl.omega_hat;
    else
        w = 1.0 / (1.0 - t);
    w = std::clamp(w, 1.0, ctl.omega_hat);
    if (w < ctl.omega_floor) w = ctl.omega_floor;

    // cap so that (Y + w*corr) e <= e rowwise
    const std::vector<double> ye = row_sums(st.Y);
    const std::vector<double> ge = row_sums(st.corr);
    double cap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        if (ge[i] > eps) cap = std::min(cap, (1.0 - ye[i]) / ge[i]);
    if (cap < w) w = std::max(cap, 0.0);
    return w;
}

/// Relaxation weight for the stochastic-start adaptive scheme: the largest
/// value in [0, omega_prev] keeping X_{k+1} = Y + omega*corr nonnegative.
inline double adaptive_omega_stochastic(const IterationState& st, const RelaxControl& ctl,
                                        double omega_prev) {
    if (!st.has_halfstep) throw std::logic_error("adaptive_omega_stochastic: half-step not computed");
    double w = omega_prev;
    for (std::size_t u = 0; u < st.corr.size(); ++u) {
        const double g = st.corr.data()[u];
        if (g < -ctl.eps_pos) w = std::min(w, st.Y.data()[u] / (-g));
    }
    return std::max(w, 0.0);
}

} // namespace mg1fp
