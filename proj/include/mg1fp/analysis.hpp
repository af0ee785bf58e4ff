#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "mg1fp/lu.hpp"
#include "mg1fp/model.hpp"
#include "mg1fp/solvers.hpp"

namespace mg1fp {

/// W = sum_{i=1}^{q} A_i (I + G + ... + G^i), built with cumulative powers.
inline Mat build_W(const MG1Model& model, const Mat& g) {
    const int n = model.n();
    Mat w = Mat::zeros(n, n);
    Mat cum = Mat::identity(n);   // sum_{j=0}^{i-1} G^j before the loop body adds G^i
    Mat gp = Mat::identity(n);    // G^{i-1}
    Mat tmp(n, n), term(n, n);
    for (int i = 1; i <= model.q(); ++i) {
        mul_into(tmp, gp, g);   // G^i
        gp.swap(tmp);
        add_into(cum, gp);      // now sum_{j=0}^{i} G^j
        mul_into(term, model.block(i), cum);
        add_into(w, term);
    }
    return w;
}

/// Iteration-rate matrix of the stationary relaxed scheme:
/// P(omega) = (I-A_0)^{-1} W - omega (I-A_0)^{-1} A_1 (I+G) (I - (I-A_0)^{-1} W).
inline Mat build_P_omega(const MG1Model& model, const Mat& g, const Mat& w, double omega) {
    const int n = model.n();
    Mat ia0 = Mat::identity(n);
    add_scaled(ia0, -1.0, model.block(0));
    const LuFactor lu(ia0);
    Mat k = lu.solve(w);
    if (omega == 0.0) return k;

    Mat a1ig = model.block(1) * g;     // A_1 G
    add_into(a1ig, model.block(1));    // A_1 (I+G)
    Mat inner = Mat::identity(n);
    add_scaled(inner, -1.0, k);        // I - (I-A_0)^{-1} W
    const Mat t = lu.solve(a1ig * inner);
    add_scaled(k, -omega, t);
    return k;
}

/// Largest weight satisfying the nonnegativity condition
/// omega * A_1(I+G)(I-A_0)^{-1}(I-A_0-W) <= W, floored at 1. Returns +inf when
/// the left-hand factor has no positive entry (e.g. A_1 = 0); sets *floored
/// when the componentwise minimum fell below 1.
inline double omega_hat_c1(const MG1Model& model, const Mat& g, const Mat& w,
                           bool* floored = nullptr) {
    const int n = model.n();
    if (floored) *floored = false;
    Mat ia0 = Mat::identity(n);
    add_scaled(ia0, -1.0, model.block(0));
    const LuFactor lu(ia0);
    Mat m = ia0;
    add_scaled(m, -1.0, w);            // I - A_0 - W
    Mat a1ig = model.block(1) * g;
    add_into(a1ig, model.block(1));    // A_1 (I+G)
    const Mat t = a1ig * lu.solve(m);

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < t.size(); ++u)
        if (t.data()[u] > 1e-14) best = std::min(best, w.data()[u] / t.data()[u]);
    if (best < 1.0) {
        if (floored) *floored = true;
        best = 1.0;
    }
    return best;
}

struct RateAnalysis {
    Mat W;
    double rho0 = 0.0;                 // spectral radius of P(0)
    double omega_hat = 0.0;            // cap from the nonnegativity condition
    bool omega_hat_floored = false;
    Mat P_omega;
    double omega = 0.0;
    double rho_omega = 0.0;            // spectral radius of P(omega)
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double bound_lo = 0.0;             // rho0 - omega (1-rho0) sigma_max
    double bound_hi = 0.0;             // rho0 - omega (1-rho0) sigma_min
    std::vector<double> perron;        // Perron vector of P(0)
};

/// Collatz-Wielandt style rate bounds for a given omega. Requires the
/// Perron vector of P(0) to be strictly positive.
inline RateAnalysis rho_bounds(const MG1Model& model, const Mat& g, const Mat& w, double omega,
                               double eig_tol = 1e-12, int eig_max_iter = 1000000) {
    RateAnalysis ra;
    ra.W = w;
    ra.omega = omega;
    ra.omega_hat = omega_hat_c1(model, g, w, &ra.omega_hat_floored);

    const Mat p0 = build_P_omega(model, g, w, 0.0);
    const EigenEstimate e0 = dominant_eig(p0, eig_tol, eig_max_iter);
    if (!e0.converged) throw PerronFailure("rho_bounds: power iteration on P(0) did not converge");
    ra.rho0 = e0.value;
    ra.perron = e0.vector;
    double vmax = 0.0;
    for (double vi : ra.perron) vmax = std::max(vmax, std::abs(vi));
    for (double vi : ra.perron)
        if (vi < -1e-12 || vi <= 1e-13 * vmax)
            throw PerronFailure("rho_bounds: Perron vector of P(0) is not strictly positive");

    const int n = model.n();
    Mat ia0 = Mat::identity(n);
    add_scaled(ia0, -1.0, model.block(0));
    const LuFactor lu(ia0);
    Mat a1ig = model.block(1) * g;
    add_into(a1ig, model.block(1));
    const std::vector<double> u = lu.solve(mat_vec(a1ig, ra.perron));

    ra.sigma_min = std::numeric_limits<double>::infinity();
    ra.sigma_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double s = u[i] / ra.perron[i];
        ra.sigma_min = std::min(ra.sigma_min, s);
        ra.sigma_max = std::max(ra.sigma_max, s);
    }
    ra.bound_lo = ra.rho0 - omega * (1.0 - ra.rho0) * ra.sigma_max;
    ra.bound_hi = ra.rho0 - omega * (1.0 - ra.rho0) * ra.sigma_min;

    ra.P_omega = build_P_omega(model, g, w, omega);
    const EigenEstimate ew = dominant_eig(ra.P_omega, eig_tol, eig_max_iter);
    if (!ew.converged) throw PerronFailure("rho_bounds: power iteration on P(omega) did not converge");
    ra.rho_omega = ew.value;
    return ra;
}

/// Modulus of the dominant root of mu^2 - (lambda^2 omega) mu + lambda^2 (omega-1).
/// A relative dead zone around discriminant zero keeps the merged-root case
/// (omega at the critical weight) free of square-root-of-cancellation noise;
/// past it the complex pair shares modulus lambda*sqrt(omega-1).
inline double staircase_rho(double lambda, double omega) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("staircase_rho: need 0 < lambda < 1");
    if (omega < 0.0) throw std::invalid_argument("staircase_rho: need omega >= 0");
    const double b = lambda * lambda * omega;
    const double c = lambda * lambda * (omega - 1.0);
    if (c == 0.0) return b;   // roots {b, 0}
    double disc = b * b - 4.0 * c;
    const double scale = b * b + 4.0 * std::abs(c);
    if (std::abs(disc) <= 64.0 * std::numeric_limits<double>::epsilon() * scale) disc = 0.0;
    if (disc < 0.0) return lambda * std::sqrt(omega - 1.0);
    return 0.5 * (b + std::sqrt(disc));
}

struct StaircaseOptimum {
    double omega_star;
    double rho_star;
};

/// Critical weight where the two real roots of the staircase relation merge;
/// the modulus there is 1 - sqrt(1-lambda^2), the minimum over omega.
inline StaircaseOptimum optimal_omega(double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("optimal_omega: need 0 < lambda < 1");
    const double s = std::sqrt((1.0 - lambda) * (1.0 + lambda));
    return {2.0 / (1.0 + s), lambda * lambda / (1.0 + s)};
}

struct StaircaseEigenPoint {
    double lambda;
    double omega;
    double rho_s;
    double omega_star;
    double rho_at_star;
};

inline StaircaseEigenPoint staircase_point(double lambda, double omega) {
    const StaircaseOptimum opt = optimal_omega(lambda);
    return {lambda, omega, staircase_rho(lambda, omega), opt.omega_star, opt.rho_star};
}

struct KronAnalysis {
    double rho_H0 = 0.0;
    double rho_H1 = 0.0;
    int n_guard = 32;
};

namespace detail {

// (I kron K^{-1}) S via block-row solves, K = I - A_0.
inline Mat apply_block_inverse(const LuFactor& lu, const Mat& s, int n) {
    const int nn = s.rows();
    Mat out(nn, nn);
    Mat slab(n, nn);
    for (int b = 0; b < nn / n; ++b) {
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < nn; ++c) slab(r, c) = s(b * n + r, c);
        const Mat solved = lu.solve(slab);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < nn; ++c) out(b * n + r, c) = solved(r, c);
    }
    return out;
}

} // namespace detail

/// Spectral radii of the vectorized one-step error operators of the plain
/// (omega = 1) and traditional (omega = 0) schemes at the fixed point.
/// Dense n^2 x n^2 matrices; guarded by n <= n_guard.
inline KronAnalysis kron_rates(const MG1Model& model, const Mat& g, int n_guard = 32,
                               double eig_tol = 1e-12, int eig_max_iter = 500000) {
    const int n = model.n();
    if (n > n_guard)
        throw GuardExceeded("kron_rates: n = " + std::to_string(n) + " exceeds guard " +
                            std::to_string(n_guard));
    const int q = model.q();
    const int nn = n * n;
    const int kron_guard = nn + 1;

    Mat ia0 = Mat::identity(n);
    add_scaled(ia0, -1.0, model.block(0));
    const LuFactor lu(ia0);

    std::vector<Mat> g_pow(q + 2), gt_pow(q + 2);
    g_pow[0] = Mat::identity(n);
    gt_pow[0] = Mat::identity(n);
    const Mat gt = transpose(g);
    for (int i = 1; i <= q + 1; ++i) {
        g_pow[i] = g_pow[i - 1] * g;
        gt_pow[i] = gt_pow[i - 1] * gt;
    }
    const Mat a1g = model.block(1) * g;

    Mat h0 = Mat::zeros(nn, nn);
    Mat s = Mat::zeros(nn, nn);
    for (int i = 1; i <= q; ++i) {
        for (int j = 0; j <= i; ++j) {
            const Mat aig = model.block(i) * g_pow[j];
            add_into(h0, kron(gt_pow[i - j], lu.solve(aig), kron_guard));
            if (i >= 2) add_into(s, kron(gt_pow[i - j], aig, kron_guard));
            const Mat solved = lu.solve(aig);
            add_into(s, kron(gt_pow[i - j], a1g * solved, kron_guard));
            add_into(s, kron(gt_pow[i - j + 1], model.block(1) * solved, kron_guard));
        }
    }
    const Mat h1 = detail::apply_block_inverse(lu, s, n);

    const EigenEstimate e0 = dominant_eig(h0, eig_tol, eig_max_iter);
    const EigenEstimate e1 = dominant_eig(h1, eig_tol, eig_max_iter);
    if (!e0.converged || !e1.converged)
        throw PerronFailure("kron_rates: power iteration did not converge");
    return {e0.value, e1.value, n_guard};
}

/// Per-step multiplicative-operation estimates under a gamma*n^2 sparse-block
/// cost model. The natural scheme's count is an estimate (full series plus
/// one application); the others follow the standard accounting.
inline double cost_per_step(const Method& method, int n, int q, double gamma) {
    if (n < 1 || q < 1) throw std::invalid_argument("cost_per_step: need n, q >= 1");
    const double n3 = static_cast<double>(n) * n * n;
    const double gn2 = gamma * static_cast<double>(n) * n;
    switch (method.kind) {
        case Method::Kind::natural: return (q + 1.0) * n3 + gn2;
        case Method::Kind::traditional: return q * n3 + 2.0 * gn2;
        case Method::Kind::ubased: return (q + 4.0 / 3.0) * n3 + gn2;
        case Method::Kind::staircase:
        case Method::Kind::relaxed:
        case Method::Kind::adaptive_stochastic: return (q + 1.0) * n3 + 4.0 * gn2;
        case Method::Kind::adaptive_zero: return (q + 3.0) * n3 + 4.0 * gn2;
    }
    return 0.0;
}

} // namespace mg1fp
