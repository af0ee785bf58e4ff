#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mg1fp/matrix.hpp"

namespace mg1fp {

struct EigenEstimate {
    double value = 0.0;                 // dominant eigenvalue modulus
    std::vector<double> vector;         // associated vector, unit infinity norm
    bool converged = false;
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
};

/// Power iteration for the dominant eigenpair, started from the all-ones
/// vector. The iterate is normalized by its entry of largest magnitude, so
/// the eigenvalue estimate keeps its sign and alternating iterates (negative
/// dominant eigenvalue) still settle. If the estimate stagnates for 50
/// sweeps while the residual stays above tol, the vector is restarted from a
/// seeded pseudorandom positive vector.
inline EigenEstimate dominant_eig(const Mat& m, double tol, int max_iter) {
    if (!m.square()) throw DimensionMismatch("dominant_eig: matrix must be square");
    const int n = m.rows();
    std::mt19937 rng(0x5EED);
    std::uniform_real_distribution<double> dist(0.5, 1.5);

    EigenEstimate est;
    std::vector<double> x(n, 1.0);
    int pivot = 0;
    double lambda = 0.0;
    double lambda_prev = std::numeric_limits<double>::infinity();
    int stagnant = 0;

    for (int it = 1; it <= max_iter; ++it) {
        std::vector<double> y = mat_vec(m, x);
        int p = 0;
        double best = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v = std::abs(y[i]);
            if (v > best) { best = v; p = i; }
        }
        if (best == 0.0) {
            // x is annihilated: eigenvalue 0 with the current vector
            est.value = 0.0;
            est.vector = x;
            est.residual = 0.0;
            est.converged = true;
            est.iterations = it;
            return est;
        }
        lambda = y[pivot] / x[pivot];
        double res = 0.0;
        for (int i = 0; i < n; ++i) res = std::max(res, std::abs(y[i] - lambda * x[i]));

        const double scale = 1.0 / y[p];
        for (int i = 0; i < n; ++i) x[i] = y[i] * scale;
        pivot = p;

        est.iterations = it;
        if (res <= tol) {
            est.value = std::abs(lambda);
            est.vector = x;
            est.residual = res;
            est.converged = true;
            return est;
        }
        if (std::abs(lambda - lambda_prev) < tol / 10.0) {
            if (++stagnant >= 50) {
                for (int i = 0; i < n; ++i) x[i] = dist(rng);
                int q = 0;
                for (int i = 1; i < n; ++i)
                    if (std::abs(x[i]) > std::abs(x[q])) q = i;
                const double s = 1.0 / x[q];
                for (int i = 0; i < n; ++i) x[i] *= s;
                pivot = q;
                stagnant = 0;
            }
        } else {
            stagnant = 0;
        }
        lambda_prev = lambda;
        est.value = std::abs(lambda);
        est.vector = x;
        est.residual = res;
    }
    est.converged = false;
    return est;
}

} // namespace mg1fp
