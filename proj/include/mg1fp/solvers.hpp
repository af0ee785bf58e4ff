#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "mg1fp/relax.hpp"

namespace mg1fp {

/// Which fixed-point scheme drives the iteration.
struct Method {
    enum class Kind { natural, traditional, ubased, staircase, relaxed, adaptive_zero, adaptive_stochastic };

    Kind kind = Kind::traditional;
    double omega = 1.0;       // stationary weight (relaxed)
    double omega_hat = 10.0;  // adaptive search cap

    static Method natural() { return {Kind::natural}; }
    static Method traditional() { return {Kind::traditional}; }
    static Method ubased() { return {Kind::ubased}; }
    static Method staircase() { return {Kind::staircase}; }
    static Method relaxed(double omega) {
        if (omega < 0.0) throw std::invalid_argument("relaxed: omega must be >= 0");
        Method m{Kind::relaxed};
        m.omega = omega;
        return m;
    }
    static Method adaptive_zero(double omega_hat = 10.0) {
        if (omega_hat < 1.0) throw std::invalid_argument("adaptive_zero: omega_hat must be >= 1");
        Method m{Kind::adaptive_zero};
        m.omega_hat = omega_hat;
        return m;
    }
    static Method adaptive_stochastic(double omega_hat = 10.0) {
        if (omega_hat < 1.0) throw std::invalid_argument("adaptive_stochastic: omega_hat must be >= 1");
        Method m{Kind::adaptive_stochastic};
        m.omega_hat = omega_hat;
        return m;
    }

    bool staircase_family() const {
        return kind == Kind::staircase || kind == Kind::relaxed || kind == Kind::adaptive_zero ||
               kind == Kind::adaptive_stochastic;
    }
    bool needs_lu() const { return kind == Kind::traditional || staircase_family(); }

    const char* name() const {
        switch (kind) {
            case Kind::natural: return "natural";
            case Kind::traditional: return "traditional";
            case Kind::ubased: return "ubased";
            case Kind::staircase: return "staircase";
            case Kind::relaxed: return "relaxed";
            case Kind::adaptive_zero: return "adaptive-zero";
            case Kind::adaptive_stochastic: return "adaptive-stochastic";
        }
        return "?";
    }
};

struct StartMatrix {
    enum class Kind { zero, uniform_stochastic, given };
    Kind kind = Kind::zero;
    Mat given_matrix;

    static StartMatrix zero() { return {}; }
    static StartMatrix uniform() { return {Kind::uniform_stochastic, {}}; }
    static StartMatrix given(Mat m) {
        if (!m.square()) throw DimensionMismatch("StartMatrix: matrix must be square");
        if (min_entry(m) < 0.0) throw std::invalid_argument("StartMatrix: entries must be nonnegative");
        for (double s : row_sums(m))
            if (s > 1.0 + 1e-12) throw std::invalid_argument("StartMatrix: row sums must be <= 1");
        return {Kind::given, std::move(m)};
    }

    Mat realize(int n) const {
        switch (kind) {
            case Kind::zero: return Mat::zeros(n, n);
            case Kind::uniform_stochastic: return Mat::constant(n, n, 1.0 / n);
            case Kind::given:
                if (given_matrix.rows() != n)
                    throw DimensionMismatch("StartMatrix: dimension does not match model");
                return given_matrix;
        }
        return Mat::zeros(n, n);
    }
};

struct SolverConfig {
    Method method = Method::traditional();
    StartMatrix start = StartMatrix::zero();
    double tol = 1e-13;
    long long max_iter = 10000000;
    long long trace_every = 1;
};

struct TracePoint {
    long long k;
    double residual;
    double omega;
    double seconds;
};

struct SolveResult {
    Mat G;
    bool converged = false;
    long long iterations = 0;
    double final_residual = 0.0;
    std::vector<TracePoint> trace;
};

inline IterationState make_state(const MG1Model& model, const StartMatrix& start, bool with_lu = true) {
    IterationState st;
    st.X = start.realize(model.n());
    if (with_lu) {
        Mat m = Mat::identity(model.n());
        add_scaled(m, -1.0, model.block(0));
        st.lu_IA0.emplace(m);
    }
    return st;
}

/// Runs the configured scheme until the residual drops to tol or the
/// iteration budget is exhausted. Non-convergence is reported in the result,
/// not thrown; a singular step matrix (U-based) propagates as SingularMatrix.
inline SolveResult solve(const MG1Model& model, const SolverConfig& cfg) {
    using clock = std::chrono::steady_clock;
    if (cfg.tol <= 0.0) throw std::invalid_argument("solve: tol must be positive");

    IterationState st = make_state(model, cfg.start, cfg.method.needs_lu());
    RelaxControl ctl;
    ctl.omega_hat = cfg.method.omega_hat;
    ctl.omega_floor = cfg.method.kind == Method::Kind::adaptive_stochastic ? 0.0 : 1.0;
    double omega_prev = cfg.method.omega_hat;

    const auto t0 = clock::now();
    auto elapsed = [&t0] {
        return std::chrono::duration<double>(clock::now() - t0).count();
    };

    SolveResult out;
    double r = residual(model, st.X);
    if (r <= cfg.tol) {
        out.G = st.X;
        out.converged = true;
        out.iterations = 0;
        out.final_residual = r;
        return out;
    }

    long long k = 0;
    while (k < cfg.max_iter) {
        switch (cfg.method.kind) {
            case Method::Kind::natural:
                step_natural(st, model);
                break;
            case Method::Kind::traditional:
                step_traditional(st, model);
                break;
            case Method::Kind::ubased:
                step_ubased(st, model);
                break;
            case Method::Kind::staircase:
                step_staircase(st, model, 1.0);
                break;
            case Method::Kind::relaxed:
                step_staircase(st, model, cfg.method.omega);
                break;
            case Method::Kind::adaptive_zero: {
                staircase_halfstep(st, model);
                staircase_apply(st, adaptive_omega_zero(model, st, ctl));
                break;
            }
            case Method::Kind::adaptive_stochastic: {
                staircase_halfstep(st, model);
                omega_prev = adaptive_omega_stochastic(st, ctl, omega_prev);
                staircase_apply(st, omega_prev);
                break;
            }
        }
        ++k;
        r = residual(model, st.X);
        const bool done = r <= cfg.tol;
        if (done || k == cfg.max_iter || (cfg.trace_every > 0 && k % cfg.trace_every == 0))
            out.trace.push_back({k, r, st.omega_used, elapsed()});
        if (done) {
            out.converged = true;
            break;
        }
    }
    out.G = std::move(st.X);
    out.iterations = k;
    out.final_residual = r;
    return out;
}

} // namespace mg1fp
