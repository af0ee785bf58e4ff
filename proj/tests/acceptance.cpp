// Acceptance suite: one pass/fail line per criterion. The long-running
// delta=1e-4 benchmark row only runs with --full (several minutes).

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mg1fp/analysis.hpp"
#include "mg1fp/problems.hpp"
#include "mg1fp/solvers.hpp"

using namespace mg1fp;

namespace {

MG1Model scalar_model(double am1, double a0, double a1) {
    Mat m1(1, 1), m2(1, 1), m3(1, 1);
    m1(0, 0) = am1;
    m2(0, 0) = a0;
    m3(0, 0) = a1;
    return MG1Model({m1, m2, m3});
}

SolveResult run_method(const MG1Model& m, Method method, double tol,
                       StartMatrix start = StartMatrix::zero(), long long max_iter = 10000000) {
    SolverConfig cfg;
    cfg.method = method;
    cfg.start = start;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    cfg.trace_every = 0;
    return solve(m, cfg);
}

Mat reference_g(const MG1Model& m, double tol) {
    const SolveResult res = run_method(m, Method::ubased(), tol);
    if (!res.converged) throw std::runtime_error("reference solve did not converge");
    return res.G;
}

bool in_band(long long got, long long expect, long long slack, std::ostream& log,
             const char* label) {
    log << label << "=" << got;
    if (std::llabs(got - expect) > slack) {
        log << "(!expected " << expect << "+-" << slack << ")";
        return false;
    }
    log << " ";
    return true;
}

bool leq_entrywise(const Mat& a, const Mat& b, double slack) {
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (a(i, j) > b(i, j) + slack) return false;
    return true;
}

// ------------------------------------------------------------ criteria ----

bool criterion_scalar_oracles(std::ostream& log) {
    bool ok = true;
    const std::vector<Method> zero_start = {Method::natural(),    Method::traditional(),
                                            Method::ubased(),     Method::staircase(),
                                            Method::relaxed(1.8), Method::adaptive_zero(10.0)};
    const struct { double am1, a0, a1, root; } cases[] = {
        {0.4, 0.3, 0.3, 1.0},
        {0.3, 0.3, 0.4, 0.75},
    };
    for (const auto& c : cases) {
        const MG1Model m = scalar_model(c.am1, c.a0, c.a1);
        for (const Method& method : zero_start) {
            const SolveResult res = run_method(m, method, 1e-13);
            const double err = std::abs(res.G(0, 0) - c.root);
            if (!res.converged || err > 1e-12) {
                log << method.name() << " missed root " << c.root << " (err " << err << ") ";
                ok = false;
            }
        }
    }
    // The stochastic-start adaptive scheme needs a stochastic start and a
    // stochastic solution; it is exercised on the recurrent chain only. On
    // the transient chain every stochastic start already sits on the
    // non-minimal root, so no stochastic-start scheme can reach 0.75.
    const SolveResult sto = run_method(scalar_model(0.4, 0.3, 0.3),
                                       Method::adaptive_stochastic(10.0), 1e-13,
                                       StartMatrix::uniform());
    if (!sto.converged || std::abs(sto.G(0, 0) - 1.0) > 1e-12) {
        log << "adaptive-stochastic(uniform start) missed 1.0 ";
        ok = false;
    }
    if (ok) log << "six zero-start schemes on both roots, stochastic-start variant on the recurrent chain";
    return ok;
}

bool criterion_tridiag_reference_counts(std::ostream& log) {
    const MG1Model m = gen_example_1a(100, 1e-2);
    bool ok = true;
    ok &= in_band(run_method(m, Method::traditional(), 1e-13).iterations, 1447, 5, log, "traditional");
    ok &= in_band(run_method(m, Method::ubased(), 1e-13).iterations, 731, 5, log, "ubased");
    ok &= in_band(run_method(m, Method::staircase(), 1e-13).iterations, 724, 5, log, "staircase");
    ok &= in_band(run_method(m, Method::relaxed(1.8), 1e-13).iterations, 515, 5, log, "relaxed1.8");
    ok &= in_band(run_method(m, Method::relaxed(1.9), 1e-13).iterations, 496, 5, log, "relaxed1.9");
    ok &= in_band(run_method(m, Method::relaxed(2.0), 1e-13).iterations, 479, 5, log, "relaxed2.0");
    return ok;
}

bool criterion_tridiag_long_counts(std::ostream& log) {
    const MG1Model m = gen_example_1a(100, 1e-4);
    bool ok = true;
    ok &= in_band(run_method(m, Method::traditional(), 1e-13).iterations, 84067, 420, log,
                  "traditional");
    ok &= in_band(run_method(m, Method::staircase(), 1e-13).iterations, 42037, 210, log,
                  "staircase");
    return ok;
}

bool criterion_adaptive_zero_speedup(std::ostream& log) {
    const MG1Model m = gen_example_1a(100, 1e-2);
    const SolveResult res = run_method(m, Method::adaptive_zero(10.0), 1e-13);
    log << "adaptive-zero=" << res.iterations << " (cap 362 = half of the plain two-stage count; "
        << "the row-sum cap can place the dominant component at its limit, so counts far below "
        << "the stationary-weight schemes are expected) ";
    return res.converged && res.iterations <= 362;
}

bool criterion_geometric_counts(std::ostream& log) {
    bool ok = true;
    {
        const MG1Model m = gen_example_1b(0.3);
        ok &= in_band(run_method(m, Method::traditional(), 1e-8).iterations, 14, 1, log, "p.3-trad");
        ok &= in_band(run_method(m, Method::ubased(), 1e-8).iterations, 11, 1, log, "p.3-ubased");
        ok &= in_band(run_method(m, Method::staircase(), 1e-8).iterations, 10, 1, log, "p.3-stair");
    }
    {
        const MG1Model m = gen_example_1b(0.48);
        ok &= in_band(run_method(m, Method::traditional(), 1e-8).iterations, 122, 2, log, "p.48-trad");
        ok &= in_band(run_method(m, Method::ubased(), 1e-8).iterations, 84, 2, log, "p.48-ubased");
        ok &= in_band(run_method(m, Method::staircase(), 1e-8).iterations, 91, 2, log, "p.48-stair");
    }
    {
        const MG1Model m = gen_example_1b(0.5);
        ok &= in_band(run_method(m, Method::traditional(), 1e-8).iterations, 7497, 37, log, "p.5-trad");
        ok &= in_band(run_method(m, Method::ubased(), 1e-8).iterations, 5000, 25, log, "p.5-ubased");
        ok &= in_band(run_method(m, Method::staircase(), 1e-8).iterations, 5622, 28, log, "p.5-stair");
    }
    {
        const MG1Model m = gen_example_1b(0.55);
        ok &= in_band(run_method(m, Method::traditional(), 1e-8).iterations, 53, 2, log, "p.55-trad");
        ok &= in_band(run_method(m, Method::ubased(), 1e-8).iterations, 37, 2, log, "p.55-ubased");
        ok &= in_band(run_method(m, Method::staircase(), 1e-8).iterations, 39, 2, log, "p.55-stair");
    }
    return ok;
}

bool criterion_monotone_growth(std::ostream& log) {
    const MG1Model m = gen_example_1a(20, 1e-2);
    const Mat g_ref = reference_g(m, 1e-14);
    const Mat zero = Mat::zeros(20, 20);
    for (double omega : {0.0, 0.5, 1.0}) {
        IterationState st = make_state(m, StartMatrix::zero());
        long long steps = 0;
        while (true) {
            const Mat x_before = st.X;
            step_staircase(st, m, omega);
            ++steps;
            if (!leq_entrywise(zero, st.X, 0.0) || !leq_entrywise(x_before, st.Y, 1e-12) ||
                !leq_entrywise(st.Y, st.X, 1e-12) || !leq_entrywise(st.X, g_ref, 1e-12)) {
                log << "ordering violated at omega=" << omega << " k=" << steps << " ";
                return false;
            }
            if (residual(m, st.X) <= 1e-13) break;
            if (steps > 1000000) {
                log << "no convergence at omega=" << omega << " ";
                return false;
            }
        }
        log << "omega=" << omega << ":" << steps << " ";
    }
    log << "(0 <= X_k <= Y_k <= X_{k+1} <= G held at every step)";
    return true;
}

bool criterion_stochastic_start(std::ostream& log) {
    const MG1Model m = gen_example_1a(20, 1e-2);
    IterationState st = make_state(m, StartMatrix::uniform());
    long long steps = 0;
    while (true) {
        step_staircase(st, m, 1.0);
        ++steps;
        for (double s : row_sums(st.X))
            if (std::abs(s - 1.0) > 1e-12) {
                log << "row sum drifted to " << s << " at k=" << steps << " ";
                return false;
            }
        if (min_entry(st.X) < -1e-15) {
            log << "negative entry at k=" << steps << " ";
            return false;
        }
        if (residual(m, st.X) <= 1e-13) break;
        if (steps > 1000000) {
            log << "no convergence ";
            return false;
        }
    }
    log << "converged in " << steps << " steps with stochastic iterates throughout";
    return true;
}

bool criterion_quadratic_rate_identities(std::ostream& log) {
    const MG1Model m = gen_example_1a(20, 1e-2);
    const Mat g = reference_g(m, 1e-13);
    const Mat w = build_W(m, g);
    const double rho0 = rho_bounds(m, g, w, 0.0).rho_omega;
    const double rho1 = rho_bounds(m, g, w, 1.0).rho_omega;
    bool ok = true;
    log << "rho0=" << rho0 << " ";
    if (std::abs(rho1 - rho0 * rho0) > 1e-8) {
        log << "rho1=" << rho1 << " is not rho0^2 ";
        ok = false;
    }
    for (double omega : {0.5, 2.0}) {
        const double measured = rho_bounds(m, g, w, omega).rho_omega;
        const double predicted = rho0 * (1.0 - omega * (1.0 - rho0));
        if (std::abs(measured - predicted) > 1e-8) {
            log << "omega=" << omega << " radius " << measured << " != " << predicted << " ";
            ok = false;
        }
    }
    if (ok) log << "(squaring and linear-decrease identities to 1e-8)";
    return ok;
}

bool criterion_rate_sandwich(std::ostream& log) {
    const MG1Model m = gen_example_1b(0.3);
    const Mat g = reference_g(m, 1e-13);
    const Mat w = build_W(m, g);
    const double omega_hat = omega_hat_c1(m, g, w);
    bool ok = true;
    for (double omega : {0.5, 1.0, std::min(2.0, omega_hat)}) {
        const RateAnalysis ra = rho_bounds(m, g, w, omega);
        if (!(ra.bound_lo - 1e-10 <= ra.rho_omega && ra.rho_omega <= ra.bound_hi + 1e-10)) {
            log << "omega=" << omega << ": " << ra.rho_omega << " outside [" << ra.bound_lo << ","
                << ra.bound_hi << "] ";
            ok = false;
        }
    }
    if (ok) log << "bounds held at omegas {0.5, 1, min(2, " << omega_hat << ")}";
    return ok;
}

bool criterion_staircase_relation(std::ostream& log) {
    bool ok = true;
    for (double lambda : {0.5, 0.9, 0.999}) {
        if (staircase_rho(lambda, 1.0) != lambda * lambda) {
            log << "rho(" << lambda << ",1) != lambda^2 exactly ";
            ok = false;
        }
        const StaircaseOptimum opt = optimal_omega(lambda);
        const double target = 1.0 - std::sqrt(1.0 - lambda * lambda);
        if (std::abs(staircase_rho(lambda, opt.omega_star) - target) > 1e-12) {
            log << "rho(" << lambda << ",omega*) missed " << target << " ";
            ok = false;
        }
    }
    if (ok) log << "identity at weight 1 exact; optimum matched to 1e-12 at lambdas {0.5, 0.9, 0.999}";
    return ok;
}

bool criterion_kron_dominance(std::ostream& log) {
    bool ok = true;
    const std::vector<MG1Model> cases = {gen_example_1a(4, 0.1), gen_example_1b(0.3, 10)};
    for (const MG1Model& m : cases) {
        const Mat g = reference_g(m, 1e-13);
        const Mat w = build_W(m, g);
        const KronAnalysis ka = kron_rates(m, g);
        const double p0 = rho_bounds(m, g, w, 0.0).rho_omega;
        const double p1 = rho_bounds(m, g, w, 1.0).rho_omega;
        if (ka.rho_H0 > p0 + 1e-10) {
            log << "rho_H0=" << ka.rho_H0 << " > " << p0 << " ";
            ok = false;
        }
        if (ka.rho_H1 > p1 + 1e-10) {
            log << "rho_H1=" << ka.rho_H1 << " > " << p1 << " ";
            ok = false;
        }
    }
    if (ok) log << "operator radii below the rate radii on both test chains";
    return ok;
}

bool criterion_drift_forms(std::ostream& log) {
    bool ok = true;
    for (const auto& [n, delta] : {std::pair{2, 0.1}, {100, 1e-4}}) {
        const double eta = drift(gen_example_1a(n, delta)).eta;
        if (std::abs(eta + delta) > 1e-12) {
            log << "tridiagonal n=" << n << " drift " << eta << " != " << -delta << " ";
            ok = false;
        }
    }
    for (double p : {0.3, 0.5}) {
        const double eta = drift(gen_example_1b(p)).eta;
        const double expected = (2 * p - 1) / (1 - p);
        if (std::abs(eta - expected) > 1e-8) {
            log << "geometric p=" << p << " drift " << eta << " != " << expected << " ";
            ok = false;
        }
    }
    if (ok) log << "drift equals -delta and (2p-1)/(1-p) at the stated tolerances";
    return ok;
}

bool criterion_exclusions(std::ostream& log) {
    log << "delta=1e-6 rows (~2.3e6 iterations) supported but not asserted; CPU speed-up table and "
           "externally constructed queueing chains are out of scope";
    return true;
}

} // namespace

int main(int argc, char** argv) {
    bool full = false;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--full") == 0) full = true;

    struct Entry {
        int id;
        const char* title;
        std::function<bool(std::ostream&)> run;
        bool gated = false;
    };
    const std::vector<Entry> entries = {
        {1, "scalar chains: every applicable scheme reaches the minimal root", criterion_scalar_oracles},
        {2, "block-tridiagonal chain n=100 delta=1e-2: reference iteration counts",
         criterion_tridiag_reference_counts},
        {3, "block-tridiagonal chain delta=1e-4: long-run iteration counts",
         criterion_tridiag_long_counts, true},
        {4, "adaptive zero-start halves the plain two-stage count", criterion_adaptive_zero_speedup},
        {5, "geometric chain: reference iteration counts at tol 1e-8", criterion_geometric_counts},
        {6, "monotone growth from the zero start", criterion_monotone_growth},
        {7, "stochastic start keeps stochastic iterates and converges", criterion_stochastic_start},
        {8, "quadratic-chain rate identities", criterion_quadratic_rate_identities},
        {9, "componentwise rate bounds sandwich the measured rate", criterion_rate_sandwich},
        {10, "staircase eigenvalue relation and optimal weight", criterion_staircase_relation},
        {11, "vectorized operator radii bounded by the rate radii", criterion_kron_dominance},
        {12, "drift closed forms", criterion_drift_forms},
        {13, "excluded scenarios (documented, not asserted)", criterion_exclusions},
    };

    int failures = 0;
    for (const Entry& e : entries) {
        if (e.gated && !full) {
            std::cout << "SKIP  " << e.id << ". " << e.title << " (enable with --full)\n";
            continue;
        }
        std::ostringstream detail;
        bool ok = false;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            ok = e.run(detail);
        } catch (const std::exception& ex) {
            detail << "exception: " << ex.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (ok ? "PASS" : "FAIL") << "  " << e.id << ". " << e.title << " ["
                  << detail.str() << "] (" << secs << " s)\n";
        if (!ok) ++failures;
    }
    if (failures) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
