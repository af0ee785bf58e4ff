#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "mg1fp/problems.hpp"
#include "mg1fp/relax.hpp"
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

Mat scalar_mat(double v) { return Mat::constant(1, 1, v); }

} // namespace

TEST_CASE("check_eligibility", "[relax]") {
    SECTION("weight 1 along a monotone zero-start run") {
        const MG1Model m = gen_example_1a(6, 0.2);
        IterationState st = make_state(m, StartMatrix::zero());
        for (int k = 0; k < 50; ++k) {
            const Mat x_before = st.X;
            step_staircase(st, m, 1.0);
            REQUIRE(check_eligibility(m, x_before, st.Y, st.X, 1.0));
        }
    }
    SECTION("a converged state accepts any weight") {
        const MG1Model m = scalar_model(0.4, 0.3, 0.3);
        const Mat g = scalar_mat(1.0);
        REQUIRE(check_eligibility(m, g, g, g, 1.0));
        REQUIRE(check_eligibility(m, g, g, g, 1e6));
    }
    SECTION("huge weight breaks the row-sum clause on the first scalar step") {
        const MG1Model m = scalar_model(0.4, 0.3, 0.3);
        IterationState st = make_state(m, StartMatrix::zero());
        staircase_halfstep(st, m);
        const Mat x0 = st.X;
        staircase_apply(st, 1000.0);
        REQUIRE(st.X(0, 0) > 1.0);
        REQUIRE_FALSE(check_eligibility(m, x0, st.Y, st.X, 1000.0));
    }
}

TEST_CASE("theta_estimate", "[relax]") {
    SECTION("converged state defaults to 1") {
        const Mat g = scalar_mat(0.7);
        const ThetaEstimate th = theta_estimate(g, g, g, 1e-14);
        REQUIRE(th.finite);
        REQUIRE(th.theta == 1.0);
    }
    SECTION("scalar ratio") {
        const ThetaEstimate th =
            theta_estimate(scalar_mat(4.0 / 7.0), scalar_mat(0.0), scalar_mat(0.8), 1e-14);
        REQUIRE(th.finite);
        REQUIRE(th.theta == Catch::Approx(2.5).margin(1e-12));
    }
    SECTION("progress with a stalled half-step has no finite theta") {
        const ThetaEstimate th = theta_estimate(scalar_mat(0.5), scalar_mat(0.2), scalar_mat(0.5), 1e-14);
        REQUIRE_FALSE(th.finite);
    }
    SECTION("bounding inequality holds on a live run") {
        const MG1Model m = gen_example_1b(0.4, 8);
        IterationState st = make_state(m, StartMatrix::zero());
        step_staircase(st, m, 1.0);
        for (int k = 0; k < 20; ++k) {
            staircase_halfstep(st, m);
            const ThetaEstimate th = theta_estimate(st.X, st.X_prev, st.Y, 1e-14);
            if (th.finite) {
                for (int i = 0; i < m.n(); ++i)
                    for (int j = 0; j < m.n(); ++j)
                        REQUIRE(st.Y(i, j) - st.X(i, j) >=
                                (st.X(i, j) - st.X_prev(i, j)) / th.theta - 1e-15);
            }
            staircase_apply(st, 1.0);
        }
    }
}

TEST_CASE("adaptive_omega_zero", "[relax]") {
    RelaxControl ctl;   // omega_hat = 10, floor 1

    SECTION("first step uses weight 1") {
        const MG1Model m = gen_example_1a(4, 0.2);
        IterationState st = make_state(m, StartMatrix::zero());
        staircase_halfstep(st, m);
        REQUIRE(adaptive_omega_zero(m, st, ctl) == 1.0);
    }
    SECTION("converged state returns the cap") {
        const MG1Model m = scalar_model(0.4, 0.3, 0.3);
        IterationState st = make_state(m, StartMatrix::given(scalar_mat(1.0)));
        st.X_prev = scalar_mat(1.0);
        st.has_prev = true;
        staircase_halfstep(st, m);
        REQUIRE(adaptive_omega_zero(m, st, ctl) == Catch::Approx(ctl.omega_hat).margin(1e-9));
    }
    SECTION("weights stay within bounds and keep row sums feasible on a QBD run") {
        const MG1Model m = gen_example_1a(20, 1e-2);
        IterationState st = make_state(m, StartMatrix::zero());
        for (int k = 0; k < 5000; ++k) {
            staircase_halfstep(st, m);
            const double w = adaptive_omega_zero(m, st, ctl);
            REQUIRE(w <= ctl.omega_hat + 1e-12);
            REQUIRE(w >= 0.0);
            // below-1 weights only happen under a binding row-sum cap
            if (w < 1.0) {
                const std::vector<double> ye = row_sums(st.Y);
                const std::vector<double> ge = row_sums(st.corr);
                double cap = std::numeric_limits<double>::infinity();
                for (int i = 0; i < m.n(); ++i)
                    if (ge[i] > ctl.eps_pos) cap = std::min(cap, (1.0 - ye[i]) / ge[i]);
                REQUIRE(w == Catch::Approx(std::max(cap, 0.0)).margin(1e-15));
            }
            staircase_apply(st, w);
            for (double s : row_sums(st.X)) REQUIRE(s <= 1.0 + 1e-12);
            if (residual(m, st.X) <= 1e-13) break;
        }
        REQUIRE(residual(m, st.X) <= 1e-13);
    }
    SECTION("same bounds on the banded chain") {
        const MG1Model m = gen_example_1b(0.3);
        IterationState st = make_state(m, StartMatrix::zero());
        for (int k = 0; k < 5000; ++k) {
            staircase_halfstep(st, m);
            const double w = adaptive_omega_zero(m, st, ctl);
            REQUIRE(w <= ctl.omega_hat + 1e-12);
            staircase_apply(st, w);
            for (double s : row_sums(st.X)) REQUIRE(s <= 1.0 + 1e-12);
            if (residual(m, st.X) <= 1e-13) break;
        }
        REQUIRE(residual(m, st.X) <= 1e-13);
    }
}

TEST_CASE("adaptive_omega_stochastic", "[relax]") {
    RelaxControl ctl;
    ctl.omega_floor = 0.0;

    SECTION("nonnegative correction leaves the weight alone") {
        const MG1Model m = gen_example_1a(4, 0.2);
        IterationState st = make_state(m, StartMatrix::zero());
        staircase_halfstep(st, m);   // zero start: correction is nonnegative
        REQUIRE(adaptive_omega_stochastic(st, ctl, 3.5) == 3.5);
    }
    SECTION("binding at a zero entry") {
        IterationState st;
        st.Y = Mat::zeros(1, 1);
        st.corr = scalar_mat(-0.1);
        st.has_halfstep = true;
        REQUIRE(adaptive_omega_stochastic(st, ctl, 2.0) == 0.0);
    }
    SECTION("ratio cap") {
        IterationState st;
        st.Y = scalar_mat(0.2);
        st.corr = scalar_mat(-0.4);
        st.has_halfstep = true;
        REQUIRE(adaptive_omega_stochastic(st, ctl, 1.0) == Catch::Approx(0.5).margin(1e-15));
    }
    SECTION("keeps iterates nonnegative from the uniform start") {
        const MG1Model m = gen_example_1a(20, 1e-2);
        IterationState st = make_state(m, StartMatrix::uniform());
        double w_prev = 10.0;
        for (int k = 0; k < 2000; ++k) {
            staircase_halfstep(st, m);
            const double w = adaptive_omega_stochastic(st, ctl, w_prev);
            REQUIRE(w <= w_prev + 1e-15);   // nonincreasing
            w_prev = w;
            staircase_apply(st, w);
            REQUIRE(min_entry(st.X) >= -1e-15);
            if (residual(m, st.X) <= 1e-13) break;
        }
        REQUIRE(residual(m, st.X) <= 1e-13);
    }
}

TEST_CASE("adaptive driver with the cap forced to 1 retraces the plain scheme", "[relax]") {
    const MG1Model m = gen_example_1a(10, 0.1);
    RelaxControl ctl;
    ctl.omega_hat = 1.0;

    IterationState adaptive = make_state(m, StartMatrix::zero());
    IterationState plain = make_state(m, StartMatrix::zero());
    // compare until the tail where vanishing row-sum margins make the cap
    // change the weight by rounding crumbs
    for (int k = 0; k < 100000; ++k) {
        staircase_halfstep(adaptive, m);
        const double w = adaptive_omega_zero(m, adaptive, ctl);
        staircase_apply(adaptive, w);
        step_staircase(plain, m, 1.0);
        if (residual(m, plain.X) < 1e-9) break;
        REQUIRE(w == 1.0);
        REQUIRE(inf_norm_diff(adaptive.X, plain.X) == 0.0);
    }
}
