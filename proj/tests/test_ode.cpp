#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "curvlab/ode.hpp"

using namespace curvlab;

TEST(Integrator, HarmonicOscillatorWithStops) {
    auto rhs = [](double, const State<2>& y) { return State<2>{y[1], -y[0]}; };
    const std::vector<double> stops{1.0, 2.5};
    const auto tr = integrate<2>(rhs, 0.0, 6.0, State<2>{0.0, 1.0}, StepperOptions{1e-12, 1e-12}, stops);
    EXPECT_NEAR(tr.y.back()[0], std::sin(6.0), 1e-10);
    for (double s : stops) EXPECT_NE(std::find(tr.t.begin(), tr.t.end(), s), tr.t.end());
    for (double x : {0.3, 1.7, 4.4}) {
        EXPECT_NEAR(tr.value(x)[0], std::sin(x), 1e-8);
        EXPECT_NEAR(tr.derivative(x)[0], std::cos(x), 1e-6);
    }
}

TEST(Integrator, ObserverStopsEarly) {
    auto rhs = [](double, const State<1>&) { return State<1>{1.0}; };
    const auto tr = integrate<1>(rhs, 0.0, 10.0, State<1>{0.0}, StepperOptions{1e-10, 1e-10}, {},
                                 [](const Trajectory<1>& t) { return t.y.back()[0] < 3.0; });
    EXPECT_LT(tr.t.back(), 10.0);
    EXPECT_GE(tr.y.back()[0], 3.0);
}

TEST(Jacobi, FlatParallelField) {
    const auto s = solve_jacobi(make_constant_profile(0.0), 0.0, -10.0, 1.0, 0.0, 1e-12);
    for (double h : s.h) EXPECT_NEAR(h, 1.0, 1e-14);
}

TEST(Jacobi, HyperbolicSine) {
    const auto s = solve_jacobi(make_constant_profile(-1.0), 0.0, 5.0, 0.0, 1.0, 1e-12);
    EXPECT_NEAR(s.h.back(), std::sinh(5.0), 1e-9 * std::sinh(5.0));
    EXPECT_NEAR(s.h.back(), 74.2032, 1e-4);
    for (std::size_t i = 0; i < s.r.size(); ++i) EXPECT_NEAR(s.h[i], std::sinh(s.r[i]), 1e-9 * (1 + std::sinh(s.r[i])));
}

TEST(Jacobi, BackwardExponential) {
    const auto s = solve_jacobi(make_constant_profile(-1.0), 0.0, -20.0, 1.0, 1.0, 1e-12);
    EXPECT_NEAR(s.h.back(), std::exp(-20.0), 1e-11);
    EXPECT_NEAR(s.h.back(), 2.061e-9, 1e-12);
}

TEST(Jacobi, ResidualAndConvexity) {
    const std::vector<CurvatureProfile> ps{make_constant_profile(-2.0),
                                           make_tanh_step_profile(-4.0, -1.0, 3.0, 0.5, -1.0, 11.0),
                                           make_piecewise_constant_profile({2.0, 5.0}, {-1.0, -3.0, -0.5}, -1.0, 11.0)};
    for (const auto& p : ps) {
        const auto s = solve_jacobi(p, 0.0, 10.0, 0.3, -0.2, 1e-12);
        EXPECT_LT(s.max_residual(), 1e-8);
        EXPECT_TRUE(s.nonnegativity_holds());
    }
}

TEST(Jacobi, CsvHasHeader) {
    const auto s = solve_jacobi(make_constant_profile(-1.0), 0.0, 1.0, 0.0, 1.0, 1e-8);
    EXPECT_EQ(s.to_csv().substr(0, 7), "r,h,hp\r");
}

TEST(Jacobi, RejectsUncoveredInterval) {
    const auto p = make_sampled_profile({{-1.0, -1.0}, {0.0, -1.0}}, Interpolation::linear);
    EXPECT_THROW(solve_jacobi(p, 0.0, -2.0, 1.0, 0.0, 1e-10), DomainError);
}

TEST(CircleCurvature, ClosedForms) {
    const auto flat = circle_curvature(make_constant_profile(0.0), 10.0, 1e-12);
    EXPECT_NEAR(flat.kappa_at(2.0), 0.5, 1e-10);
    const auto hyp = circle_curvature(make_constant_profile(-1.0), 10.0, 1e-12);
    EXPECT_NEAR(hyp.kappa_at(1.0), 1.0 / std::tanh(1.0), 1e-9);
    EXPECT_NEAR(hyp.kappa_at(1.0), 1.313035, 1e-6);
    const auto four = circle_curvature(make_constant_profile(-4.0), 10.0, 1e-12);
    EXPECT_NEAR(four.kappa_at(0.5), 2.0 / std::tanh(1.0), 1e-9);
    EXPECT_NEAR(four.kappa_at(0.5), 2.626070, 1e-6);
}

TEST(CircleCurvature, SmallRadiusLimitAndLowerBounds) {
    const auto p = make_tanh_step_profile(-1.0, -4.0, 4.0, 1.0, -1.0, 11.0);
    const auto c = circle_curvature(p, 10.0, 1e-12);
    ASSERT_LE(c.r.front(), 1e-3);
    EXPECT_LE(std::abs(c.r.front() * c.kappa.front() - 1.0), 1e-4);
    const double a = std::sqrt(-p.K0());
    for (std::size_t i = 0; i < c.r.size(); ++i) {
        EXPECT_GE(c.kappa[i], (1.0 / c.r[i]) * (1 - 1e-12));
        EXPECT_GE(c.kappa[i], a / std::tanh(a * c.r[i]) * (1 - 1e-10));
    }
}

// The expansion 1/r - K(0) r / 3 follows from h = r - K r^3 / 6 solving
// h'' + K h = O(r^3), so near the origin it agrees to O(r^2).
TEST(CircleCurvature, SeriesNearOrigin) {
    for (double K : {0.0, -1.0, -3.0}) {
        const auto c = circle_curvature(make_constant_profile(K), 1.0, 1e-13);
        for (std::size_t i = 0; i < c.r.size() && c.r[i] <= 1e-3; ++i)
            EXPECT_NEAR(c.kappa[i], circle_curvature_series(K, c.r[i]), 1e-6) << c.r[i];
    }
}

TEST(CircleCurvature, ConvergesAsToleranceShrinks) {
    const auto p = make_constant_profile(-1.0);
    double prev = INFINITY;
    for (double tol : {1e-6, 1e-8, 1e-10}) {
        const auto c = circle_curvature(p, 10.0, tol);
        double err = 0.0;
        for (std::size_t i = 0; i < c.r.size(); ++i) err = std::max(err, std::abs(c.kappa[i] - 1.0 / std::tanh(c.r[i])));
        EXPECT_LT(err, prev);
        prev = err;
    }
}

TEST(CircleCurvature, DifferenceToEquilibriumDecreases) {
    for (double K : {-0.5, -1.0, -4.0}) {
        const auto c = circle_curvature(make_constant_profile(K), 8.0, 1e-12);
        const double k = std::sqrt(-K);
        double prev = INFINITY;
        for (double kap : c.kappa) {
            const double d = kap - k;
            if (d < 1e-9) break;  // below integration noise
            EXPECT_GT(d, 0.0);
            EXPECT_LT(d, prev);
            prev = d;
        }
    }
}

TEST(Riccati, Equilibrium) {
    const auto t = solve_riccati(make_constant_profile(-1.0), 0.0, -15.0, 1.0, 1e-12);
    EXPECT_FALSE(t.blew_up);
    for (double u : t.u) EXPECT_NEAR(u, 1.0, 1e-12);
}

TEST(Riccati, FlatClosedForm) {
    const auto t = solve_riccati(make_constant_profile(0.0), 0.0, 3.0, 1.0, 1e-12);
    EXPECT_NEAR(t.u.back(), 0.25, 1e-11);
}

// u = coth(r - c) with coth(-c) = 1.5 diverges at r = c = -atanh(1/1.5).
TEST(Riccati, BackwardBlowUp) {
    const auto t = solve_riccati(make_constant_profile(-1.0), 0.0, -5.0, 1.5, 1e-12);
    ASSERT_TRUE(t.blew_up);
    EXPECT_EQ(t.blowup_sign, 1);
    EXPECT_LT(t.blowup_location, 0.0);
    EXPECT_NEAR(t.blowup_location, -std::atanh(1.0 / 1.5), 1e-7);
}

TEST(Riccati, AgreesWithCircleCurvature) {
    const auto p = make_tanh_step_profile(-3.0, -0.5, 5.0, 1.5, -1.0, 11.0);
    const auto c = circle_curvature(p, 10.0, 1e-12);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int i = 0; i < 20; ++i) {
        double r1 = u(rng), r2 = u(rng);
        if (r1 > r2) std::swap(r1, r2);
        if (r2 - r1 < 1e-3) continue;
        const auto t = solve_riccati(p, r1, r2, c.kappa_at(r1), 1e-12);
        EXPECT_NEAR(t.u.back(), c.kappa_at(r2), 1e-7) << r1 << " -> " << r2;
    }
}
