#include <gtest/gtest.h>

#include <cmath>

#include "curvlab/kcrit.hpp"

using namespace curvlab;

TEST(KcritShooting, ConstantProfiles) {
    EXPECT_NEAR(kcrit_shooting(make_constant_profile(-1.0), 20.0).value, 1.0, 1e-6);
    EXPECT_NEAR(kcrit_shooting(make_constant_profile(-4.0), 20.0).value, 2.0, 1e-6);
    const auto flat = kcrit_shooting(make_constant_profile(0.0), 100.0);
    EXPECT_NEAR(flat.value, 0.0, 0.01 + 1e-12);
    EXPECT_NEAR(flat.value, 0.01, 1e-12);  // exactly 1/s at depth s
    EXPECT_EQ(flat.error_radius, 0.01);
}

TEST(KcritShooting, LadderShape) {
    const auto e = kcrit_shooting(make_constant_profile(-1.0), 20.0);
    std::vector<double> depths;
    for (const auto& [s, k] : e.ladder) depths.push_back(s);
    EXPECT_EQ(depths, (std::vector<double>{1, 2, 4, 8, 16, 20}));
    EXPECT_NEAR(e.ladder.front().second, 1.0 / std::tanh(1.0), 1e-10);
    const auto j = to_json(e);
    EXPECT_EQ(j.at("method"), "shooting-family");
    EXPECT_EQ(j.at("ladder").size(), 6u);
}

TEST(KcritBackward, ConstantProfiles) {
    const auto one = kcrit_bounded_backward(make_constant_profile(-1.0), 20.0);
    EXPECT_NEAR(one.value, 1.0, 1e-10 + one.error_radius);
    EXPECT_NEAR(one.value, 1.0, 1e-9);
    const auto two = kcrit_bounded_backward(make_constant_profile(-4.0), 20.0);
    EXPECT_NEAR(two.value, 2.0, 1e-9);
    EXPECT_GE(kcrit_bounded_backward(make_constant_profile(0.0), 50.0).value, 0.0);
}

// Closed form: the bounded solution is u = 1 for r < -5 and
// u = 2 tanh(2 (r + 5) + atanh(1/2)) on [-5, 0].
TEST(KcritBackward, PiecewiseProfileMatchesClosedForm) {
    const auto p = make_piecewise_constant_profile({-5.0}, {-1.0, -4.0}, -20.0, 0.0);
    const double exact = 2.0 * std::tanh(10.0 + std::atanh(0.5));
    const auto b = kcrit_bounded_backward(p, 20.0);
    const auto s = kcrit_shooting(p, 20.0);
    EXPECT_GE(b.value, 1.0);
    EXPECT_LE(b.value, 2.0);
    EXPECT_NEAR(b.value, exact, b.error_radius + 1e-10);
    EXPECT_NEAR(s.value, exact, 1e-8);
    EXPECT_NEAR(exact, 1.9999999972518, 1e-12);
}

TEST(KcritBackward, ExplicitBracketWithoutSignChange) {
    EXPECT_THROW(kcrit_bounded_backward(make_constant_profile(-1.0), 20.0, 1e-10, 1.2, 1.5), BracketError);
}

TEST(Kcrit, RejectsShortProfileAndBadDepth) {
    const auto p = make_sampled_profile({{-5.0, -1.0}, {0.0, -1.0}}, Interpolation::linear);
    EXPECT_THROW(kcrit_shooting(p, 20.0), DomainError);
    EXPECT_THROW(kcrit_shooting(make_constant_profile(-1.0), 0.5), InvalidArgument);
}

TEST(KcritProperties, MonotoneLadderAndSandwich) {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        const auto p = make_random_smooth_profile(seed, 64.0, -4.0, -0.25);
        const double ref = shooting_rung(p, 64.0, 1e-13);
        const auto e = kcrit_shooting(p, 20.0);
        double prev = INFINITY;
        for (const auto& [s, k] : e.ladder) {
            EXPECT_LT(k, prev + 1e-9) << "seed " << seed << " s " << s;
            EXPECT_GT(k - ref, -1e-9);
            EXPECT_LE(k - ref, 1.0 / s + 1e-9);
            prev = k;
        }
        for (const auto& est : {e, kcrit_bounded_backward(p, 20.0)}) {
            EXPECT_GE(est.value, 0.0);
            EXPECT_GE(est.value, std::sqrt(-p.K0()) - 1e-6);
            EXPECT_LE(est.value, std::sqrt(-p.K1()) + 1e-6);
        }
    }
}

// K_c(r) = c^-2 K(r/c) is the metric scaled by c^2, so k scales by 1/c.
TEST(KcritProperties, ScalingCovariance) {
    const auto base = make_tanh_step_profile(-4.0, -1.0, -6.0, 2.0, -200.0, 0.0);
    const auto b = kcrit_bounded_backward(base, 20.0);
    for (double c : {0.5, 2.0, 5.0}) {
        const auto sc = kcrit_bounded_backward(scale_profile(base, c), 20.0 * c);
        EXPECT_NEAR(sc.value, b.value / c, sc.error_radius + b.error_radius / c) << c;
        const auto ss = kcrit_shooting(scale_profile(base, c), 20.0 * c);
        EXPECT_NEAR(ss.value, b.value / c, ss.error_radius + b.error_radius / c) << c;
    }
}

TEST(KcritCrossValidate, Examples) {
    EXPECT_LE(kcrit_cross_validate(make_constant_profile(-1.0), 20.0).gap, 2e-6);
    EXPECT_LE(kcrit_cross_validate(make_constant_profile(0.0), 20.0).gap, 1.0 / 20.0 + 1e-10);
    const auto p = make_random_smooth_profile(7, 20.0, -4.0, -1.0);
    const auto rep = kcrit_cross_validate(p, 20.0);
    EXPECT_LE(rep.gap, rep.combined_radius);
}

TEST(KcritProperties, DeterministicAcrossRuns) {
    const auto p = make_random_smooth_profile(3, 20.0, -4.0, -1.0);
    EXPECT_EQ(kcrit_shooting(p, 20.0).value, kcrit_shooting(p, 20.0).value);
    EXPECT_EQ(kcrit_bounded_backward(p, 20.0).value, kcrit_bounded_backward(p, 20.0).value);
}
