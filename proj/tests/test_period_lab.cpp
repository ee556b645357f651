#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "curvlab/curves.hpp"
#include "curvlab/nufft.hpp"
#include "curvlab/period_lab.hpp"

using namespace curvlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// r_2(n) = 4 (d_1(n) - d_3(n)) from the factorisation of n.
long r2_by_divisors(long n) {
    if (n == 0) return 1;
    long d1 = 0, d3 = 0;
    for (long d = 1; d * d <= n; ++d) {
        if (n % d) continue;
        for (long e : {d, n / d}) {
            if (e % 4 == 1) ++d1;
            if (e % 4 == 3) ++d3;
            if (d * d == n) break;
        }
    }
    return 4 * (d1 - d3);
}

// Independent composite Simpson rule for smooth integrands.
cplx simpson(const std::function<cplx(double)>& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    cplx s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

ParamCurve unit_circle() { return curves::circle({0.0, 0.0}, 1.0); }
WeightWindow full_turn() { return make_unit_window(0.0, kTwoPi); }

}  // namespace

TEST(LatticeCircle, SmallCases) {
    EXPECT_EQ(lattice_circle(1).vectors.size(), 4u);
    EXPECT_EQ(lattice_circle(25).vectors.size(), 12u);
    EXPECT_EQ(lattice_circle(3).vectors.size(), 0u);
    EXPECT_EQ(lattice_circle(0).vectors.size(), 1u);
    const auto v = lattice_circle(25).vectors;
    EXPECT_NE(std::find(v.begin(), v.end(), LatticeVec{-3, 4}), v.end());
    EXPECT_NE(std::find(v.begin(), v.end(), LatticeVec{0, -5}), v.end());
}

TEST(LatticeCircle, CountsMatchDivisorFormula) {
    for (long n = 0; n <= 100000; ++n)
        ASSERT_EQ(static_cast<long>(lattice_circle(n).vectors.size()), r2_by_divisors(n)) << n;
}

TEST(LatticeCircle, ClosedUnderSymmetriesAndSorted) {
    for (long n : {5L, 65L, 325L, 5525L}) {
        const auto v = lattice_circle(n).vectors;
        EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
        for (const auto& m : v) {
            for (LatticeVec w : {LatticeVec{-m.x, m.y}, LatticeVec{m.x, -m.y}, LatticeVec{m.y, m.x}})
                EXPECT_TRUE(std::binary_search(v.begin(), v.end(), w));
            EXPECT_EQ(m.norm2(), n);
        }
    }
}

TEST(LatticeCircle, RejectsBeyondCap) {
    EXPECT_THROW(lattice_circle(kLatticeCap + 1), CapExceeded);
    EXPECT_THROW(lattice_circle(-1), InvalidArgument);
}

TEST(OscillatoryIntegral, ZeroFrequencyGivesWindowMass) {
    const auto seg = curves::segment({0.3, 0.1}, {1, 1}, 0.0, 2.0);
    const auto b = make_bump_window(1.0, 1.0);
    const double mass = simpson([&](double s) { return cplx(b(s), 0.0); }, 0.0, 2.0, 20000).real();
    const auto r = oscillatory_integral(seg, b, LatticeVec{0, 0});
    EXPECT_NEAR(r.value.real(), mass, 1e-10);
    EXPECT_EQ(r.value.imag(), 0.0);
}

TEST(OscillatoryIntegral, FullCircleBesselValues) {
    for (double rho : {1.0, 0.5, 2.0}) {
        const auto c = curves::circle({0.4, -0.2}, rho);
        const auto b = make_unit_window(0.0, kTwoPi * rho);
        for (LatticeVec m : {LatticeVec{1, 0}, LatticeVec{3, 4}, LatticeVec{17, -9}, LatticeVec{0, 120}}) {
            const double lam = std::sqrt(static_cast<double>(m.norm2()));
            const auto r = oscillatory_integral(c, b, m);
            EXPECT_NEAR(std::abs(r.value), kTwoPi * rho * std::abs(bessel_j0(lam * rho)),
                        1e-8 * kTwoPi * rho * std::abs(bessel_j0(lam * rho)));
            EXPECT_LE(r.quadrature_error, r.tolerance);
        }
    }
    EXPECT_NEAR(bessel_j0(1.0), 0.7651976866, 1e-10);
}

TEST(OscillatoryIntegral, PerpendicularSegmentHasConstantPhase) {
    const Vec2 o{0.2, 0.7};
    const auto seg = curves::segment(o, {1, 0}, 0.0, 1.0);
    const auto b = make_bump_window(0.5, 0.5);
    const double mass = oscillatory_integral(seg, b, LatticeVec{0, 0}).value.real();
    const auto r = oscillatory_integral(seg, b, LatticeVec{0, 7});
    const cplx expected = std::exp(cplx(0.0, 7.0 * o.y)) * mass;
    EXPECT_NEAR(std::abs(r.value - expected), 0.0, 1e-12);
}

TEST(OscillatoryIntegral, MatchesIndependentSimpson) {
    const auto seg = curves::segment({0.0, 0.0}, {2, 1}, 0.0, 1.5);
    const auto b = make_bump_window(0.75, 0.6);
    const LatticeVec m{13, -4};
    const Vec2 d = (1.0 / std::sqrt(5.0)) * Vec2{2, 1};
    auto f = [&](double s) { return b(s) * std::exp(cplx(0.0, (13.0 * d.x - 4.0 * d.y) * s)); };
    EXPECT_NEAR(std::abs(oscillatory_integral(seg, b, m).value - simpson(f, 0.15, 1.35, 40000)), 0.0, 1e-11);
}

TEST(OscillatoryIntegral, ReversalConjugatesNegatedFrequency) {
    const auto seg = curves::segment({0.1, 0.2}, {1, 3}, 0.0, 2.0);
    const auto b = make_bump_window(1.0, 0.9);  // symmetric about the midpoint
    const auto rev = curves::reversed(seg);
    for (LatticeVec m : {LatticeVec{5, 2}, LatticeVec{-7, 11}}) {
        const cplx fwd = oscillatory_integral(seg, b, m).value;
        const cplx back = oscillatory_integral(rev, b, m).value;
        const cplx neg = oscillatory_integral(seg, b, LatticeVec{-m.x, -m.y}).value;
        EXPECT_NEAR(std::abs(back - std::conj(neg)), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(back), std::abs(fwd), 1e-12);
    }
}

TEST(ExtremalNorm, EmptyCircle) { EXPECT_FALSE(extremal_period_norm(unit_circle(), full_turn(), 3).has_value()); }

TEST(ExtremalNorm, CircleOfNormFive) {
    const auto r = extremal_period_norm(unit_circle(), full_turn(), 25);
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(r->count, 12u);
    EXPECT_NEAR(r->norm, std::sqrt(12.0) * std::abs(bessel_j0(5.0)), 1e-10);
    EXPECT_NEAR(r->norm, 0.61521326235325, 1e-12);
}

// (2 pi)^-1 (2 (int b)^2 + 2 |int b e^{is}|^2)^{1/2} for the unit segment.
TEST(ExtremalNorm, SegmentAlongAxis) {
    const auto seg = curves::segment({0, 0}, {1, 0}, 0.0, 1.0);
    const auto b = make_bump_window(0.5, 0.5);
    const double mass = simpson([&](double s) { return cplx(b(s), 0.0); }, 0.0, 1.0, 20000).real();
    const double along = std::abs(simpson([&](double s) { return b(s) * std::exp(cplx(0.0, s)); }, 0.0, 1.0, 20000));
    const auto r = extremal_period_norm(seg, b, 1);
    ASSERT_TRUE(r.has_value());
    EXPECT_NEAR(r->norm, std::sqrt(2.0 * mass * mass + 2.0 * along * along) / kTwoPi, 1e-10);
    EXPECT_GT(r->norm, std::numbers::sqrt2 * mass / kTwoPi);
}

TEST(ExtremalNorm, DominatesExplicitEigenfunctions) {
    const auto seg = curves::segment({0.3, 0.0}, {1, 2}, 0.0, 1.0);
    const auto b = make_bump_window(0.5, 0.5);
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    for (long n : {5L, 25L, 65L, 1105L}) {
        const auto bound = extremal_period_norm(seg, b, n);
        ASSERT_TRUE(bound.has_value());
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<cplx> a(lattice_circle(n).vectors.size());
            for (auto& z : a) z = {g(rng), g(rng)};
            const auto ef = make_torus_eigenfunction(n, a);
            EXPECT_NEAR(ef.coefficient_norm2(), kTorusNormalisation, 1e-12 * kTorusNormalisation);
            EXPECT_LE(std::abs(eigenfunction_period(ef, seg, b)), bound->norm + 1e-10);
        }
    }
}

TEST(DecayScan, CircleSlopeNearMinusHalf) {
    std::vector<long> ns;
    for (long l = 10; l <= 100; ++l) ns.push_back(l * l);
    const auto fit = decay_scan(unit_circle(), full_turn(), ns);
    EXPECT_NEAR(fit.slope, -0.5, 0.1);
    EXPECT_GT(fit.residual, 0.0);
    EXPECT_EQ(fit.points.size(), 91u);
    const auto csv = decay_csv(fit);
    EXPECT_EQ(csv.substr(0, csv.find('\r')), "n,lambda,extremal_norm");
}

TEST(DecayScan, DegenerateScanThrows) {
    EXPECT_THROW(decay_scan(unit_circle(), full_turn(), {25}), InvalidArgument);
}

TEST(SegmentSaturation, AxisDirectionIsExact) {
    const auto b = make_bump_window(0.5, 0.5);
    const auto r = segment_saturation({1.0, 0.0}, b, 40);
    EXPECT_TRUE(r.rational);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.m, (LatticeVec{0, row.k}));
        EXPECT_NEAR(row.magnitude, r.window_mass, 1e-14);
    }
}

TEST(SegmentSaturation, SlopeOneHalf) {
    const auto b = make_bump_window(0.5, 0.5);
    const auto r = segment_saturation({2.0, 1.0}, b, 30);
    EXPECT_TRUE(r.rational);
    EXPECT_LE(std::abs(r.rows.back().magnitude - r.window_mass), 0.05 * r.window_mass);
}

TEST(SegmentSaturation, GoldenRatioFollowsConvergents) {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    const auto b = make_bump_window(0.5, 0.5);
    const auto r = segment_saturation({1.0, phi}, b, 20);
    EXPECT_FALSE(r.rational);
    ASSERT_GE(r.rows.size(), 15u);
    // |m_k . gamma'| shrinks like 1/|m_k| along Fibonacci convergents.
    for (std::size_t i = 5; i < r.rows.size(); ++i) {
        const double len = std::sqrt(static_cast<double>(r.rows[i].m.norm2()));
        EXPECT_LT(r.rows[i].phase_drift * len, 1.0);
    }
    EXPECT_NEAR(r.rows.back().magnitude, r.window_mass, 1e-3 * r.window_mass);
}

TEST(SegmentSaturation, Convergents) {
    const auto c = convergents(0.5 * (1.0 + std::sqrt(5.0)), 10);
    ASSERT_GE(c.size(), 6u);
    EXPECT_EQ(c[5], (std::pair<long, long>{13, 8}));
}

TEST(Zonal, SmallDegrees) {
    EXPECT_EQ(zonal_great_circle(1), 0.0);
    EXPECT_NEAR(zonal_great_circle(0), std::sqrt(std::numbers::pi), 1e-15);
    EXPECT_NEAR(zonal_great_circle(0), 1.772454, 1e-6);
    EXPECT_NEAR(zonal_great_circle(2), -1.981664, 1e-6);
}

// 2 pi sqrt((2k+1)/4pi) |P_k(0)| -> 2 since |P_k(0)| ~ sqrt(2/(pi k)).
TEST(Zonal, NonDecayAndLimit) {
    for (int j = 1; j <= 200; ++j) EXPECT_GE(std::abs(zonal_great_circle(2 * j)), 1.0);
    const double k = 400.0;
    const double limit_term = kTwoPi * std::sqrt((2 * k + 1) / (4 * std::numbers::pi)) * std::sqrt(2.0 / (std::numbers::pi * k));
    EXPECT_NEAR(limit_term, 2.0, 2e-3);
    EXPECT_NEAR(std::abs(zonal_great_circle(400)), 2.0, 0.04);
}

TEST(Nufft, MatchesDirectSum) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<double> y(300);
    std::vector<cplx> d(300);
    for (std::size_t j = 0; j < y.size(); ++j) {
        y[j] = u(rng);
        d[j] = {u(rng), u(rng)};
    }
    const int K = 40;
    Nufft1D plan(y, K);
    auto ws = plan.make_workspace();
    std::vector<cplx> out(2 * K + 1);
    plan.transform(d.data(), K, out.data(), ws);
    for (int k = -K; k <= K; ++k) {
        cplx direct = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) direct += d[j] * std::exp(cplx(0.0, k * y[j]));
        EXPECT_NEAR(std::abs(out[k + K] - direct), 0.0, 1e-10 * (1.0 + std::abs(direct))) << k;
    }
}

TEST(Kuznecov, ZeroLambdaIsMassSquared) {
    const auto seg = curves::segment({0, 0}, {1, 3}, 0.0, 1.0);
    const auto b = make_bump_window(0.5, 0.5);
    const double mass = oscillatory_integral(seg, b, LatticeVec{0, 0}).value.real();
    EXPECT_NEAR(kuznecov_sum(seg, b, 0.0), kTorusNormalisation * mass * mass, 1e-14);
}

TEST(Kuznecov, MatchesDirectEnumeration) {
    const auto seg = curves::segment({0.1, 0.4}, {3, 1}, 0.0, 1.2);
    const auto b = make_bump_window(0.6, 0.6);
    const double lam = 25.0;
    double direct = 0.0;
    for (long n = 0; n <= 625; ++n)
        for (const auto& m : lattice_circle(n).vectors) direct += kTorusNormalisation * std::norm(oscillatory_integral(seg, b, m).value);
    const auto sw = kuznecov_sweep(seg, b, {lam});
    EXPECT_NEAR(sw.points.front().sum, direct, 1e-10 * direct);
    EXPECT_LT(sw.probe_error, 1e-9);
}

TEST(Kuznecov, BalancedWindowHasNoZeroMode) {
    const auto seg = curves::segment({0, 0}, {1, 2}, 0.0, 2.0);
    const auto b = make_balanced_window(1.0, 0.5);
    const auto bins = spectral_bins(seg, b, 10.0);
    EXPECT_NEAR(bins.bins[0], 0.0, 1e-20);
}

TEST(Kuznecov, ThreadCountDoesNotChangeResult) {
    const auto a = kuznecov_sum(unit_circle(), full_turn(), 120.0, {1, false});
    const auto b = kuznecov_sum(unit_circle(), full_turn(), 120.0, {3, false});
    EXPECT_NEAR(a, b, 1e-12 * a);
}

TEST(Kuznecov, CapRequiresOverride) {
    EXPECT_THROW(kuznecov_sum(unit_circle(), full_turn(), 1001.0), CapExceeded);
}

TEST(WindowedSum, MatchesDirectEnumeration) {
    const auto c = unit_circle();
    const auto b = full_turn();
    double direct = 0.0;
    for (long n = 25; n <= 36; ++n)
        for (const auto& m : lattice_circle(n).vectors) direct += kTorusNormalisation * std::norm(oscillatory_integral(c, b, m).value);
    const auto r = windowed_sum(c, b, 5.0, 1.0);
    EXPECT_NEAR(r.value, direct, 1e-10 * direct);
    EXPECT_EQ(r.eigenvalues, 6u);  // n = 25, 26, 29, 32, 34, 36
}

TEST(WindowedSum, EmptyWindowIsZero) {
    EXPECT_EQ(windowed_sum(unit_circle(), full_turn(), 1.1, 10.0).value, 0.0);
}

TEST(WindowedSum, DoublingTNeverIncreasesSharpSum) {
    const auto c = curves::segment({0, 0}, {1, 2}, 0.0, 1.0);
    const auto b = make_bump_window(0.5, 0.5);
    for (double lam : {20.0, 47.3}) {
        double prev = INFINITY;
        for (double T : {0.25, 0.5, 1.0, 2.0, 4.0}) {
            const double v = windowed_sum(c, b, lam, T).value;
            EXPECT_LE(v, prev * (1 + 1e-12));
            prev = v;
        }
    }
}

TEST(WindowedSum, SmoothModePositiveAndBounded) {
    const auto c = unit_circle();
    const auto b = full_turn();
    const auto smooth = windowed_sum(c, b, 30.0, 1.0, WindowMode::smooth);
    const double total = kuznecov_sum(c, b, 30.0 + kSmoothWindowCutoff);
    EXPECT_GT(smooth.value, 0.0);
    EXPECT_LT(smooth.value, total);
    EXPECT_THROW(windowed_sum(c, b, 1500.0, 1.0), CapExceeded);
    EXPECT_THROW(windowed_sum(c, b, 5.0, 0.0), InvalidArgument);
}
