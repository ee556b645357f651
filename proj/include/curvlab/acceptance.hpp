#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "curvlab/admissibility.hpp"
#include "curvlab/io.hpp"
#include "curvlab/kcrit.hpp"
#include "curvlab/ode.hpp"
#include "curvlab/period_lab.hpp"
#include "curvlab/phase_geometry.hpp"
#include "curvlab/special_functions.hpp"

namespace curvlab::acceptance {

// Every threshold the suite checks against. Overriding one (e.g. from
// `curvlab verify --set`) makes the matching row fail on purpose.
struct Tolerances {
    double horocycle = 1e-6;
    double horocycle_seconds = 1.0;
    double flat_rounding = 1e-12;
    double circle_rel = 1e-8;
    double circle_seconds = 1.0;
    double ladder_slack = 1e-9;
    double sandwich_slack = 1e-12;
    double threshold_abs = 1e-9;
    double mixed_slack = 1e-4;
    double mixed_seconds = 10.0;
    double pure_abs = 1e-5;
    double bessel_rel = 1e-8;
    double decay_center = -0.5;
    double decay_halfwidth = 0.1;
    double decay_seconds = 120.0;
    double saturation_exact = 1e-12;
    double saturation_frac = 0.05;
    double zonal_floor = 1.0;
    double zonal_frac = 0.02;
    double kuznecov_spread = 0.2;

    std::map<std::string, double*> fields() {
        return {{"horocycle", &horocycle},
                {"horocycle_seconds", &horocycle_seconds},
                {"flat_rounding", &flat_rounding},
                {"circle_rel", &circle_rel},
                {"circle_seconds", &circle_seconds},
                {"ladder_slack", &ladder_slack},
                {"sandwich_slack", &sandwich_slack},
                {"threshold_abs", &threshold_abs},
                {"mixed_slack", &mixed_slack},
                {"mixed_seconds", &mixed_seconds},
                {"pure_abs", &pure_abs},
                {"bessel_rel", &bessel_rel},
                {"decay_center", &decay_center},
                {"decay_halfwidth", &decay_halfwidth},
                {"decay_seconds", &decay_seconds},
                {"saturation_exact", &saturation_exact},
                {"saturation_frac", &saturation_frac},
                {"zonal_floor", &zonal_floor},
                {"zonal_frac", &zonal_frac},
                {"kuznecov_spread", &kuznecov_spread}};
    }

    void set(const std::string& key, double value) {
        auto f = fields();
        const auto it = f.find(key);
        if (it == f.end()) throw InvalidArgument("unknown tolerance '" + key + "'");
        *it->second = value;
    }
};

struct Row {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Options {
    Tolerances tol;
    unsigned threads = 1;
};

namespace detail {

using clock = std::chrono::steady_clock;

inline double since(clock::time_point t0) { return std::chrono::duration<double>(clock::now() - t0).count(); }

inline std::string fmt(const char* f, double a) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

inline std::string fmt(const char* f, double a, double b) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

// Depth of the random profiles; the reference k uses the full depth.
inline constexpr double kProfileDepth = 64.0;
inline constexpr double kLadderDepth = 20.0;

inline Row horocycle(const Options& o) {
    const auto t0 = clock::now();
    const auto p = make_constant_profile(-1.0);
    const auto a = kcrit_shooting(p, 20.0);
    const auto b = kcrit_bounded_backward(p, 20.0);
    const double secs = since(t0);
    const double err = std::max(std::abs(a.value - 1.0), std::abs(b.value - 1.0));
    return {1, "horocycle constant", err <= o.tol.horocycle && secs < o.tol.horocycle_seconds,
            fmt("max |k - 1| = %.3g", err) + fmt(", %.3f s", secs), secs};
}

inline Row flat(const Options& o) {
    bool ok = true;
    std::string d;
    double prev = std::numeric_limits<double>::infinity();
    for (double s_max : {10.0, 100.0, 1000.0}) {
        const auto e = kcrit_shooting(make_constant_profile(0.0), s_max);
        const auto b = kcrit_bounded_backward(make_constant_profile(0.0), s_max);
        ok = ok && e.value <= 1.0 / s_max + o.tol.flat_rounding && e.error_radius == 1.0 / s_max;
        ok = ok && b.value <= 1.0 / s_max && e.value < prev;
        prev = e.value;
        d += fmt("s_max %g: ", s_max) + fmt("%.3g / ", e.value) + fmt("%.3g; ", b.value);
    }
    return {2, "flat case", ok, d, 0.0};
}

inline Row circle(const Options& o) {
    bool ok = true;
    double worst = 0.0, slowest = 0.0;
    for (double a : {1.0, 2.0, 3.0}) {
        const auto t0 = clock::now();
        const auto c = circle_curvature(make_constant_profile(-a * a), 10.0, 1e-12);
        slowest = std::max(slowest, since(t0));
        for (std::size_t i = 0; i < c.r.size(); ++i) {
            const double r = c.r[i];
            if (r < 1e-3 || r > 10.0) continue;
            const double exact = a / std::tanh(a * r);
            worst = std::max(worst, std::abs(c.kappa[i] - exact) / exact);
        }
    }
    ok = worst <= o.tol.circle_rel && slowest < o.tol.circle_seconds;
    return {3, "circle curvature closed form", ok, fmt("max rel err %.3g, slowest %.3f s", worst, slowest), slowest};
}

// Random profiles with K in [-4, -0.25] and their deep reference values.
struct RandomCase {
    CurvatureProfile profile;
    double reference;
};

inline std::vector<RandomCase> random_cases(int count, std::uint64_t seed_base, double k_lo, double k_hi) {
    std::vector<RandomCase> out;
    for (int i = 0; i < count; ++i) {
        auto p = make_random_smooth_profile(seed_base + static_cast<std::uint64_t>(i), kProfileDepth, k_lo, k_hi);
        const double ref = shooting_rung(p, kProfileDepth, 1e-13);
        out.push_back({std::move(p), ref});
    }
    return out;
}

inline Row monotone(const Options& o, const std::vector<RandomCase>& cases) {
    // Deep rungs sit within roundoff of the reference, so strict positivity
    // is checked down to ladder_slack.
    std::size_t violations = 0, rungs = 0;
    double worst_low = std::numeric_limits<double>::infinity(), worst_ratio = 0.0;
    for (const auto& c : cases) {
        const auto e = kcrit_shooting(c.profile, kLadderDepth);
        for (const auto& [s, k] : e.ladder) {
            ++rungs;
            const double diff = k - c.reference;
            worst_low = std::min(worst_low, diff);
            worst_ratio = std::max(worst_ratio, diff * s);
            if (!(diff > -o.tol.ladder_slack) || diff > 1.0 / s + o.tol.ladder_slack) ++violations;
        }
    }
    return {4, "monotone approximation", violations == 0,
            std::to_string(violations) + " violations over " + std::to_string(rungs) + " rungs" +
                fmt(", min diff %.3g, max s*diff %.3g", worst_low, worst_ratio),
            0.0};
}

inline Row sandwich(const Options& o, const std::vector<RandomCase>& cases) {
    std::size_t violations = 0;
    for (const auto& c : cases) {
        const double lo = std::sqrt(-c.profile.K0()), hi = std::sqrt(-c.profile.K1());
        for (const auto& e : {kcrit_shooting(c.profile, kLadderDepth), kcrit_bounded_backward(c.profile, kLadderDepth)}) {
            const double slack = e.error_radius + o.tol.sandwich_slack;
            if (e.value < lo - slack || e.value > hi + slack) ++violations;
        }
    }
    return {5, "sandwich bounds", violations == 0,
            std::to_string(violations) + " violations over " + std::to_string(2 * cases.size()) + " estimates", 0.0};
}

inline Row thresholds(const Options& o) {
    const double a = circle_radius_threshold(-1.0, -4.0);
    const double b = circle_radius_threshold(0.0, -1.0);
    const double c = circle_radius_threshold(-1.0, -1.0);
    const bool ok = std::abs(a - 0.5 * std::log(3.0)) <= o.tol.threshold_abs && std::abs(a - 0.549306) < 1e-6 &&
                    b == 1.0 && std::isinf(c) && c > 0;
    return {6, "circle threshold regimes", ok, fmt("%.12f, ", a) + fmt("%.17g, ", b) + io::format_double(c), 0.0};
}

inline Row mixed(const Options& o) {
    const auto t0 = clock::now();
    std::mt19937_64 rng(20240601);
    double worst = 0.0;
    std::size_t samples = 0;
    for (int i = 0; i < 20; ++i) {
        const auto pair = random_hyperbolic_pair(rng, 0.1);
        const auto rep = check_mixed_bound(pair, 1000, o.threads);
        worst = std::max(worst, rep.max_ratio);
        samples += rep.rows.size();
    }
    const double secs = since(t0);
    return {7, "mixed-derivative bound", worst <= 1.0 + o.tol.mixed_slack && secs < o.tol.mixed_seconds,
            fmt("max |dst| phi / 2 = %.6f", worst) + " over " + std::to_string(samples) + fmt(" samples, %.2f s", secs),
            secs};
}

inline Row pure(const Options& o) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    std::size_t rows = 0, failures = 0;
    for (int kind = 0; kind < 3; ++kind) {
        for (int rep = 0; rep < 2; ++rep) {
            auto c1 = random_hyperbolic_curve(rng, 0.0, 1.0);
            const double dir = 2.0 * std::numbers::pi * u(rng);
            const Vec2 at = hyperbolic::geodesic({0.0, 1.0}, {std::cos(dir), std::sin(dir)}, 2.0 + 2.0 * u(rng));
            const double th = 2.0 * std::numbers::pi * u(rng);
            ParamCurve c2 = kind == 0   ? curves::hyperbolic_geodesic(at.x, at.y, th, -0.7, 0.7)
                            : kind == 1 ? curves::hyperbolic_circle(0.8, at.x, at.y, th, 0.0, 1.4)
                                        : curves::horocycle(at.x, at.y, th, -0.7, 0.7);
            if (sampled_min_distance(c1, c2, SurfaceModel::hyperbolic_plane) < 0.2) {
                --rep;
                continue;
            }
            const auto pr = make_model_pair(std::move(c1), std::move(c2), 0.1);
            const auto r = check_pure_second(pr, 500, o.threads, o.tol.pure_abs);
            worst = std::max(worst, r.max_error);
            rows += r.rows.size();
            failures += r.failures;
        }
    }
    return {8, "pure-second formula", failures == 0 && rows >= 1000,
            fmt("max |fd - formula| = %.3g", worst) + " over " + std::to_string(rows) + " samples", 0.0};
}

inline Row bessel(const Options& o) {
    double worst = 0.0;
    std::size_t count = 0;
    const WeightWindow b = make_unit_window(-1e300, 1e300);
    for (double rho : {1.0, 0.5}) {
        const auto c = curves::circle({0.0, 0.0}, rho);
        std::vector<LatticeVec> ms;
        for (long k = 1; k <= 500; ++k) ms.push_back({k, 0});
        for (long k = 1; k * std::numbers::sqrt2 <= 500.0; ++k) ms.push_back({k, k});
        std::vector<double> errs(ms.size());
        parallel_for(ms.size(), o.threads, [&](std::size_t i) {
            const double lam = std::hypot(static_cast<double>(ms[i].x), static_cast<double>(ms[i].y));
            const double exact = 2.0 * std::numbers::pi * rho * bessel_j0(lam * rho);
            errs[i] = std::abs(oscillatory_integral(c, b, ms[i]).value - exact) / std::abs(exact);
        });
        for (double e : errs) worst = std::max(worst, e);
        count += ms.size();
    }
    return {9, "Bessel oracle", worst <= o.tol.bessel_rel,
            fmt("max rel err %.3g over ", worst) + std::to_string(count) + " integrals", 0.0};
}

inline Row decay(const Options& o) {
    const auto t0 = clock::now();
    const auto c = curves::circle({0.0, 0.0}, 1.0);
    const auto b = make_unit_window(0.0, 2.0 * std::numbers::pi);
    std::vector<long> ns;
    for (long l = 100; l <= 1000; ++l) ns.push_back(l * l);
    const auto fit = decay_scan(c, b, ns, o.threads);
    const double secs = since(t0);
    const bool ok = std::abs(fit.slope - o.tol.decay_center) <= o.tol.decay_halfwidth && secs < o.tol.decay_seconds;
    return {10, "torus decay", ok,
            fmt("slope %.4f", fit.slope) + fmt(" (residual %.3f)", fit.residual) + " over " +
                std::to_string(fit.points.size()) + fmt(" points, %.1f s", secs),
            secs};
}

inline Row saturation(const Options& o) {
    const auto b = make_bump_window(0.5, 0.5);
    const auto flat = segment_saturation({1.0, 0.0}, b, 50);
    double worst_exact = 0.0;
    for (const auto& r : flat.rows) worst_exact = std::max(worst_exact, std::abs(r.magnitude - flat.window_mass));
    const auto half = segment_saturation({2.0, 1.0}, b, 50);
    const double rel = std::abs(half.rows.back().magnitude - half.window_mass) / half.window_mass;
    const bool ok = worst_exact <= o.tol.saturation_exact * flat.window_mass && rel <= o.tol.saturation_frac;
    return {11, "segment saturation", ok,
            fmt("direction (1,0) max dev %.3g", worst_exact) + fmt(", slope 1/2 deepest rel dev %.3g", rel), 0.0};
}

inline Row zonal(const Options& o) {
    double lowest = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= 200; ++j) lowest = std::min(lowest, std::abs(zonal_great_circle(2 * j)));
    const double last = std::abs(zonal_great_circle(400));
    const bool ok = lowest >= o.tol.zonal_floor && std::abs(last - 2.0) <= o.tol.zonal_frac * 2.0;
    return {12, "sphere non-decay", ok, fmt("min |Z(2j)| = %.6f, |Z(400)| = %.8f", lowest, last), 0.0};
}

inline Row kuznecov(const Options& o) {
    const auto c = curves::circle({0.0, 0.0}, 1.0);
    const auto b = make_unit_window(0.0, 2.0 * std::numbers::pi);
    const auto sw = kuznecov_sweep(c, b, {200, 400, 600, 800, 1000}, {o.threads, false});
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    std::string d;
    for (const auto& p : sw.points) {
        const double r = p.sum / p.lambda;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        d += fmt("%.4f ", r);
    }
    return {13, "Kuznecov linearity", hi / lo <= 1.0 + o.tol.kuznecov_spread,
            "sum/Lambda = " + d + fmt("(max/min %.4f, probe err %.2g)", hi / lo, sw.probe_error), 0.0};
}

inline Row cross(const Options&) {
    std::size_t failures = 0;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto p = make_random_smooth_profile(9000 + static_cast<std::uint64_t>(i), kLadderDepth, -4.0, -1.0);
        try {
            const auto rep = kcrit_cross_validate(p, kLadderDepth);
            worst = std::max(worst, rep.gap / rep.combined_radius);
        } catch (const DiscrepancyError&) {
            ++failures;
        }
    }
    return {14, "cross-method agreement", failures == 0,
            std::to_string(failures) + " failures over 100 profiles" + fmt(", max gap/radii %.3g", worst), 0.0};
}

}  // namespace detail

inline const std::vector<std::string>& criterion_names() {
    static const std::vector<std::string> n{"horocycle constant",     "flat case",
                                            "circle curvature closed form", "monotone approximation",
                                            "sandwich bounds",        "circle threshold regimes",
                                            "mixed-derivative bound", "pure-second formula",
                                            "Bessel oracle",          "torus decay",
                                            "segment saturation",     "sphere non-decay",
                                            "Kuznecov linearity",     "cross-method agreement"};
    return n;
}

// Runs the selected criteria (all when `ids` is empty). Exceptions become
// failing rows so one broken criterion never hides the others.
inline std::vector<Row> run(const Options& o, const std::vector<int>& ids = {},
                            const std::function<void(const Row&)>& on_row = {}) {
    std::vector<detail::RandomCase> cases;
    auto want = [&](int id) { return ids.empty() || std::find(ids.begin(), ids.end(), id) != ids.end(); };
    std::vector<Row> rows;
    for (int id = 1; id <= 14; ++id) {
        if (!want(id)) continue;
        const auto t0 = detail::clock::now();
        Row row;
        try {
            if ((id == 4 || id == 5) && cases.empty()) cases = detail::random_cases(50, 4000, -4.0, -0.25);
            switch (id) {
                case 1: row = detail::horocycle(o); break;
                case 2: row = detail::flat(o); break;
                case 3: row = detail::circle(o); break;
                case 4: row = detail::monotone(o, cases); break;
                case 5: row = detail::sandwich(o, cases); break;
                case 6: row = detail::thresholds(o); break;
                case 7: row = detail::mixed(o); break;
                case 8: row = detail::pure(o); break;
                case 9: row = detail::bessel(o); break;
                case 10: row = detail::decay(o); break;
                case 11: row = detail::saturation(o); break;
                case 12: row = detail::zonal(o); break;
                case 13: row = detail::kuznecov(o); break;
                default: row = detail::cross(o); break;
            }
        } catch (const std::exception& e) {
            row = {id, criterion_names()[static_cast<std::size_t>(id - 1)], false, std::string("exception: ") + e.what(), 0.0};
        }
        row.seconds = detail::since(t0);
        if (on_row) on_row(row);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string format_row(const Row& r) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "[%s] %2d %-30s (%.2f s) ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.seconds);
    return buf + r.detail;
}

}  // namespace curvlab::acceptance
