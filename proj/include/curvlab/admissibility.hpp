#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "curvlab/curvature_profiles.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/io.hpp"
#include "curvlab/kcrit.hpp"
#include "curvlab/numerics.hpp"

namespace curvlab {

enum class Verdict { admissible, violated, indeterminate };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::admissible: return "admissible";
        case Verdict::violated: return "violated";
        case Verdict::indeterminate: return "indeterminate";
    }
    return "?";
}

struct AdmissibilityRow {
    double s = 0.0;
    double kappa_gamma = 0.0;
    double kplus = 0.0, kminus = 0.0;
    double radius_plus = 0.0, radius_minus = 0.0;
    double margin = 0.0;
    Verdict verdict = Verdict::admissible;
};

struct AdmissibilityReport {
    std::vector<AdmissibilityRow> rows;
    Verdict verdict = Verdict::admissible;

    std::vector<double> violated_at() const {
        std::vector<double> out;
        for (const auto& r : rows)
            if (r.verdict == Verdict::violated) out.push_back(r.s);
        return out;
    }

    std::string to_csv() const {
        io::CsvTable t({"s", "kappa_gamma", "kplus", "kminus", "margin"});
        for (const auto& r : rows) t.add_numbers({r.s, r.kappa_gamma, r.kplus, r.kminus, r.margin});
        return t.str();
    }

    nlohmann::json envelope() const {
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& r : rows) worst = std::min(worst, r.margin);
        return {{"verdict", to_string(verdict)}, {"samples", rows.size()}, {"min_margin", worst},
                {"violated_at", violated_at()}};
    }
};

// Curvature along the backward normal rays at gamma(s): first for
// +gamma'^perp, second for -gamma'^perp.
using RayProfiles = std::function<std::pair<CurvatureProfile, CurvatureProfile>(double)>;

inline RayProfiles constant_ray_profiles(double K) {
    const auto p = make_constant_profile(K);
    return [p](double) { return std::pair{p, p}; };
}

struct AdmissibilityOptions {
    double s_max = 20.0;
    int n_samples = 16;
    double bracket_tol = 1e-10;
    // Margins at or below this count as equality, hence a violation.
    double equality_tol = 1e-8;
    unsigned threads = 1;
};

// Chebyshev nodes of the first kind on [a, b] plus both endpoints, ascending.
inline std::vector<double> chebyshev_samples(double a, double b, int n) {
    std::vector<double> s{a, b};
    for (int k = 0; k < n; ++k)
        s.push_back(0.5 * (a + b) + 0.5 * (b - a) * std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * n)));
    std::sort(s.begin(), s.end());
    return s;
}

inline AdmissibilityReport check_curve(const ParamCurve& curve, const WeightWindow& window,
                                       const RayProfiles& ray_profiles, const AdmissibilityOptions& opt = {}) {
    if (curve.surface == SurfaceModel::round_sphere)
        throw InvalidArgument("check_curve: the critical curvature is defined for nonpositive curvature only");
    if (!curve.has_curvature()) throw InvalidArgument("check_curve: curve has no geodesic curvature");
    if (opt.n_samples < 16) throw InvalidArgument("check_curve: n_samples must be >= 16");
    const double a = std::max(window.lo, curve.s_min), b = std::min(window.hi, curve.s_max);
    if (!(a < b)) throw DomainError("check_curve: window support misses the curve domain");

    const auto samples = chebyshev_samples(a, b, opt.n_samples);
    std::vector<AdmissibilityRow> rows(samples.size());
    parallel_for(samples.size(), opt.threads, [&](std::size_t i) {
        AdmissibilityRow& row = rows[i];
        row.s = samples[i];
        try {
            row.kappa_gamma = curve.curvature(row.s);
            const auto [pp, pm] = ray_profiles(row.s);
            const auto ep = kcrit_bounded_backward(pp, opt.s_max, opt.bracket_tol);
            const auto em = kcrit_bounded_backward(pm, opt.s_max, opt.bracket_tol);
            row.kplus = ep.value;
            row.kminus = em.value;
            row.radius_plus = ep.error_radius;
            row.radius_minus = em.error_radius;
        } catch (const Error& e) {
            throw Error(e.kind(), "at sample s = " + io::format_double(row.s) + ": " + e.what());
        }
        row.margin = std::min(std::abs(row.kappa_gamma - row.kplus), std::abs(row.kappa_gamma - row.kminus));
        if (row.margin <= opt.equality_tol)
            row.verdict = Verdict::violated;
        else if (row.margin <= row.radius_plus + row.radius_minus)
            row.verdict = Verdict::indeterminate;
        else
            row.verdict = Verdict::admissible;
    });

    AdmissibilityReport rep;
    rep.rows = std::move(rows);
    bool any_bad = false, any_unsure = false;
    for (const auto& r : rep.rows) {
        any_bad = any_bad || r.verdict == Verdict::violated;
        any_unsure = any_unsure || r.verdict == Verdict::indeterminate;
    }
    rep.verdict = any_bad ? Verdict::violated : any_unsure ? Verdict::indeterminate : Verdict::admissible;
    return rep;
}

// ---------------------------------------------------------------------------

enum class BandVerdict { admissible_by_band, inconclusive };

inline const char* to_string(BandVerdict v) {
    return v == BandVerdict::admissible_by_band ? "admissible-by-band" : "inconclusive";
}

inline void check_curvature_bounds(double K0, double K1, const char* who) {
    if (!std::isfinite(K0) || !std::isfinite(K1) || K0 > 0.0 || K1 > K0)
        throw InvalidArgument(std::string(who) + ": need 0 >= K0 >= K1");
}

inline BandVerdict criterion_band(double kappa_min, double kappa_max, double K0, double K1) {
    check_curvature_bounds(K0, K1, "criterion_band");
    if (!std::isfinite(kappa_min) || !std::isfinite(kappa_max) || kappa_min < 0.0 || kappa_min > kappa_max)
        throw InvalidArgument("criterion_band: malformed curvature range");
    return (kappa_max < std::sqrt(-K0) || kappa_min > std::sqrt(-K1)) ? BandVerdict::admissible_by_band
                                                                       : BandVerdict::inconclusive;
}

// Geodesic circles with radius below this bound pass the band criterion.
inline double circle_radius_threshold(double K0, double K1) {
    check_curvature_bounds(K0, K1, "circle_radius_threshold");
    if (K1 == 0.0) throw InvalidArgument("circle_radius_threshold: unsupported for K1 = 0");
    if (K0 == K1) return std::numeric_limits<double>::infinity();
    const double b = std::sqrt(-K1);
    if (K0 == 0.0) return 1.0 / b;
    const double a = std::sqrt(-K0);
    return std::log((b + a) / (b - a)) / (2.0 * a);
}

}  // namespace curvlab
