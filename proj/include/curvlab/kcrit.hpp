#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "curvlab/curvature_profiles.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/ode.hpp"

namespace curvlab {

enum class KcritMethod { shooting_family, bounded_backward };

inline const char* to_string(KcritMethod m) {
    return m == KcritMethod::shooting_family ? "shooting-family" : "bounded-backward";
}

struct CriticalCurvatureEstimate {
    double value = 0.0;
    double error_radius = 0.0;
    KcritMethod method = KcritMethod::shooting_family;
    double s_used = 0.0;
    // Shooting: (s, kappa_s(0)) per rung. Empty for bounded-backward.
    std::vector<std::pair<double, double>> ladder;
    // Advisory only: |kappa| difference between the last two rungs, or the
    // final bisection bracket width.
    double cauchy_gap = 0.0;
    double bracket_lo = 0.0, bracket_hi = 0.0;
    int iterations = 0;
};

inline nlohmann::json to_json(const CriticalCurvatureEstimate& e) {
    nlohmann::json ladder = nlohmann::json::array();
    for (const auto& [s, k] : e.ladder) ladder.push_back({s, k});
    return {{"kcrit", e.value}, {"error", e.error_radius}, {"method", to_string(e.method)},
            {"s_used", e.s_used}, {"ladder", ladder}};
}

namespace detail {

inline void check_kcrit_inputs(const CurvatureProfile& p, double s_max, const char* who) {
    if (!(s_max >= 1.0) || !std::isfinite(s_max)) throw InvalidArgument(std::string(who) + ": s_max must be >= 1");
    require_covered(p, -s_max, 0.0, who);
}

}  // namespace detail

// Depths 1, 2, 4, ... below s_max, then s_max.
inline std::vector<double> kcrit_ladder(double s_max) {
    std::vector<double> out;
    for (double s = 1.0; s < s_max; s *= 2.0) out.push_back(s);
    out.push_back(s_max);
    return out;
}

// kappa_s(0) = h_s'(0)/h_s(0) where h_s(-s) = 0.
inline double shooting_rung(const CurvatureProfile& profile, double s, double tol) {
    const auto js = solve_jacobi(profile, -s, 0.0, 0.0, 1.0, tol);
    if (!(js.h.back() > 0.0))
        throw NonpositivityViolation("kcrit_shooting: h_s(0) <= 0 at depth " + std::to_string(s));
    return js.hp.back() / js.h.back();
}

inline CriticalCurvatureEstimate kcrit_shooting(const CurvatureProfile& profile, double s_max, double tol = 1e-12) {
    detail::check_kcrit_inputs(profile, s_max, "kcrit_shooting");
    CriticalCurvatureEstimate est;
    est.method = KcritMethod::shooting_family;
    for (double s : kcrit_ladder(s_max)) est.ladder.emplace_back(s, shooting_rung(profile, s, tol));
    est.value = est.ladder.back().second;
    est.s_used = s_max;
    est.error_radius = 1.0 / s_max;
    if (est.ladder.size() >= 2)
        est.cauchy_gap = std::abs(est.ladder[est.ladder.size() - 2].second - est.value);
    est.iterations = static_cast<int>(est.ladder.size());
    return est;
}

// ---------------------------------------------------------------------------

enum class BackwardClass { above, below };

struct BackwardTrial {
    BackwardClass verdict;
    bool certified;  // left the envelope [sqrt(-K0), sqrt(-K1)] before -s_max
    double exit_r;   // where it left, or -s_max
};

// Integrate u' = -K - u^2 from 0 down to -s_max starting at u0. The critical
// trajectory stays inside [sqrt(-K0), sqrt(-K1)], so leaving that envelope
// decides the side; otherwise compare u(-s_max) with the envelope midpoint.
inline BackwardTrial classify_backward(const CurvatureProfile& profile, double s_max, double u0, double tol) {
    const double lo = std::sqrt(-profile.K0()), hi = std::sqrt(-profile.K1());
    if (u0 > hi) return {BackwardClass::above, true, 0.0};
    if (u0 < lo) return {BackwardClass::below, true, 0.0};
    StepperOptions opt{tol, tol};
    const auto tr = integrate<1>(detail::riccati_rhs(profile), 0.0, -s_max, State<1>{u0}, opt, profile.breakpoints(),
                                 [lo, hi](const Trajectory<1>& t) {
                                     const double u = t.y.back()[0];
                                     return u <= hi && u >= lo;
                                 });
    const double u = tr.y.back()[0];
    if (u > hi) return {BackwardClass::above, true, tr.t.back()};
    if (u < lo) return {BackwardClass::below, true, tr.t.back()};
    return {u >= 0.5 * (lo + hi) ? BackwardClass::above : BackwardClass::below, false, -s_max};
}

// Width of the band every envelope-trapped trajectory occupies at r = 0:
// forward flow from the two envelope edges at -s_max.
inline double backward_envelope_spread(const CurvatureProfile& profile, double s_max, double tol) {
    const double lo = std::sqrt(-profile.K0()), hi = std::sqrt(-profile.K1());
    if (lo == hi) return 0.0;
    StepperOptions opt{tol, tol};
    const auto top = integrate<1>(detail::riccati_rhs(profile), -s_max, 0.0, State<1>{hi}, opt, profile.breakpoints());
    const auto bot = integrate<1>(detail::riccati_rhs(profile), -s_max, 0.0, State<1>{lo}, opt, profile.breakpoints());
    return std::max(0.0, top.y.back()[0] - bot.y.back()[0]);
}

inline CriticalCurvatureEstimate kcrit_bounded_backward(const CurvatureProfile& profile, double s_max,
                                                        double bracket_tol, double a, double b, double tol = 1e-12) {
    detail::check_kcrit_inputs(profile, s_max, "kcrit_bounded_backward");
    if (!(bracket_tol > 0.0)) throw InvalidArgument("kcrit_bounded_backward: bracket_tol must be positive");
    if (!(a < b)) throw InvalidArgument("kcrit_bounded_backward: empty bracket");
    const auto ca = classify_backward(profile, s_max, a, tol);
    const auto cb = classify_backward(profile, s_max, b, tol);
    if (ca.verdict != BackwardClass::below || cb.verdict != BackwardClass::above) {
        auto name = [](BackwardClass c) { return c == BackwardClass::above ? "above" : "below"; };
        throw BracketError("kcrit_bounded_backward: no sign change on [" + io::format_double(a) + ", " +
                           io::format_double(b) + "]: " + name(ca.verdict) + " / " + name(cb.verdict));
    }
    CriticalCurvatureEstimate est;
    est.method = KcritMethod::bounded_backward;
    est.s_used = s_max;
    while (b - a > bracket_tol) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        if (classify_backward(profile, s_max, m, tol).verdict == BackwardClass::above)
            b = m;
        else
            a = m;
        ++est.iterations;
    }
    // k is nonnegative; the padded bracket may straddle 0 in the flat case.
    est.value = std::max(0.0, 0.5 * (a + b));
    est.bracket_lo = a;
    est.bracket_hi = b;
    est.cauchy_gap = b - a;
    est.error_radius = (b - a) + backward_envelope_spread(profile, s_max, tol);
    return est;
}

inline CriticalCurvatureEstimate kcrit_bounded_backward(const CurvatureProfile& profile, double s_max,
                                                        double bracket_tol = 1e-10, double tol = 1e-12) {
    const double pad = std::max(1e-3, 4.0 * bracket_tol);
    return kcrit_bounded_backward(profile, s_max, bracket_tol, std::sqrt(-profile.K0()) - pad,
                                  std::sqrt(-profile.K1()) + pad, tol);
}

struct CrossValidationReport {
    CriticalCurvatureEstimate shooting;
    CriticalCurvatureEstimate backward;
    double gap = 0.0;
    double combined_radius = 0.0;
};

inline CrossValidationReport kcrit_cross_validate(const CurvatureProfile& profile, double s_max,
                                                  double bracket_tol = 1e-10) {
    CrossValidationReport rep{kcrit_shooting(profile, s_max), kcrit_bounded_backward(profile, s_max, bracket_tol)};
    rep.gap = std::abs(rep.shooting.value - rep.backward.value);
    rep.combined_radius = rep.shooting.error_radius + rep.backward.error_radius;
    if (rep.gap > rep.combined_radius)
        throw DiscrepancyError("kcrit methods disagree: gap " + io::format_double(rep.gap) + " exceeds radii " +
                               io::format_double(rep.combined_radius));
    return rep;
}

}  // namespace curvlab
