#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curvlab/curvature_profiles.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/io.hpp"

namespace curvlab {

template <std::size_t N>
using State = std::array<double, N>;

struct StepperOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 20'000'000;
};

// Accepted nodes of an integration together with the derivative at each
// node; evaluation between nodes is cubic Hermite. The grid is monotone in
// the direction of integration.
template <std::size_t N>
struct Trajectory {
    std::vector<double> t;
    std::vector<State<N>> y;
    std::vector<State<N>> f;
    // Slope arriving at each node from the previous one; differs from f only
    // at stops where the right-hand side jumps.
    std::vector<State<N>> f_in;

    std::size_t size() const { return t.size(); }
    bool ascending() const { return t.size() < 2 || t.back() > t.front(); }
    double t_lo() const { return std::min(t.front(), t.back()); }
    double t_hi() const { return std::max(t.front(), t.back()); }

    // Index i with the query inside [t_i, t_{i+1}] (in grid order).
    std::size_t segment(double q) const {
        if (t.size() < 2) return 0;
        std::size_t i;
        if (ascending()) {
            const auto it = std::upper_bound(t.begin(), t.end(), q);
            i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
        } else {
            const auto it = std::upper_bound(t.begin(), t.end(), q, [](double a, double b) { return a > b; });
            i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
        }
        return std::min(i, t.size() - 2);
    }

    State<N> value(double q) const { return hermite(q, false); }
    State<N> derivative(double q) const { return hermite(q, true); }

private:
    State<N> hermite(double q, bool deriv) const {
        if (q < t_lo() || q > t_hi())
            throw DomainError("trajectory evaluated at " + std::to_string(q) + " outside its grid");
        if (t.size() == 1) return deriv ? f[0] : y[0];
        const std::size_t i = segment(q);
        const double h = t[i + 1] - t[i];
        const double s = (q - t[i]) / h;
        State<N> out{};
        if (!deriv) {
            const double h00 = (2 * s - 3) * s * s + 1, h10 = ((s - 2) * s + 1) * s;
            const double h01 = (3 - 2 * s) * s * s, h11 = (s - 1) * s * s;
            for (std::size_t k = 0; k < N; ++k)
                out[k] = h00 * y[i][k] + h10 * h * f[i][k] + h01 * y[i + 1][k] + h11 * h * f_in[i + 1][k];
        } else {
            const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
            const double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
            for (std::size_t k = 0; k < N; ++k)
                out[k] = (d00 * y[i][k] + d01 * y[i + 1][k]) / h + d10 * f[i][k] + d11 * f_in[i + 1][k];
        }
        return out;
    }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DP45 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

template <std::size_t N>
double error_norm(const State<N>& err, const State<N>& y0, const State<N>& y1, const StepperOptions& o) {
    double worst = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        const double sc = o.atol + o.rtol * std::max(std::abs(y0[k]), std::abs(y1[k]));
        worst = std::max(worst, std::abs(err[k]) / sc);
    }
    return worst;
}

}  // namespace detail

// Adaptive Dormand-Prince 5(4) integration of y' = rhs(t, y) from t0 to t1
// (either direction). `stops` are points the integrator lands on exactly.
// `observer(traj)` runs after every accepted step and may return false to
// end the integration early.
template <std::size_t N, class Rhs, class Observer>
Trajectory<N> integrate(Rhs&& rhs, double t0, double t1, State<N> y0, const StepperOptions& opt,
                        std::span<const double> stops, Observer&& observer) {
    using detail::DP45;
    if (!(opt.rtol > 0.0) || !(opt.atol > 0.0)) throw InvalidArgument("integrate: tolerances must be positive");
    if (t0 == t1) throw InvalidArgument("integrate: empty interval");
    const double dir = t1 > t0 ? 1.0 : -1.0;

    std::vector<double> targets;
    for (double s : stops)
        if ((s - t0) * dir > 0.0 && (t1 - s) * dir > 0.0) targets.push_back(s);
    targets.push_back(t1);
    std::sort(targets.begin(), targets.end(), [dir](double a, double b) { return a * dir < b * dir; });
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    Trajectory<N> traj;
    State<N> f0 = rhs(t0, y0);
    traj.t.push_back(t0);
    traj.y.push_back(y0);
    traj.f.push_back(f0);
    traj.f_in.push_back(f0);

    auto add = [](const State<N>& a, double c, const State<N>& b) {
        State<N> r;
        for (std::size_t k = 0; k < N; ++k) r[k] = a[k] + c * b[k];
        return r;
    };

    // Initial step (Hairer, Norsett & Wanner, II.4).
    double h;
    {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            const double sc = opt.atol + opt.rtol * std::abs(y0[k]);
            d0 = std::max(d0, std::abs(y0[k]) / sc);
            d1 = std::max(d1, std::abs(f0[k]) / sc);
        }
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, std::abs(t1 - t0));
        const State<N> y1 = add(y0, dir * h0, f0);
        const State<N> f1 = rhs(t0 + dir * h0, y1);
        double d2 = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            const double sc = opt.atol + opt.rtol * std::abs(y0[k]);
            d2 = std::max(d2, std::abs(f1[k] - f0[k]) / sc / h0);
        }
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
        h = std::min({100.0 * h0, h1, opt.max_step});
    }

    double t = t0;
    State<N> y = y0, f = f0;
    std::size_t target_idx = 0;
    std::size_t steps = 0;
    while (target_idx < targets.size()) {
        const double target = targets[target_idx];
        if (++steps > opt.max_steps) throw IntegrationError("integrate: step budget exhausted", t);
        const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
        if (h < min_step) throw IntegrationError("integrate: step size underflow at t = " + std::to_string(t), t);
        bool lands = false;
        double hs = h;
        if (hs >= std::abs(target - t)) {
            hs = std::abs(target - t);
            lands = true;
        }
        const double sh = dir * hs;
        const State<N>& k1 = f;
        State<N> tmp;
        for (std::size_t k = 0; k < N; ++k) tmp[k] = y[k] + sh * DP45::a21 * k1[k];
        const State<N> k2 = rhs(t + DP45::c2 * sh, tmp);
        for (std::size_t k = 0; k < N; ++k) tmp[k] = y[k] + sh * (DP45::a31 * k1[k] + DP45::a32 * k2[k]);
        const State<N> k3 = rhs(t + DP45::c3 * sh, tmp);
        for (std::size_t k = 0; k < N; ++k)
            tmp[k] = y[k] + sh * (DP45::a41 * k1[k] + DP45::a42 * k2[k] + DP45::a43 * k3[k]);
        const State<N> k4 = rhs(t + DP45::c4 * sh, tmp);
        for (std::size_t k = 0; k < N; ++k)
            tmp[k] = y[k] + sh * (DP45::a51 * k1[k] + DP45::a52 * k2[k] + DP45::a53 * k3[k] + DP45::a54 * k4[k]);
        const State<N> k5 = rhs(t + DP45::c5 * sh, tmp);
        for (std::size_t k = 0; k < N; ++k)
            tmp[k] = y[k] + sh * (DP45::a61 * k1[k] + DP45::a62 * k2[k] + DP45::a63 * k3[k] + DP45::a64 * k4[k] +
                                  DP45::a65 * k5[k]);
        const double t_new = lands ? target : t + sh;
        // At an interior stop the closing stages see the side being left.
        const bool at_stop = lands && target_idx + 1 < targets.size();
        const double t_close = at_stop ? std::nextafter(target, t) : t + sh;
        const State<N> k6 = rhs(t_close, tmp);
        State<N> y_new;
        for (std::size_t k = 0; k < N; ++k)
            y_new[k] = y[k] + sh * (DP45::b1 * k1[k] + DP45::b3 * k3[k] + DP45::b4 * k4[k] + DP45::b5 * k5[k] +
                                    DP45::b6 * k6[k]);
        const State<N> k7 = rhs(at_stop ? t_close : t_new, y_new);
        State<N> err;
        for (std::size_t k = 0; k < N; ++k)
            err[k] = sh * (DP45::e1 * k1[k] + DP45::e3 * k3[k] + DP45::e4 * k4[k] + DP45::e5 * k5[k] +
                           DP45::e6 * k6[k] + DP45::e7 * k7[k]);
        double en = detail::error_norm(err, y, y_new, opt);
        bool finite = true;
        for (std::size_t k = 0; k < N; ++k) finite = finite && std::isfinite(y_new[k]);
        if (!finite) en = std::numeric_limits<double>::infinity();

        if (en <= 1.0) {
            t = t_new;
            y = y_new;
            f = at_stop ? rhs(std::nextafter(target, t1), y) : k7;
            traj.t.push_back(t);
            traj.y.push_back(y);
            traj.f.push_back(f);
            traj.f_in.push_back(k7);
            if (lands) ++target_idx;
            const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
            if (lands) {
                h = std::max(h, std::min(hs * factor, opt.max_step));
            } else {
                h = std::min(hs * factor, opt.max_step);
            }
            if (!observer(traj)) break;
        } else {
            const double factor = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.1;
            h = hs * factor;
        }
    }
    return traj;
}

template <std::size_t N, class Rhs>
Trajectory<N> integrate(Rhs&& rhs, double t0, double t1, State<N> y0, const StepperOptions& opt,
                        std::span<const double> stops = {}) {
    return integrate<N>(std::forward<Rhs>(rhs), t0, t1, y0, opt, stops, [](const Trajectory<N>&) { return true; });
}

// ---------------------------------------------------------------------------
// Jacobi equation h'' + K h = 0 along a ray.

struct JacobiSolution {
    std::vector<double> r, h, hp;
    CurvatureProfile profile;
    Trajectory<2> trajectory;

    double h_at(double x) const { return trajectory.value(x)[0]; }
    double hp_at(double x) const { return trajectory.value(x)[1]; }

    // max over interior nodes of |h'' + K h| / (1 + |h|), with h'' taken as a
    // central difference of the reconstructed h'. Nodes on curvature
    // breakpoints are skipped since h'' jumps there.
    double max_residual() const {
        double worst = 0.0;
        const auto& bps = profile.breakpoints();
        for (std::size_t i = 1; i + 1 < r.size(); ++i) {
            if (std::find(bps.begin(), bps.end(), r[i]) != bps.end()) continue;
            const double gap = std::min(std::abs(r[i + 1] - r[i]), std::abs(r[i] - r[i - 1]));
            const double d = std::min(1e-6 * std::max(1.0, std::abs(r[i])), 0.25 * gap);
            const double hpp = (hp_at(r[i] + d) - hp_at(r[i] - d)) / (2.0 * d);
            worst = std::max(worst, std::abs(hpp + profile.eval(r[i]) * h[i]) / (1.0 + std::abs(h[i])));
        }
        return worst;
    }

    // Convexity: nonnegative endpoint values force h >= 0 on the grid.
    bool nonnegativity_holds() const {
        if (h.front() < 0.0 || h.back() < 0.0) return true;
        return std::all_of(h.begin(), h.end(), [](double v) { return v >= 0.0; });
    }

    std::string to_csv() const {
        io::CsvTable t({"r", "h", "hp"});
        for (std::size_t i = 0; i < r.size(); ++i) t.add_numbers({r[i], h[i], hp[i]});
        return t.str();
    }
};

namespace detail {

inline void require_covered(const CurvatureProfile& p, double a, double b, const char* who) {
    if (!p.covers(a, b))
        throw DomainError(std::string(who) + ": profile domain [" + std::to_string(p.lo()) + ", " +
                          std::to_string(p.hi()) + "] does not cover [" + std::to_string(std::min(a, b)) + ", " +
                          std::to_string(std::max(a, b)) + "]");
}

inline auto jacobi_rhs(const CurvatureProfile& profile) {
    return [&profile](double r, const State<2>& y) { return State<2>{y[1], -profile.eval(r) * y[0]}; };
}

}  // namespace detail

inline JacobiSolution solve_jacobi(const CurvatureProfile& profile, double r_start, double r_end, double h0, double hp0,
                                   double tol, std::span<const double> extra_stops = {}) {
    if (r_start == r_end) throw InvalidArgument("solve_jacobi: r_start == r_end");
    if (!(tol > 0.0)) throw InvalidArgument("solve_jacobi: tol must be positive");
    detail::require_covered(profile, r_start, r_end, "solve_jacobi");
    std::vector<double> stops(profile.breakpoints().begin(), profile.breakpoints().end());
    stops.insert(stops.end(), extra_stops.begin(), extra_stops.end());
    StepperOptions opt{tol, tol};
    JacobiSolution sol{{}, {}, {}, profile,
                       integrate<2>(detail::jacobi_rhs(profile), r_start, r_end, State<2>{h0, hp0}, opt, stops)};
    const auto& tr = sol.trajectory;
    sol.r = tr.t;
    for (const auto& s : tr.y) {
        sol.h.push_back(s[0]);
        sol.hp.push_back(s[1]);
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Curvature of geodesic circles about zeta(0), via kappa = h'/h with
// h(0) = 0, h'(0) = 1.

struct CircleCurvatureCurve {
    std::vector<double> r;
    std::vector<double> kappa;
    JacobiSolution jacobi;

    double kappa_at(double x) const {
        if (!(x > 0.0)) throw DomainError("circle curvature is defined for r > 0 only");
        const auto v = jacobi.trajectory.value(x);
        return v[1] / v[0];
    }
};

// Points 1e-4 * 10^(k/8) below r_max, plus r_max itself.
inline std::vector<double> circle_output_grid(double r_max) {
    std::vector<double> g;
    for (int k = 0;; ++k) {
        const double x = 1e-4 * std::pow(10.0, k / 8.0);
        if (x >= r_max) break;
        g.push_back(x);
    }
    g.push_back(r_max);
    return g;
}

inline CircleCurvatureCurve circle_curvature(const CurvatureProfile& profile, double r_max, double tol) {
    if (!(r_max > 0.0)) throw InvalidArgument("circle_curvature: r_max must be positive");
    const auto grid = circle_output_grid(r_max);
    CircleCurvatureCurve out{{}, {}, solve_jacobi(profile, 0.0, r_max, 0.0, 1.0, tol, grid)};
    const JacobiSolution& js = out.jacobi;
    for (std::size_t i = 1; i < js.r.size(); ++i) {
        if (!(js.h[i] > 0.0))
            throw NonpositivityViolation("circle_curvature: h vanished at r = " + std::to_string(js.r[i]) +
                                         "; impossible when K <= 0");
        out.r.push_back(js.r[i]);
        out.kappa.push_back(js.hp[i] / js.h[i]);
    }
    return out;
}

// Small-radius expansion kappa(r) = 1/r - K(0) r / 3 + O(r^2)... used only to
// cross-check the regularised solution near the singular start.
inline double circle_curvature_series(double k_at_center, double r) { return 1.0 / r - k_at_center * r / 3.0; }

// ---------------------------------------------------------------------------
// Riccati equation u' = -K - u^2.

inline constexpr double kBlowupThreshold = 1e8;
inline constexpr double kBlowupResolution = 1e-10;

struct RiccatiTrajectory {
    std::vector<double> r, u;
    bool blew_up = false;
    double blowup_location = std::numeric_limits<double>::quiet_NaN();
    int blowup_sign = 0;

    std::string to_csv() const {
        io::CsvTable t({"r", "u"});
        for (std::size_t i = 0; i < r.size(); ++i) t.add_numbers({r[i], u[i]});
        return t.str();
    }
};

namespace detail {

inline auto riccati_rhs(const CurvatureProfile& profile) {
    return [&profile](double r, const State<1>& y) { return State<1>{-profile.eval(r) - y[0] * y[0]}; };
}

// Locate |u| = threshold inside the last step by bisection on the dense output.
inline double locate_crossing(const Trajectory<1>& tr, double threshold) {
    const std::size_t n = tr.size();
    double a = tr.t[n - 2], b = tr.t[n - 1];
    while (std::abs(b - a) > kBlowupResolution) {
        const double m = 0.5 * (a + b);
        if (std::abs(tr.value(m)[0]) >= threshold)
            b = m;
        else
            a = m;
        if (m == a && m == b) break;
    }
    return 0.5 * (a + b);
}

}  // namespace detail

inline RiccatiTrajectory solve_riccati(const CurvatureProfile& profile, double r_start, double r_end, double u0,
                                       double tol) {
    if (!std::isfinite(u0)) throw InvalidArgument("solve_riccati: u0 must be finite");
    if (!(tol > 0.0)) throw InvalidArgument("solve_riccati: tol must be positive");
    detail::require_covered(profile, r_start, r_end, "solve_riccati");
    RiccatiTrajectory out;
    if (std::abs(u0) > kBlowupThreshold) {
        out.r = {r_start};
        out.u = {u0};
        out.blew_up = true;
        out.blowup_location = r_start;
        out.blowup_sign = u0 > 0 ? 1 : -1;
        return out;
    }
    StepperOptions opt{tol, tol};
    auto tr = integrate<1>(detail::riccati_rhs(profile), r_start, r_end, State<1>{u0}, opt, profile.breakpoints(),
                           [](const Trajectory<1>& t) { return std::abs(t.y.back()[0]) <= kBlowupThreshold; });
    for (std::size_t i = 0; i < tr.size(); ++i) {
        out.r.push_back(tr.t[i]);
        out.u.push_back(tr.y[i][0]);
    }
    if (std::abs(tr.y.back()[0]) > kBlowupThreshold) {
        out.blew_up = true;
        out.blowup_sign = tr.y.back()[0] > 0 ? 1 : -1;
        out.blowup_location = detail::locate_crossing(tr, kBlowupThreshold);
    }
    return out;
}

}  // namespace curvlab
