#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "curvlab/curvature_profiles.hpp"
#include "curvlab/curves.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/geometry.hpp"
#include "curvlab/io.hpp"
#include "curvlab/numerics.hpp"

namespace curvlab {

struct PhaseEvaluation {
    double s = 0.0, t = 0.0;
    double phi = 0.0;
    double ds_phi = 0.0, dt_phi = 0.0;
    double dss_phi = 0.0, dst_phi = 0.0, dtt_phi = 0.0;
    double theta = 0.0;         // angle at curve1(s), from the connecting geodesic
    double theta_t = 0.0;       // same at curve2(t)
    double circle_kappa = 0.0;  // geodesic curvature of the circle of radius phi
};

struct ModelCurvePair {
    SurfaceModel surface;
    ParamCurve curve1;
    ParamCurve curve2;
    double margin;

    double phi(double s, double t) const { return model_distance(surface, curve1.position(s), curve2.position(t)); }
};

// Smallest distance over an n x n grid of the two domains.
inline double sampled_min_distance(const ParamCurve& c1, const ParamCurve& c2, SurfaceModel m, int n = 64) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double s = c1.s_min + (c1.s_max - c1.s_min) * i / (n - 1);
        const Vec2 p = c1.position(s);
        for (int j = 0; j < n; ++j) {
            const double t = c2.s_min + (c2.s_max - c2.s_min) * j / (n - 1);
            best = std::min(best, model_distance(m, p, c2.position(t)));
        }
    }
    return best;
}

inline ModelCurvePair make_model_pair(ParamCurve c1, ParamCurve c2, double margin) {
    const SurfaceModel m = c1.surface;
    require_planar_model(m, "make_model_pair");
    if (c2.surface != m) throw InvalidArgument("make_model_pair: curves live on different surfaces");
    if (!(margin > 0.0)) throw InvalidArgument("make_model_pair: margin must be positive");
    const double d = sampled_min_distance(c1, c2, m);
    if (d < margin)
        throw DomainError("make_model_pair: curves come within " + io::format_double(d) + " < margin " +
                          io::format_double(margin));
    return {m, std::move(c1), std::move(c2), margin};
}

namespace detail {

// Central difference with one Richardson level.
template <class F>
double fd1(F&& f, double x, double h) {
    auto d = [&](double k) { return (f(x + k) - f(x - k)) / (2.0 * k); };
    return (4.0 * d(h / 2.0) - d(h)) / 3.0;
}

template <class F>
double fd2(F&& f, double x, double h) {
    const double f0 = f(x);
    auto d = [&](double k) { return (f(x + k) - 2.0 * f0 + f(x - k)) / (k * k); };
    return (4.0 * d(h / 2.0) - d(h)) / 3.0;
}

template <class F>
double fd_mixed(F&& f, double x, double y, double hx, double hy) {
    auto d = [&](double a, double b) {
        return (f(x + a, y + b) - f(x + a, y - b) - f(x - a, y + b) + f(x - a, y - b)) / (4.0 * a * b);
    };
    return (4.0 * d(hx / 2.0, hy / 2.0) - d(hx, hy)) / 3.0;
}

inline double first_step(double x) { return 1e-4 * std::max(1.0, std::abs(x)); }
inline double second_step(double x) { return 1e-3 * std::max(1.0, std::abs(x)); }

// sin of the angle between a curve's unit velocity at p and the connecting
// geodesic from q, in the surface metric.
inline double sin_angle(SurfaceModel m, Vec2 p, Vec2 v, Vec2 q) {
    const double sp = model_speed(m, p, v);
    if (!(sp > 0.0)) return 0.0;
    const Vec2 tangent = model_unit_tangent_away(m, p, q);
    return std::min(1.0, std::abs(model_inner(m, p, v, tangent)) / sp);
}

}  // namespace detail

inline PhaseEvaluation phase_eval(const ModelCurvePair& pair, double s, double t, double fd_step = 0.0) {
    PhaseEvaluation e;
    e.s = s;
    e.t = t;
    const Vec2 p = pair.curve1.position(s), q = pair.curve2.position(t);
    e.phi = model_distance(pair.surface, p, q);
    if (e.phi < pair.margin)
        throw DomainError("phase_eval: phi = " + io::format_double(e.phi) + " below the disjointness margin at (" +
                          io::format_double(s) + ", " + io::format_double(t) + ")");
    const double h1s = fd_step > 0.0 ? fd_step : detail::first_step(s);
    const double h1t = fd_step > 0.0 ? fd_step : detail::first_step(t);
    const double h2s = detail::second_step(s), h2t = detail::second_step(t);
    auto fs = [&](double x) { return pair.phi(x, t); };
    auto ft = [&](double y) { return pair.phi(s, y); };
    auto fst = [&](double x, double y) { return pair.phi(x, y); };
    e.ds_phi = detail::fd1(fs, s, h1s);
    e.dt_phi = detail::fd1(ft, t, h1t);
    e.dss_phi = detail::fd2(fs, s, h2s);
    e.dtt_phi = detail::fd2(ft, t, h2t);
    e.dst_phi = detail::fd_mixed(fst, s, t, h2s, h2t);
    e.theta = std::asin(detail::sin_angle(pair.surface, p, pair.curve1.velocity(s), q));
    e.theta_t = std::asin(detail::sin_angle(pair.surface, q, pair.curve2.velocity(t), p));
    e.circle_kappa = model_circle_curvature(pair.surface, e.phi);
    return e;
}

// Quasi-random (s, t) over the product of the two domains.
inline std::vector<std::pair<double, double>> phase_samples(const ModelCurvePair& pair, int n) {
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto [u, v] = halton2(static_cast<std::uint64_t>(i) + 1);
        out.emplace_back(pair.curve1.s_min + u * (pair.curve1.s_max - pair.curve1.s_min),
                         pair.curve2.s_min + v * (pair.curve2.s_max - pair.curve2.s_min));
    }
    return out;
}

struct PhaseRow {
    PhaseEvaluation eval;
    double bound_ratio = 0.0;
};

inline std::string phase_csv(const std::vector<PhaseRow>& rows) {
    io::CsvTable t({"s", "t", "phi", "ds", "dt", "dst", "dss", "theta", "bound_ratio"});
    for (const auto& r : rows) {
        const auto& e = r.eval;
        t.add_numbers({e.s, e.t, e.phi, e.ds_phi, e.dt_phi, e.dst_phi, e.dss_phi, e.theta, r.bound_ratio});
    }
    return t.str();
}

struct MixedBoundReport {
    std::vector<PhaseRow> rows;
    double max_ratio = 0.0;
    double tolerance = 1e-4;
    std::size_t violations = 0;
    bool has_witness = false;
    double witness_s = 0.0, witness_t = 0.0;
    bool ok() const { return violations == 0; }
};

// |d_s d_t phi| <= 2 / phi at quasi-random points; ratio = |dst| phi / 2.
inline MixedBoundReport check_mixed_bound(const ModelCurvePair& pair, int n_samples, unsigned threads = 1,
                                          double tolerance = 1e-4) {
    if (n_samples < 1) throw InvalidArgument("check_mixed_bound: n_samples must be positive");
    const auto pts = phase_samples(pair, n_samples);
    MixedBoundReport rep;
    rep.tolerance = tolerance;
    rep.rows.resize(pts.size());
    parallel_for(pts.size(), threads, [&](std::size_t i) {
        auto& row = rep.rows[i];
        row.eval = phase_eval(pair, pts[i].first, pts[i].second);
        row.bound_ratio = std::abs(row.eval.dst_phi) * row.eval.phi / 2.0;
    });
    for (const auto& row : rep.rows) {
        rep.max_ratio = std::max(rep.max_ratio, row.bound_ratio);
        // Absolute form: |dst| <= 2/phi + tol.
        if (std::abs(row.eval.dst_phi) > 2.0 / row.eval.phi + tolerance) {
            ++rep.violations;
            const bool lower = !rep.has_witness || row.eval.s < rep.witness_s ||
                               (row.eval.s == rep.witness_s && row.eval.t < rep.witness_t);
            if (lower) {
                rep.has_witness = true;
                rep.witness_s = row.eval.s;
                rep.witness_t = row.eval.t;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Pure second derivative: d^2/ds^2 phi = cos(theta) (+-kappa_gamma + cos(theta) kappa(phi)).

struct PureSecondRow {
    double s = 0.0, t = 0.0;
    char variable = 's';  // which curve moves
    double fd = 0.0;
    double predicted_plus = 0.0, predicted_minus = 0.0;
    int sign = 0;  // resolved sign, 0 when ambiguous
    double error = 0.0;
    bool ok = false;
};

struct PureSecondReport {
    std::vector<PureSecondRow> rows;
    double max_error = 0.0;
    double tolerance = 1e-5;
    std::size_t failures = 0;
    std::size_t ambiguous = 0;
    bool ok() const { return failures == 0 && !rows.empty(); }
};

namespace detail {

// Compare the second difference of phi along `moving` with the formula,
// the other curve frozen at `fixed_point`.
inline PureSecondRow pure_second_row(SurfaceModel m, const ParamCurve& moving, double x, Vec2 fixed_point,
                                     double tolerance) {
    PureSecondRow row;
    const double h = second_step(x);
    auto f = [&](double y) { return model_distance(m, moving.position(y), fixed_point); };
    const Vec2 p = moving.position(x), v = moving.velocity(x);
    const double sp = model_speed(m, p, v);
    const Vec2 unit_v = (1.0 / sp) * v;
    auto g = [&](double sigma) { return model_distance(m, model_geodesic(m, p, unit_v, sigma), fixed_point); };
    row.fd = fd2(f, x, h);
    const double phi = f(x);
    const double c = std::sqrt(std::max(0.0, 1.0 - std::pow(sin_angle(m, p, v, fixed_point), 2)));
    const double kg = moving.curvature(x);
    const double kc = model_circle_curvature(m, phi);
    row.predicted_plus = c * (kg + c * kc);
    row.predicted_minus = c * (-kg + c * kc);
    // f'' - g'' isolates <D_s gamma', grad phi> = +-kappa_gamma cos(theta).
    const double probe = row.fd - fd2(g, 0.0, 1e-3);
    const double split = kg * c;
    if (split > 1e-7) row.sign = probe > 0.0 ? 1 : -1;
    const double e_plus = std::abs(row.fd - row.predicted_plus), e_minus = std::abs(row.fd - row.predicted_minus);
    if (row.sign == 1)
        row.error = e_plus;
    else if (row.sign == -1)
        row.error = e_minus;
    else
        row.error = std::min(e_plus, e_minus);
    row.ok = row.error <= tolerance;
    return row;
}

}  // namespace detail

// Checks curve1 (variable s) and, when it has a closed-form curvature,
// curve2 (variable t). Point curves are skipped as the moving curve.
inline PureSecondReport check_pure_second(const ModelCurvePair& pair, int n_samples, unsigned threads = 1,
                                          double tolerance = 1e-5) {
    if (n_samples < 1) throw InvalidArgument("check_pure_second: n_samples must be positive");
    const bool use1 = pair.curve1.has_curvature() && pair.curve1.unit_speed;
    const bool use2 = pair.curve2.has_curvature() && pair.curve2.unit_speed;
    if (!use1 && !use2) throw InvalidArgument("check_pure_second: neither curve has a closed-form curvature");
    const auto pts = phase_samples(pair, n_samples);
    PureSecondReport rep;
    rep.tolerance = tolerance;
    std::vector<PureSecondRow> r1(use1 ? pts.size() : 0), r2(use2 ? pts.size() : 0);
    parallel_for(pts.size(), threads, [&](std::size_t i) {
        const auto [s, t] = pts[i];
        if (pair.phi(s, t) < pair.margin) throw DomainError("check_pure_second: sample below margin");
        if (use1) {
            r1[i] = detail::pure_second_row(pair.surface, pair.curve1, s, pair.curve2.position(t), tolerance);
            r1[i].s = s;
            r1[i].t = t;
            r1[i].variable = 's';
        }
        if (use2) {
            r2[i] = detail::pure_second_row(pair.surface, pair.curve2, t, pair.curve1.position(s), tolerance);
            r2[i].s = s;
            r2[i].t = t;
            r2[i].variable = 't';
        }
    });
    rep.rows = std::move(r1);
    rep.rows.insert(rep.rows.end(), r2.begin(), r2.end());
    for (const auto& r : rep.rows) {
        rep.max_error = std::max(rep.max_error, r.error);
        rep.failures += r.ok ? 0 : 1;
        rep.ambiguous += r.sign == 0 ? 1 : 0;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Random disjoint hyperbolic pairs for property sweeps.

inline ParamCurve random_hyperbolic_curve(std::mt19937_64& rng, double x0, double y0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    const double len = 0.5 + 1.5 * unit(rng);
    const double a = -0.5 * len;
    switch (static_cast<int>(unit(rng) * 4.0)) {
        case 0: return curves::hyperbolic_geodesic(x0, y0, theta, a, a + len);
        case 1: return curves::horocycle(x0, y0, theta, a, a + len);
        case 2: {
            const double rho = 0.3 + 1.5 * unit(rng);
            return curves::hyperbolic_circle(rho, x0, y0, theta, 0.0, std::min(len, 2.0 * std::numbers::pi * std::sinh(rho)));
        }
        default: return curves::hypercycle(0.1 + 1.5 * unit(rng), x0, y0, theta, a, a + len);
    }
}

// Two random curves placed apart until their sampled distance clears `margin`.
inline ModelCurvePair random_hyperbolic_pair(std::mt19937_64& rng, double margin = 0.1) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        auto c1 = random_hyperbolic_curve(rng, 0.0, 1.0);
        const double gap = 1.0 + 4.0 * unit(rng);
        const double dir = 2.0 * std::numbers::pi * unit(rng);
        const Vec2 centre = hyperbolic::geodesic({0.0, 1.0}, {std::cos(dir), std::sin(dir)}, gap);
        auto c2 = random_hyperbolic_curve(rng, centre.x, centre.y);
        if (sampled_min_distance(c1, c2, SurfaceModel::hyperbolic_plane) >= 2.0 * margin)
            return make_model_pair(std::move(c1), std::move(c2), margin);
    }
    throw Error("phase", "random_hyperbolic_pair: could not place a disjoint pair");
}

}  // namespace curvlab
