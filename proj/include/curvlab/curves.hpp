#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "curvlab/curvature_profiles.hpp"
#include "curvlab/geometry.hpp"

namespace curvlab::curves {

using cplx = std::complex<double>;

// --- flat curves (euclidean plane or flat torus) ---------------------------

inline void require_flat(SurfaceModel m) {
    if (m != SurfaceModel::euclidean_plane && m != SurfaceModel::flat_torus)
        throw InvalidArgument("flat curve requested on a non-flat surface");
}

// s -> origin + s * direction, direction normalised.
inline ParamCurve segment(Vec2 origin, Vec2 direction, double s_min, double s_max,
                          SurfaceModel m = SurfaceModel::flat_torus) {
    require_flat(m);
    const double len = norm(direction);
    if (!(len > 0.0)) throw InvalidArgument("segment: zero direction");
    const Vec2 d = (1.0 / len) * direction;
    ParamCurve c;
    c.surface = m;
    c.position = [origin, d](double s) { return origin + s * d; };
    c.velocity = [d](double) { return d; };
    c.geodesic_curvature = [](double) { return 0.0; };
    c.s_min = s_min;
    c.s_max = s_max;
    c.id = "segment";
    c.descriptor = {{"type", "segment"},
                    {"surface", to_string(m)},
                    {"origin", {origin.x, origin.y}},
                    {"direction", {direction.x, direction.y}},
                    {"domain", {s_min, s_max}}};
    return c;
}

// Counter-clockwise circle of the given radius, s in [0, 2 pi radius].
inline ParamCurve circle(Vec2 center, double radius, SurfaceModel m = SurfaceModel::flat_torus) {
    require_flat(m);
    if (!(radius > 0.0)) throw InvalidArgument("circle: radius must be positive");
    ParamCurve c;
    c.surface = m;
    c.position = [center, radius](double s) {
        return center + radius * Vec2{std::cos(s / radius), std::sin(s / radius)};
    };
    c.velocity = [radius](double s) { return Vec2{-std::sin(s / radius), std::cos(s / radius)}; };
    c.geodesic_curvature = [radius](double) { return 1.0 / radius; };
    c.s_min = 0.0;
    c.s_max = 2.0 * std::numbers::pi * radius;
    c.id = "circle";
    c.descriptor = {{"type", "circle"}, {"surface", to_string(m)}, {"center", {center.x, center.y}}, {"radius", radius}};
    return c;
}

// Constant curve; not unit speed and without curvature.
inline ParamCurve point(Vec2 p, SurfaceModel m) {
    if (m == SurfaceModel::hyperbolic_plane) hyperbolic::require_upper(p);
    ParamCurve c;
    c.surface = m;
    c.position = [p](double) { return p; };
    c.velocity = [](double) { return Vec2{0.0, 0.0}; };
    c.s_min = -1.0;
    c.s_max = 1.0;
    c.unit_speed = false;
    c.id = "point";
    c.descriptor = {{"type", "point"}, {"surface", to_string(m)}, {"at", {p.x, p.y}}};
    return c;
}

// --- hyperbolic curves ------------------------------------------------------

namespace detail {

template <class Pos, class Vel>
ParamCurve hyperbolic_curve(const Mobius& place, Pos pos, Vel vel, double kappa, double s_min, double s_max,
                            std::string id, json desc) {
    ParamCurve c;
    c.surface = SurfaceModel::hyperbolic_plane;
    c.position = [place, pos](double s) { return to_vec(place(pos(s))); };
    c.velocity = [place, pos, vel](double s) { return to_vec(place.derivative(pos(s)) * vel(s)); };
    c.geodesic_curvature = [kappa](double) { return kappa; };
    c.s_min = s_min;
    c.s_max = s_max;
    c.id = std::move(id);
    c.descriptor = std::move(desc);
    return c;
}

inline json placement_json(double x0, double y0, double theta) { return {x0, y0, theta}; }

}  // namespace detail

// Image under placement(x0, y0, theta) of the vertical geodesic s -> i e^s.
inline ParamCurve hyperbolic_geodesic(double x0, double y0, double theta, double s_min, double s_max) {
    return detail::hyperbolic_curve(
        Mobius::placement(x0, y0, theta), [](double s) { return cplx(0.0, std::exp(s)); },
        [](double s) { return cplx(0.0, std::exp(s)); }, 0.0, s_min, s_max, "geodesic",
        {{"type", "geodesic"}, {"placement", detail::placement_json(x0, y0, theta)}, {"domain", {s_min, s_max}}});
}

// Image of the horocycle s -> s + i (geodesic curvature 1).
inline ParamCurve horocycle(double x0, double y0, double theta, double s_min, double s_max) {
    return detail::hyperbolic_curve(
        Mobius::placement(x0, y0, theta), [](double s) { return cplx(s, 1.0); }, [](double) { return cplx(1.0, 0.0); },
        1.0, s_min, s_max, "horocycle",
        {{"type", "horocycle"}, {"placement", detail::placement_json(x0, y0, theta)}, {"domain", {s_min, s_max}}});
}

// Image of the circle of hyperbolic radius rho about i, unit speed, with
// geodesic curvature coth(rho).
inline ParamCurve hyperbolic_circle(double rho, double x0, double y0, double theta, double s_min, double s_max) {
    if (!(rho > 0.0)) throw InvalidArgument("hyperbolic_circle: radius must be positive");
    const double t = std::tanh(rho / 2.0), sh = std::sinh(rho);
    auto w = [t, sh](double s) { return t * std::exp(cplx(0.0, s / sh)); };
    auto pos = [w](double s) {
        const cplx ws = w(s);
        return cplx(0.0, 1.0) * (1.0 + ws) / (1.0 - ws);
    };
    auto vel = [w, sh](double s) {
        const cplx ws = w(s);
        const cplx den = 1.0 - ws;
        return (cplx(0.0, 2.0) / (den * den)) * (cplx(0.0, 1.0) * ws / sh);
    };
    return detail::hyperbolic_curve(
        Mobius::placement(x0, y0, theta), pos, vel, 1.0 / std::tanh(rho), s_min, s_max, "hyperbolic-circle",
        {{"type", "hyperbolic_circle"},
         {"radius", rho},
         {"placement", detail::placement_json(x0, y0, theta)},
         {"domain", {s_min, s_max}}});
}

// Curve at constant distance `dist` from a geodesic (geodesic curvature tanh(dist)).
inline ParamCurve hypercycle(double dist, double x0, double y0, double theta, double s_min, double s_max) {
    if (!(dist > 0.0)) throw InvalidArgument("hypercycle: distance must be positive");
    const double sa = 1.0 / std::cosh(dist);
    const double alpha = std::asin(sa);
    const cplx dir = std::exp(cplx(0.0, alpha));
    auto pos = [sa, dir](double s) { return std::exp(s * sa) * dir; };
    auto vel = [sa, dir](double s) { return sa * std::exp(s * sa) * dir; };
    return detail::hyperbolic_curve(
        Mobius::placement(x0, y0, theta), pos, vel, std::tanh(dist), s_min, s_max, "hypercycle",
        {{"type", "hypercycle"},
         {"distance", dist},
         {"placement", detail::placement_json(x0, y0, theta)},
         {"domain", {s_min, s_max}}});
}

// s -> gamma(s_min + s_max - s).
inline ParamCurve reversed(const ParamCurve& c) {
    ParamCurve r = c;
    const double a = c.s_min, b = c.s_max;
    r.position = [c, a, b](double s) { return c.position(a + b - s); };
    r.velocity = [c, a, b](double s) { return -1.0 * c.velocity(a + b - s); };
    if (c.geodesic_curvature) r.geodesic_curvature = [c, a, b](double s) { return c.geodesic_curvature(a + b - s); };
    r.id = c.id + "-reversed";
    r.descriptor = {{"type", "reversed"}, {"base", c.descriptor}};
    return r;
}

inline ParamCurve curve_from_json(const json& j, const std::string& path = "");

namespace detail {

inline Vec2 json_vec(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) throw SchemaError(path, "expected [x, y]");
    return {curvlab::detail::json_number(j[0], path + "/0"), curvlab::detail::json_number(j[1], path + "/1")};
}

inline std::pair<double, double> json_domain(const json& j, const std::string& path) {
    const Vec2 v = json_vec(j, path);
    if (!(v.y > v.x)) throw SchemaError(path, "domain must satisfy lo < hi");
    return {v.x, v.y};
}

}  // namespace detail

inline ParamCurve curve_from_json(const json& j, const std::string& path) {
    using curvlab::detail::json_number;
    using curvlab::detail::reject_unknown;
    using curvlab::detail::require;
    const json& type = require(j, "type", path);
    if (!type.is_string()) throw SchemaError(path + "/type", "expected a string");
    const std::string t = type.get<std::string>();
    auto surface = [&](SurfaceModel dflt) {
        if (!j.contains("surface")) return dflt;
        try {
            return surface_from_string(j.at("surface").get<std::string>());
        } catch (const std::exception& e) {
            throw SchemaError(path + "/surface", e.what());
        }
    };
    if (t == "segment") {
        reject_unknown(j, {"type", "surface", "origin", "direction", "domain"}, path);
        const auto [a, b] = detail::json_domain(require(j, "domain", path), path + "/domain");
        return segment(detail::json_vec(require(j, "origin", path), path + "/origin"),
                       detail::json_vec(require(j, "direction", path), path + "/direction"), a, b,
                       surface(SurfaceModel::flat_torus));
    }
    if (t == "circle") {
        reject_unknown(j, {"type", "surface", "center", "radius"}, path);
        return circle(detail::json_vec(require(j, "center", path), path + "/center"),
                      json_number(require(j, "radius", path), path + "/radius"), surface(SurfaceModel::flat_torus));
    }
    if (t == "point") {
        reject_unknown(j, {"type", "surface", "at"}, path);
        return point(detail::json_vec(require(j, "at", path), path + "/at"), surface(SurfaceModel::euclidean_plane));
    }
    if (t == "reversed") {
        reject_unknown(j, {"type", "base"}, path);
        return reversed(curve_from_json(require(j, "base", path), path + "/base"));
    }
    // hyperbolic families share placement and domain
    auto placed = [&](std::initializer_list<const char*> extra) {
        std::vector<const char*> allowed{"type", "surface", "placement", "domain"};
        allowed.insert(allowed.end(), extra.begin(), extra.end());
        for (auto it = j.begin(); it != j.end(); ++it)
            if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }) ==
                allowed.end())
                throw SchemaError(path + "/" + it.key(), "unknown field");
        if (surface(SurfaceModel::hyperbolic_plane) != SurfaceModel::hyperbolic_plane)
            throw SchemaError(path + "/surface", "this curve type lives in the hyperbolic plane");
        const json& pl = require(j, "placement", path);
        if (!pl.is_array() || pl.size() != 3) throw SchemaError(path + "/placement", "expected [x0, y0, theta]");
        const double y0 = json_number(pl[1], path + "/placement/1");
        if (!(y0 > 0.0)) throw SchemaError(path + "/placement/1", "y0 must be positive");
        const auto dom = detail::json_domain(require(j, "domain", path), path + "/domain");
        return std::tuple{json_number(pl[0], path + "/placement/0"), y0, json_number(pl[2], path + "/placement/2"),
                          dom.first, dom.second};
    };
    if (t == "geodesic") {
        const auto [x0, y0, th, a, b] = placed({});
        return hyperbolic_geodesic(x0, y0, th, a, b);
    }
    if (t == "horocycle") {
        const auto [x0, y0, th, a, b] = placed({});
        return horocycle(x0, y0, th, a, b);
    }
    if (t == "hyperbolic_circle") {
        const auto [x0, y0, th, a, b] = placed({"radius"});
        return hyperbolic_circle(json_number(require(j, "radius", path), path + "/radius"), x0, y0, th, a, b);
    }
    if (t == "hypercycle") {
        const auto [x0, y0, th, a, b] = placed({"distance"});
        return hypercycle(json_number(require(j, "distance", path), path + "/distance"), x0, y0, th, a, b);
    }
    throw SchemaError(path + "/type", "unknown curve type '" + t + "'");
}

}  // namespace curvlab::curves
