#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <string_view>

#include "curvlab/errors.hpp"

namespace curvlab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double c, Vec2 a) { return {c * a.x, c * a.y}; }
    friend Vec2 operator*(Vec2 a, double c) { return {c * a.x, c * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline std::complex<double> to_complex(Vec2 a) { return {a.x, a.y}; }
inline Vec2 to_vec(std::complex<double> z) { return {z.real(), z.imag()}; }

enum class SurfaceModel { euclidean_plane, flat_torus, hyperbolic_plane, round_sphere };

inline std::string_view to_string(SurfaceModel m) {
    switch (m) {
        case SurfaceModel::euclidean_plane: return "euclidean-plane";
        case SurfaceModel::flat_torus: return "flat-torus";
        case SurfaceModel::hyperbolic_plane: return "hyperbolic-plane";
        case SurfaceModel::round_sphere: return "round-sphere";
    }
    return "?";
}

inline SurfaceModel surface_from_string(std::string_view s) {
    if (s == "euclidean-plane") return SurfaceModel::euclidean_plane;
    if (s == "flat-torus") return SurfaceModel::flat_torus;
    if (s == "hyperbolic-plane") return SurfaceModel::hyperbolic_plane;
    if (s == "round-sphere") return SurfaceModel::round_sphere;
    throw InvalidArgument("unknown surface model '" + std::string(s) + "'");
}

// Sectional curvature of the model surfaces.
inline double model_curvature(SurfaceModel m) {
    switch (m) {
        case SurfaceModel::hyperbolic_plane: return -1.0;
        case SurfaceModel::round_sphere: return 1.0;
        default: return 0.0;
    }
}

// Reduce flat-torus coordinates into [0, 2pi).
inline Vec2 torus_reduce(Vec2 p) {
    constexpr double period = 2.0 * 3.14159265358979323846;
    auto red = [](double v) {
        double r = std::fmod(v, period);
        if (r < 0.0) r += period;
        if (r >= period) r = 0.0;
        return r;
    };
    return {red(p.x), red(p.y)};
}

// Orientation-preserving isometry of the upper half-plane,
// z -> (a z + b) / (c z + d) with ad - bc = 1.
struct Mobius {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    std::complex<double> operator()(std::complex<double> z) const {
        return (a * z + b) / (c * z + d);
    }
    std::complex<double> derivative(std::complex<double> z) const {
        const auto den = c * z + d;
        return 1.0 / (den * den);
    }
    Mobius then(const Mobius& outer) const {
        return {outer.a * a + outer.b * c, outer.a * b + outer.b * d,
                outer.c * a + outer.d * c, outer.c * b + outer.d * d};
    }

    static Mobius translation(double dx) { return {1.0, dx, 0.0, 1.0}; }
    static Mobius dilation(double k) {
        if (!(k > 0.0)) throw InvalidArgument("Mobius dilation must be positive");
        const double r = std::sqrt(k);
        return {r, 0.0, 0.0, 1.0 / r};
    }
    // Rotation by angle theta about the point i.
    static Mobius rotation(double theta) {
        const double c2 = std::cos(theta / 2.0), s2 = std::sin(theta / 2.0);
        return {c2, s2, -s2, c2};
    }
    // Rotation about i, then dilation, then translation: sends i to (x0, y0).
    static Mobius placement(double x0, double y0, double theta) {
        return rotation(theta).then(dilation(y0)).then(translation(x0));
    }
};

namespace hyperbolic {

inline void require_upper(Vec2 p) {
    if (!(p.y > 0.0) || !std::isfinite(p.x) || !std::isfinite(p.y))
        throw DomainError("hyperbolic point must have positive finite second coordinate");
}

inline double distance(Vec2 p, Vec2 q) {
    require_upper(p);
    require_upper(q);
    const double u = norm(p - q) / (2.0 * std::sqrt(p.y * q.y));
    return 2.0 * std::asinh(u);
}

// Riemannian inner product of coordinate vectors at p.
inline double inner(Vec2 p, Vec2 a, Vec2 b) { return dot(a, b) / (p.y * p.y); }

inline double speed(Vec2 p, Vec2 v) { return norm(v) / p.y; }

// Unit tangent at p of the geodesic from q to p, continued past p
// (the Riemannian gradient of d(., q) at p).
inline Vec2 unit_tangent_away(Vec2 p, Vec2 q) {
    const Vec2 diff = p - q;
    const double e = norm(diff);
    const double root = std::sqrt(p.y * q.y);
    const double u = e / (2.0 * root);
    const double scale = 2.0 / std::sqrt(1.0 + u * u);
    Vec2 grad = scale * ((1.0 / (2.0 * e * root)) * diff - Vec2{0.0, u / (2.0 * p.y)});
    return (p.y * p.y) * grad;
}

// Unit-speed geodesic sigma -> point with initial point p and unit
// velocity v (coordinate vector with |v| = p.y).
inline Vec2 geodesic(Vec2 p, Vec2 v, double sigma) {
    const std::complex<double> dir = to_complex(v) / std::complex<double>(0.0, p.y);
    const Mobius m = Mobius::placement(p.x, p.y, std::arg(dir));
    return to_vec(m(std::complex<double>(0.0, std::exp(sigma))));
}

}  // namespace hyperbolic

namespace euclidean {

inline double distance(Vec2 p, Vec2 q) { return norm(p - q); }
inline Vec2 unit_tangent_away(Vec2 p, Vec2 q) {
    const Vec2 d = p - q;
    return (1.0 / norm(d)) * d;
}
inline Vec2 geodesic(Vec2 p, Vec2 v, double sigma) { return p + sigma * v; }

}  // namespace euclidean

inline void require_planar_model(SurfaceModel m, const char* who) {
    if (m != SurfaceModel::euclidean_plane && m != SurfaceModel::hyperbolic_plane)
        throw InvalidArgument(std::string(who) + ": only euclidean-plane and hyperbolic-plane are supported");
}

// Closed-form geodesic distance in a model plane.
inline double model_distance(SurfaceModel m, Vec2 p, Vec2 q) {
    require_planar_model(m, "model_distance");
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(q.x) || !std::isfinite(q.y))
        throw DomainError("model_distance: non-finite coordinates");
    return m == SurfaceModel::hyperbolic_plane ? hyperbolic::distance(p, q) : euclidean::distance(p, q);
}

inline double model_inner(SurfaceModel m, Vec2 p, Vec2 a, Vec2 b) {
    return m == SurfaceModel::hyperbolic_plane ? hyperbolic::inner(p, a, b) : dot(a, b);
}

inline double model_speed(SurfaceModel m, Vec2 p, Vec2 v) {
    return m == SurfaceModel::hyperbolic_plane ? hyperbolic::speed(p, v) : norm(v);
}

inline Vec2 model_unit_tangent_away(SurfaceModel m, Vec2 p, Vec2 q) {
    return m == SurfaceModel::hyperbolic_plane ? hyperbolic::unit_tangent_away(p, q)
                                               : euclidean::unit_tangent_away(p, q);
}

inline Vec2 model_geodesic(SurfaceModel m, Vec2 p, Vec2 v, double sigma) {
    return m == SurfaceModel::hyperbolic_plane ? hyperbolic::geodesic(p, v, sigma)
                                               : euclidean::geodesic(p, v, sigma);
}

// Geodesic curvature of a circle of radius r in the model plane.
inline double model_circle_curvature(SurfaceModel m, double r) {
    return m == SurfaceModel::hyperbolic_plane ? 1.0 / std::tanh(r) : 1.0 / r;
}

}  // namespace curvlab
