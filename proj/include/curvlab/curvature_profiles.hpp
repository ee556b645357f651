#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "curvlab/errors.hpp"
#include "curvlab/geometry.hpp"

namespace curvlab {

using json = nlohmann::json;

enum class ProfileKind { constant, registry, sampled, scaled };
enum class Interpolation { linear, cubic };

inline constexpr int kProfileScanPoints = 10000;

// Sectional curvature along one geodesic ray, r -> K(r) <= 0, with bounds
// K1 <= K(r) <= K0 <= 0 on the profile's domain. Immutable and cheap to copy.
class CurvatureProfile {
public:
    double operator()(double r) const { return eval(r); }

    double eval(double r) const {
        if (!(r >= lo_ && r <= hi_))
            throw DomainError("curvature profile queried at r = " + std::to_string(r) +
                              " outside [" + std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
        const double k = (*fn_)(r);
        if (k > 0.0)
            throw PositiveCurvatureError("curvature profile returned K = " + std::to_string(k) +
                                         " > 0 at r = " + std::to_string(r));
        return k;
    }

    double K0() const { return k0_; }
    double K1() const { return k1_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    bool covers(double a, double b) const { return std::min(a, b) >= lo_ && std::max(a, b) <= hi_; }
    ProfileKind kind() const { return kind_; }
    bool is_constant() const { return kind_ == ProfileKind::constant; }
    // Points where K is not smooth; integrators stop on them.
    const std::vector<double>& breakpoints() const { return *breaks_; }
    const json& descriptor() const { return *descriptor_; }

    // Builder used by the factories below.
    static CurvatureProfile make(ProfileKind kind, std::function<double(double)> fn, double lo, double hi,
                                 double k0, double k1, std::vector<double> breaks, json descriptor) {
        if (!(lo < hi)) throw InvalidArgument("curvature profile domain must be nonempty");
        if (k0 > 0.0)
            throw PositiveCurvatureError("curvature profile has positive supremum K0 = " + std::to_string(k0));
        CurvatureProfile p;
        p.kind_ = kind;
        p.fn_ = std::make_shared<const std::function<double(double)>>(std::move(fn));
        p.lo_ = lo;
        p.hi_ = hi;
        p.k0_ = k0;
        p.k1_ = k1;
        p.breaks_ = std::make_shared<const std::vector<double>>(std::move(breaks));
        p.descriptor_ = std::make_shared<const json>(std::move(descriptor));
        return p;
    }

private:
    CurvatureProfile() = default;

    ProfileKind kind_ = ProfileKind::constant;
    std::shared_ptr<const std::function<double(double)>> fn_;
    double lo_ = 0.0, hi_ = 0.0, k0_ = 0.0, k1_ = 0.0;
    std::shared_ptr<const std::vector<double>> breaks_;
    std::shared_ptr<const json> descriptor_;
};

inline CurvatureProfile make_constant_profile(double K) {
    if (!std::isfinite(K)) throw InvalidArgument("make_constant_profile: K must be finite");
    if (K > 0.0)
        throw PositiveCurvatureError("make_constant_profile: K = " + std::to_string(K) +
                                     " violates the nonpositive-curvature hypothesis");
    constexpr double inf = std::numeric_limits<double>::infinity();
    return CurvatureProfile::make(ProfileKind::constant, [K](double) { return K; }, -inf, inf, K, K, {},
                                  json{{"kind", "constant"}, {"K", K}});
}

namespace detail {

// Second derivatives of the natural cubic spline through (x, y).
inline std::vector<double> natural_spline_moments(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 3) return m;
    std::vector<double> diag(n - 2), upper(n - 2), rhs(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
        diag[i - 1] = 2.0 * (h0 + h1);
        upper[i - 1] = h1;
        rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    // Thomas algorithm; the sub-diagonal entry of row i is h0 = x[i] - x[i-1].
    for (std::size_t i = 1; i < diag.size(); ++i) {
        const double sub = x[i + 1] - x[i];
        const double w = sub / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = diag.size(); i-- > 0;) {
        double v = rhs[i];
        if (i + 1 < diag.size()) v -= upper[i] * m[i + 2];
        m[i + 1] = v / diag[i];
    }
    return m;
}

struct SampledTable {
    std::vector<double> r, k, moments;
    Interpolation interp;

    double operator()(double x) const {
        const auto it = std::upper_bound(r.begin(), r.end(), x);
        std::size_t i = it == r.begin() ? 0 : static_cast<std::size_t>(it - r.begin()) - 1;
        if (r[i] == x) return k[i];
        if (i + 1 >= r.size()) {
            if (x == r.back()) return k.back();
            i = r.size() - 2;
        }
        const double h = r[i + 1] - r[i];
        const double b = (x - r[i]) / h;
        const double a = 1.0 - b;
        if (interp == Interpolation::linear) return a * k[i] + b * k[i + 1];
        return a * k[i] + b * k[i + 1] +
               ((a * a * a - a) * moments[i] + (b * b * b - b) * moments[i + 1]) * h * h / 6.0;
    }

    // Interior stationary points of the cubic pieces; the derivative in b is a quadratic.
    std::vector<double> critical_points() const {
        std::vector<double> out;
        if (interp != Interpolation::cubic) return out;
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            const double h = r[i + 1] - r[i];
            const double qa = 0.5 * h * h * (moments[i + 1] - moments[i]);
            const double qb = h * h * moments[i];
            const double qc = (k[i + 1] - k[i]) - h * h * (2.0 * moments[i] + moments[i + 1]) / 6.0;
            auto keep = [&](double b) {
                if (b > 0.0 && b < 1.0) out.push_back(r[i] + b * h);
            };
            if (std::abs(qa) < 1e-300) {
                if (qb != 0.0) keep(-qc / qb);
                continue;
            }
            const double disc = qb * qb - 4.0 * qa * qc;
            if (disc < 0.0) continue;
            const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
            keep(q / qa);
            if (q != 0.0) keep(qc / q);
        }
        return out;
    }
};

inline std::pair<double, double> scan_bounds(const std::function<double(double)>& f, double lo, double hi,
                                             std::span<const double> extra = {}) {
    double k0 = -std::numeric_limits<double>::infinity();
    double k1 = std::numeric_limits<double>::infinity();
    auto visit = [&](double r) {
        const double v = f(r);
        k0 = std::max(k0, v);
        k1 = std::min(k1, v);
    };
    for (int i = 0; i < kProfileScanPoints; ++i)
        visit(i + 1 == kProfileScanPoints ? hi : lo + (hi - lo) * i / (kProfileScanPoints - 1));
    for (double r : extra) visit(r);
    return {k0, k1};
}

inline const char* to_string(Interpolation i) { return i == Interpolation::linear ? "linear" : "cubic"; }

}  // namespace detail

inline CurvatureProfile make_sampled_profile(std::span<const std::pair<double, double>> samples,
                                             Interpolation interp) {
    if (samples.size() < 2) throw InvalidArgument("make_sampled_profile: need at least 2 samples");
    detail::SampledTable table;
    table.interp = interp;
    json js = json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto [r, k] = samples[i];
        if (!std::isfinite(r) || !std::isfinite(k))
            throw InvalidArgument("make_sampled_profile: non-finite sample at index " + std::to_string(i));
        if (i > 0 && !(r > samples[i - 1].first))
            throw InvalidArgument("make_sampled_profile: samples not strictly sorted by r at index " +
                                  std::to_string(i));
        if (k > 0.0)
            throw PositiveCurvatureError("make_sampled_profile: positive K = " + std::to_string(k) +
                                         " at r = " + std::to_string(r));
        table.r.push_back(r);
        table.k.push_back(k);
        js.push_back({r, k});
    }
    if (interp == Interpolation::cubic) table.moments = detail::natural_spline_moments(table.r, table.k);
    const double lo = table.r.front(), hi = table.r.back();
    const std::vector<double> stationary = table.critical_points();
    std::function<double(double)> fn = [t = std::move(table)](double x) { return t(x); };
    const auto& rs = js;
    std::vector<double> abscissae;
    for (const auto& row : rs) abscissae.push_back(row[0].get<double>());
    std::vector<double> probes = abscissae;
    probes.insert(probes.end(), stationary.begin(), stationary.end());
    const auto [k0, k1] = detail::scan_bounds(fn, lo, hi, probes);
    if (k0 > 0.0)
        throw PositiveCurvatureError("make_sampled_profile: interpolant reaches K = " + std::to_string(k0) + " > 0");
    std::vector<double> breaks(abscissae.begin() + 1, abscissae.end() - 1);
    return CurvatureProfile::make(ProfileKind::sampled, std::move(fn), lo, hi, k0, k1, std::move(breaks),
                                  json{{"kind", "sampled"}, {"samples", js}, {"interp", detail::to_string(interp)}});
}

inline CurvatureProfile make_sampled_profile(const std::vector<std::pair<double, double>>& samples,
                                             Interpolation interp) {
    return make_sampled_profile(std::span<const std::pair<double, double>>(samples), interp);
}

// Piecewise-constant curvature: values[0] on (lo, breaks[0]), values[i] on
// [breaks[i-1], breaks[i]), values.back() on [breaks.back(), hi).
inline CurvatureProfile make_piecewise_constant_profile(std::vector<double> breaks, std::vector<double> values,
                                                        double lo, double hi) {
    if (values.size() != breaks.size() + 1)
        throw InvalidArgument("piecewise_constant: need exactly one more value than breaks");
    if (!std::is_sorted(breaks.begin(), breaks.end()))
        throw InvalidArgument("piecewise_constant: breaks must be sorted");
    for (double v : values)
        if (v > 0.0) throw PositiveCurvatureError("piecewise_constant: positive value " + std::to_string(v));
    const double k0 = *std::max_element(values.begin(), values.end());
    const double k1 = *std::min_element(values.begin(), values.end());
    json desc{{"kind", "registry"},
              {"name", "piecewise_constant"},
              {"params", {{"breaks", breaks}, {"values", values}, {"lo", lo}, {"hi", hi}}}};
    auto fn = [breaks, values](double r) {
        const auto idx = std::upper_bound(breaks.begin(), breaks.end(), r) - breaks.begin();
        return values[static_cast<std::size_t>(idx)];
    };
    return CurvatureProfile::make(ProfileKind::registry, std::move(fn), lo, hi, k0, k1, breaks, std::move(desc));
}

// Smooth transition: K -> k_far as r -> -inf, K -> k_near as r -> +inf.
inline CurvatureProfile make_tanh_step_profile(double k_near, double k_far, double center, double width,
                                               double lo, double hi) {
    if (k_near > 0.0 || k_far > 0.0) throw PositiveCurvatureError("tanh_step: positive limit value");
    if (!(width > 0.0)) throw InvalidArgument("tanh_step: width must be positive");
    json desc{{"kind", "registry"},
              {"name", "tanh_step"},
              {"params",
               {{"k_near", k_near}, {"k_far", k_far}, {"center", center}, {"width", width}, {"lo", lo}, {"hi", hi}}}};
    auto fn = [=](double r) { return k_far + (k_near - k_far) * 0.5 * (1.0 + std::tanh((r - center) / width)); };
    return CurvatureProfile::make(ProfileKind::registry, std::move(fn), lo, hi, std::max(k_near, k_far),
                                  std::min(k_near, k_far), {}, std::move(desc));
}

// Deterministic smooth random profile on [-depth, 0]: six sinusoids
// rescaled into [k_lo, k_hi] (2% inset so spline overshoot stays inside),
// sampled every 0.25 and joined by a natural cubic spline.
inline CurvatureProfile make_random_smooth_profile(std::uint64_t seed, double depth, double k_lo, double k_hi) {
    if (!(k_lo < k_hi) || k_hi > 0.0 || !(depth > 0.0))
        throw InvalidArgument("make_random_smooth_profile: need k_lo < k_hi <= 0 and depth > 0");
    std::mt19937_64 rng(seed);
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    double amp[6], freq[6], phase[6];
    for (int i = 0; i < 6; ++i) {
        amp[i] = 0.2 + unit();
        freq[i] = 0.1 + 1.9 * unit();
        phase[i] = 2.0 * std::numbers::pi * unit();
    }
    const int n = static_cast<int>(std::ceil(depth / 0.25));
    std::vector<double> r(n + 1), v(n + 1);
    for (int i = 0; i <= n; ++i) {
        r[i] = i == n ? 0.0 : -depth + 0.25 * i;
        double acc = 0.0;
        for (int k = 0; k < 6; ++k) acc += amp[k] * std::sin(freq[k] * r[i] + phase[k]);
        v[i] = acc;
    }
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    const double lo = *mn, span = std::max(*mx - *mn, 1e-12);
    const double inset = 0.02 * (k_hi - k_lo);
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i <= n; ++i)
        samples.emplace_back(r[i], k_lo + inset + (k_hi - k_lo - 2.0 * inset) * (v[i] - lo) / span);
    return make_sampled_profile(std::span<const std::pair<double, double>>(samples), Interpolation::cubic);
}

// K_c(r) = c^-2 K(r / c): the profile of the metric scaled by c^2.
inline CurvatureProfile scale_profile(const CurvatureProfile& base, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("scale_profile: c must be positive and finite");
    const double inv2 = 1.0 / (c * c);
    std::vector<double> breaks;
    for (double b : base.breakpoints()) breaks.push_back(c * b);
    json desc{{"kind", "scaled"}, {"c", c}, {"base", base.descriptor()}};
    const ProfileKind kind = base.is_constant() ? ProfileKind::constant : ProfileKind::scaled;
    if (base.is_constant()) return make_constant_profile(base.K0() * inv2);
    return CurvatureProfile::make(kind, [base, c, inv2](double r) { return inv2 * base.eval(r / c); }, c * base.lo(),
                                  c * base.hi(), base.K0() * inv2, base.K1() * inv2, std::move(breaks),
                                  std::move(desc));
}

inline json to_json(const CurvatureProfile& p) { return p.descriptor(); }

namespace detail {

inline double json_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw SchemaError(path, "expected a number");
    return j.get<double>();
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw SchemaError(path + "/" + it.key(), "unknown field");
    }
}

inline const json& require(const json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(path + "/" + key, "missing required field");
    return j.at(key);
}

}  // namespace detail

inline CurvatureProfile profile_from_json(const json& j, const std::string& path = "") {
    using detail::json_number;
    using detail::reject_unknown;
    using detail::require;
    const json& kind_j = require(j, "kind", path);
    if (!kind_j.is_string()) throw SchemaError(path + "/kind", "expected a string");
    const std::string kind = kind_j.get<std::string>();
    if (kind == "constant") {
        reject_unknown(j, {"kind", "K"}, path);
        return make_constant_profile(json_number(require(j, "K", path), path + "/K"));
    }
    if (kind == "sampled") {
        reject_unknown(j, {"kind", "samples", "interp"}, path);
        const json& s = require(j, "samples", path);
        if (!s.is_array()) throw SchemaError(path + "/samples", "expected an array of [r, K] pairs");
        std::vector<std::pair<double, double>> samples;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::string p = path + "/samples/" + std::to_string(i);
            if (!s[i].is_array() || s[i].size() != 2) throw SchemaError(p, "expected [r, K]");
            samples.emplace_back(json_number(s[i][0], p + "/0"), json_number(s[i][1], p + "/1"));
        }
        Interpolation interp = Interpolation::linear;
        if (j.contains("interp")) {
            const json& ij = j.at("interp");
            if (ij == "linear")
                interp = Interpolation::linear;
            else if (ij == "cubic")
                interp = Interpolation::cubic;
            else
                throw SchemaError(path + "/interp", "expected \"linear\" or \"cubic\"");
        }
        return make_sampled_profile(samples, interp);
    }
    if (kind == "registry") {
        reject_unknown(j, {"kind", "name", "params"}, path);
        const json& name = require(j, "name", path);
        const json& params = require(j, "params", path);
        const std::string pp = path + "/params";
        if (name == "piecewise_constant") {
            reject_unknown(params, {"breaks", "values", "lo", "hi"}, pp);
            std::vector<double> breaks, values;
            for (const auto& v : require(params, "breaks", pp)) breaks.push_back(json_number(v, pp + "/breaks"));
            for (const auto& v : require(params, "values", pp)) values.push_back(json_number(v, pp + "/values"));
            return make_piecewise_constant_profile(breaks, values, json_number(require(params, "lo", pp), pp + "/lo"),
                                                   json_number(require(params, "hi", pp), pp + "/hi"));
        }
        if (name == "tanh_step") {
            reject_unknown(params, {"k_near", "k_far", "center", "width", "lo", "hi"}, pp);
            auto num = [&](const char* k) { return json_number(require(params, k, pp), pp + "/" + k); };
            return make_tanh_step_profile(num("k_near"), num("k_far"), num("center"), num("width"), num("lo"),
                                          num("hi"));
        }
        throw SchemaError(path + "/name", "unknown registry entry");
    }
    if (kind == "scaled") {
        reject_unknown(j, {"kind", "c", "base"}, path);
        return scale_profile(profile_from_json(require(j, "base", path), path + "/base"),
                             json_number(require(j, "c", path), path + "/c"));
    }
    throw SchemaError(path + "/kind", "expected \"constant\", \"sampled\", \"registry\" or \"scaled\"");
}

// Smooth compactly supported weight b(s) on the curve parameter.
struct WeightWindow {
    std::function<double(double)> b;
    double lo = 0.0, hi = 0.0;  // support interval
    json descriptor;

    double operator()(double s) const { return (s < lo || s > hi) ? 0.0 : b(s); }
};

// b(s) = exp(-1 / (1 - x^2)), x = (s - center) / half_width, for |x| < 1.
inline WeightWindow make_bump_window(double center, double half_width) {
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw InvalidArgument("make_bump_window: half_width must be positive");
    WeightWindow w;
    w.lo = center - half_width;
    w.hi = center + half_width;
    w.b = [center, half_width](double s) {
        const double x = (s - center) / half_width;
        if (!(std::abs(x) < 1.0)) return 0.0;
        return std::exp(-1.0 / (1.0 - x * x));
    };
    w.descriptor = {{"kind", "bump"}, {"center", center}, {"half_width", half_width}};
    return w;
}

// b = 1 on [lo, hi]. Only meaningful over a full period of a closed curve,
// where the integrand stays periodic and smooth.
inline WeightWindow make_unit_window(double lo, double hi) {
    if (!(hi > lo)) throw InvalidArgument("make_unit_window: empty interval");
    WeightWindow w;
    w.lo = lo;
    w.hi = hi;
    w.b = [](double) { return 1.0; };
    w.descriptor = {{"kind", "unit"}, {"lo", lo}, {"hi", hi}};
    return w;
}

// Difference of two bumps with equal mass: integrates to zero.
inline WeightWindow make_balanced_window(double center, double half_width) {
    const WeightWindow left = make_bump_window(center - half_width, half_width);
    const WeightWindow right = make_bump_window(center + half_width, half_width);
    WeightWindow w;
    w.lo = center - 2.0 * half_width;
    w.hi = center + 2.0 * half_width;
    w.b = [left, right](double s) { return right(s) - left(s); };
    w.descriptor = {{"kind", "balanced"}, {"center", center}, {"half_width", half_width}};
    return w;
}

inline WeightWindow window_from_json(const json& j, const std::string& path = "") {
    using detail::json_number;
    using detail::require;
    const json& kind = require(j, "kind", path);
    if (kind == "bump") {
        detail::reject_unknown(j, {"kind", "center", "half_width"}, path);
        return make_bump_window(json_number(require(j, "center", path), path + "/center"),
                                json_number(require(j, "half_width", path), path + "/half_width"));
    }
    if (kind == "unit") {
        detail::reject_unknown(j, {"kind", "lo", "hi"}, path);
        return make_unit_window(json_number(require(j, "lo", path), path + "/lo"),
                                json_number(require(j, "hi", path), path + "/hi"));
    }
    if (kind == "balanced") {
        detail::reject_unknown(j, {"kind", "center", "half_width"}, path);
        return make_balanced_window(json_number(require(j, "center", path), path + "/center"),
                                    json_number(require(j, "half_width", path), path + "/half_width"));
    }
    throw SchemaError(path + "/kind", "expected \"bump\", \"unit\" or \"balanced\"");
}

// A curve on one of the model surfaces. `velocity` is the coordinate
// derivative; `geodesic_curvature` is empty when no closed form is known.
struct ParamCurve {
    SurfaceModel surface = SurfaceModel::euclidean_plane;
    std::function<Vec2(double)> position;
    std::function<Vec2(double)> velocity;
    std::function<double(double)> geodesic_curvature;
    double s_min = 0.0, s_max = 0.0;
    bool unit_speed = true;
    std::string id;
    json descriptor;

    bool has_curvature() const { return static_cast<bool>(geodesic_curvature); }
    double curvature(double s) const {
        if (!geodesic_curvature) throw InvalidArgument("curve '" + id + "' has no closed-form geodesic curvature");
        return geodesic_curvature(s);
    }
    double speed(double s) const {
        const Vec2 p = position(s);
        return surface == SurfaceModel::hyperbolic_plane ? hyperbolic::speed(p, velocity(s)) : norm(velocity(s));
    }
};

// Largest | |gamma'| - 1 | over n uniform samples of the curve's domain.
inline double unit_speed_defect(const ParamCurve& c, int n = 257) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = c.s_min + (c.s_max - c.s_min) * i / (n - 1);
        worst = std::max(worst, std::abs(c.speed(s) - 1.0));
    }
    return worst;
}

}  // namespace curvlab
