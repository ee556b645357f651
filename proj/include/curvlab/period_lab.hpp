#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "curvlab/curvature_profiles.hpp"
#include "curvlab/curves.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/io.hpp"
#include "curvlab/numerics.hpp"
#include "curvlab/nufft.hpp"
#include "curvlab/special_functions.hpp"

namespace curvlab {

using cplx = std::complex<double>;

struct LatticeVec {
    long x = 0, y = 0;
    long norm2() const { return x * x + y * y; }
    friend bool operator==(LatticeVec, LatticeVec) = default;
    friend auto operator<=>(LatticeVec, LatticeVec) = default;
};

inline constexpr long kLatticeCap = 100'000'000;
inline constexpr double kLambdaCap = 1000.0;

struct LatticeCircle {
    long n = 0;
    std::vector<LatticeVec> vectors;  // lexicographically sorted
};

// All m in Z^2 with |m|^2 = n: scan the octant 0 <= b <= a, then apply
// the eight symmetries.
inline LatticeCircle lattice_circle(long n) {
    if (n < 0) throw InvalidArgument("lattice_circle: n must be nonnegative");
    if (n > kLatticeCap) throw CapExceeded("lattice_circle: n exceeds the scan cap 1e8");
    LatticeCircle lc{n, {}};
    for (long a = 0; a * a <= n; ++a) {
        const long rem = n - a * a;
        long b = static_cast<long>(std::llround(std::sqrt(static_cast<double>(rem))));
        while (b * b > rem) --b;
        while ((b + 1) * (b + 1) <= rem) ++b;
        if (b * b != rem || b > a) continue;
        for (long sx : {1L, -1L})
            for (long sy : {1L, -1L})
                for (bool swap : {false, true}) {
                    const long u = swap ? b : a, v = swap ? a : b;
                    lc.vectors.push_back({sx * u, sy * v});
                }
    }
    std::sort(lc.vectors.begin(), lc.vectors.end());
    lc.vectors.erase(std::unique(lc.vectors.begin(), lc.vectors.end()), lc.vectors.end());
    return lc;
}

// ---------------------------------------------------------------------------
// Oscillatory quadrature of  I(m) = int b(s) exp(i m . gamma(s)) ds.

struct QuadratureNodes {
    std::vector<double> s, w;  // weights include b(s)
    std::vector<Vec2> point;
};

namespace detail {

inline void require_flat_curve(const ParamCurve& c, const char* who) {
    if (c.surface != SurfaceModel::flat_torus && c.surface != SurfaceModel::euclidean_plane)
        throw InvalidArgument(std::string(who) + ": curve must live on the flat torus or the euclidean plane");
}

inline std::pair<double, double> integration_range(const ParamCurve& c, const WeightWindow& b) {
    const double lo = std::max(c.s_min, b.lo), hi = std::min(c.s_max, b.hi);
    if (!(lo < hi)) throw DomainError("window support misses the curve domain");
    return {lo, hi};
}

// Upper bound for |d/ds (m . gamma(s))| from 1024 samples plus the largest
// change of gamma' between consecutive samples.
inline double phase_rate_bound(const ParamCurve& c, double lo, double hi, double mx, double my) {
    constexpr int n = 1024;
    double best = 0.0, var = 0.0;
    Vec2 prev = c.velocity(lo);
    for (int i = 0; i <= n; ++i) {
        const Vec2 v = c.velocity(lo + (hi - lo) * i / n);
        best = std::max(best, std::abs(mx * v.x + my * v.y));
        var = std::max(var, norm(v - prev));
        prev = v;
    }
    return best + std::hypot(mx, my) * var;
}

inline const QuadratureRule& gl20() {
    static const QuadratureRule r = gauss_legendre(20);
    return r;
}

}  // namespace detail

inline QuadratureNodes composite_nodes(const ParamCurve& c, const WeightWindow& b, double lo, double hi,
                                       std::size_t panels) {
    const auto& rule = detail::gl20();
    QuadratureNodes q;
    const double width = (hi - lo) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = lo + width * static_cast<double>(p);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double s = a + 0.5 * width * (rule.nodes[i] + 1.0);
            const double w = 0.5 * width * rule.weights[i] * b(s);
            if (w == 0.0) continue;
            q.s.push_back(s);
            q.w.push_back(w);
            q.point.push_back(c.position(s));
        }
    }
    return q;
}

inline cplx apply_nodes(const QuadratureNodes& q, double mx, double my) {
    CompensatedComplexSum sum;
    for (std::size_t j = 0; j < q.s.size(); ++j) {
        const double ph = mx * q.point[j].x + my * q.point[j].y;
        sum += q.w[j] * cplx(std::cos(ph), std::sin(ph));
    }
    return sum.value();
}

struct PeriodIntegralRecord {
    long n = 0;
    std::string curve_id;
    LatticeVec m;
    cplx value;
    double quadrature_error = 0.0;
    std::size_t nodes_used = 0;
    double tolerance = 1e-10;
    bool converged = true;
};

struct OscillatoryOptions {
    double tolerance = 1e-10;
    std::size_t max_panels = std::size_t{1} << 20;
};

// Composite 20-point Gauss-Legendre with panels no longer than one phase
// period; the panel count doubles until two successive values agree.
inline PeriodIntegralRecord oscillatory_integral(const ParamCurve& c, const WeightWindow& b, double mx, double my,
                                                 const OscillatoryOptions& opt = {}) {
    detail::require_flat_curve(c, "oscillatory_integral");
    const auto [lo, hi] = detail::integration_range(c, b);
    const double rate = detail::phase_rate_bound(c, lo, hi, mx, my);
    std::size_t panels = std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil((hi - lo) * rate / (2.0 * std::numbers::pi))));
    PeriodIntegralRecord rec;
    rec.curve_id = c.id;
    rec.m = {std::lround(mx), std::lround(my)};
    rec.n = rec.m.norm2();
    rec.tolerance = opt.tolerance;
    auto q = composite_nodes(c, b, lo, hi, panels);
    cplx prev = apply_nodes(q, mx, my);
    rec.nodes_used = q.s.size();
    while (true) {
        if (2 * panels > opt.max_panels) {
            rec.value = prev;
            rec.converged = false;
            rec.quadrature_error = std::max(10.0 * rec.quadrature_error, opt.tolerance * 10.0);
            return rec;
        }
        panels *= 2;
        q = composite_nodes(c, b, lo, hi, panels);
        const cplx next = apply_nodes(q, mx, my);
        rec.nodes_used += q.s.size();
        const double diff = std::abs(next - prev);
        prev = next;
        rec.quadrature_error = diff;
        if (diff <= opt.tolerance) break;
    }
    rec.value = prev;
    return rec;
}

inline PeriodIntegralRecord oscillatory_integral(const ParamCurve& c, const WeightWindow& b, LatticeVec m,
                                                 const OscillatoryOptions& opt = {}) {
    return oscillatory_integral(c, b, static_cast<double>(m.x), static_cast<double>(m.y), opt);
}

// ---------------------------------------------------------------------------

inline constexpr double kTorusNormalisation = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);

struct ExtremalRecord {
    long n = 0;
    double lambda = 0.0;
    double norm = 0.0;
    std::size_t count = 0;
    double max_quadrature_error = 0.0;
};

// ((2 pi)^-2 sum_m |I(m)|^2)^{1/2}: the largest period integral of an
// L^2-normalised torus eigenfunction with eigenvalue sqrt(n).
inline std::optional<ExtremalRecord> extremal_period_norm(const ParamCurve& c, const WeightWindow& b, long n,
                                                          unsigned threads = 1) {
    const auto lc = lattice_circle(n);
    if (lc.vectors.empty()) return std::nullopt;
    std::vector<PeriodIntegralRecord> recs(lc.vectors.size());
    parallel_for(recs.size(), threads, [&](std::size_t i) { recs[i] = oscillatory_integral(c, b, lc.vectors[i]); });
    CompensatedSum sum;
    ExtremalRecord out;
    out.n = n;
    out.lambda = std::sqrt(static_cast<double>(n));
    out.count = recs.size();
    for (const auto& r : recs) {
        sum += std::norm(r.value);
        out.max_quadrature_error = std::max(out.max_quadrature_error, r.quadrature_error);
    }
    out.norm = std::sqrt(kTorusNormalisation * sum.value());
    return out;
}

struct TorusEigenfunction {
    long n = 0;
    std::vector<LatticeVec> modes;
    std::vector<cplx> coefficients;

    double coefficient_norm2() const {
        CompensatedSum s;
        for (const auto& a : coefficients) s += std::norm(a);
        return s.value();
    }
};

// Rescales so that sum |a_m|^2 = (2 pi)^-2.
inline TorusEigenfunction make_torus_eigenfunction(long n, std::vector<cplx> coefficients) {
    auto lc = lattice_circle(n);
    if (coefficients.size() != lc.vectors.size())
        throw InvalidArgument("make_torus_eigenfunction: need one coefficient per lattice vector");
    TorusEigenfunction ef{n, std::move(lc.vectors), std::move(coefficients)};
    const double norm2 = ef.coefficient_norm2();
    if (!(norm2 > 0.0)) throw InvalidArgument("make_torus_eigenfunction: zero coefficients");
    const double scale = std::sqrt(kTorusNormalisation / norm2);
    for (auto& a : ef.coefficients) a *= scale;
    return ef;
}

inline cplx eigenfunction_period(const TorusEigenfunction& ef, const ParamCurve& c, const WeightWindow& b) {
    CompensatedComplexSum s;
    for (std::size_t i = 0; i < ef.modes.size(); ++i) s += ef.coefficients[i] * oscillatory_integral(c, b, ef.modes[i]).value;
    return s.value();
}

struct DecayFit {
    std::vector<std::pair<double, double>> points;  // (log lambda, log norm)
    std::vector<ExtremalRecord> records;
    double slope = 0.0, intercept = 0.0, residual = 0.0;
};

// Ordinary least squares y = intercept + slope x; residual is the RMS misfit.
inline void fit_line(DecayFit& fit) {
    const double k = static_cast<double>(fit.points.size());
    CompensatedSum sx, sy;
    for (const auto& [x, y] : fit.points) {
        sx += x;
        sy += y;
    }
    const double mx = sx.value() / k, my = sy.value() / k;
    CompensatedSum sxx, sxy;
    for (const auto& [x, y] : fit.points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (!(sxx.value() > 0.0)) throw InvalidArgument("decay_scan: degenerate abscissae");
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = my - fit.slope * mx;
    CompensatedSum rr;
    for (const auto& [x, y] : fit.points) {
        const double e = y - (fit.intercept + fit.slope * x);
        rr += e * e;
    }
    fit.residual = std::sqrt(rr.value() / k);
}

inline DecayFit decay_scan(const ParamCurve& c, const WeightWindow& b, const std::vector<long>& n_list,
                           unsigned threads = 1) {
    DecayFit fit;
    for (long n : n_list) {
        const auto rec = extremal_period_norm(c, b, n, threads);
        if (!rec || !(rec->norm > 0.0)) continue;
        fit.records.push_back(*rec);
        fit.points.emplace_back(std::log(rec->lambda), std::log(rec->norm));
    }
    if (fit.points.size() < 4) throw InvalidArgument("decay_scan: fewer than 4 usable points");
    fit_line(fit);
    return fit;
}

inline std::string decay_csv(const DecayFit& fit) {
    io::CsvTable t({"n", "lambda", "extremal_norm"});
    for (const auto& r : fit.records) t.add_numbers({static_cast<double>(r.n), r.lambda, r.norm});
    return t.str();
}

// ---------------------------------------------------------------------------
// Segment saturation.

struct SaturationRow {
    int k = 0;
    LatticeVec m;
    double phase_drift = 0.0;  // |m . gamma'|
    cplx integral;
    double magnitude = 0.0;
};

struct SaturationResult {
    bool rational = false;
    double window_mass = 0.0;  // int b
    std::vector<SaturationRow> rows;
};

// Continued-fraction convergents p/q of x (q >= 1), at most `count`.
inline std::vector<std::pair<long, long>> convergents(double x, int count) {
    std::vector<std::pair<long, long>> out;
    long p0 = 1, q0 = 0;
    long p1 = static_cast<long>(std::floor(x)), q1 = 1;
    double frac = x - std::floor(x);
    out.emplace_back(p1, q1);
    while (static_cast<int>(out.size()) < count && frac > 1e-15) {
        const double inv = 1.0 / frac;
        const long a = static_cast<long>(std::floor(inv));
        frac = inv - static_cast<double>(a);
        const long p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > 100'000'000 || std::abs(p2) > 100'000'000) break;
        out.emplace_back(p2, q2);
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    return out;
}

// Rational directions (a, b) ~ (q, p) use m_k = k (-p, q), exactly
// perpendicular. Other directions use m_k = (-p_k, q_k) from the
// continued-fraction convergents of the slope b/a.
inline SaturationResult segment_saturation(Vec2 direction, const WeightWindow& b, int k_max, double length = 1.0,
                                           Vec2 origin = {0.0, 0.0}) {
    if (k_max < 1) throw InvalidArgument("segment_saturation: k_max must be >= 1");
    const double len = norm(direction);
    if (!(len > 0.0) || !std::isfinite(len)) throw InvalidArgument("segment_saturation: malformed direction");
    const Vec2 d = (1.0 / len) * direction;
    const auto curve = curves::segment(origin, d, 0.0, length, SurfaceModel::flat_torus);
    SaturationResult res;
    res.window_mass = oscillatory_integral(curve, b, 0.0, 0.0).value.real();

    std::vector<LatticeVec> ms;
    if (d.x == 0.0 || d.y == 0.0) {
        res.rational = true;
        for (int k = 1; k <= k_max; ++k) ms.push_back(d.x == 0.0 ? LatticeVec{k, 0} : LatticeVec{0, k});
    } else {
        const bool steep = std::abs(d.y) > std::abs(d.x);
        const double slope = steep ? d.x / d.y : d.y / d.x;
        const auto cf = convergents(slope, 64);
        const auto [p, q] = cf.back();
        res.rational = q <= 10000 && std::abs(slope - static_cast<double>(p) / static_cast<double>(q)) <=
                                         1e-14 * std::max(1.0, std::abs(slope));
        auto perp = [steep](long pp, long qq) { return steep ? LatticeVec{qq, -pp} : LatticeVec{-pp, qq}; };
        if (res.rational) {
            const LatticeVec base = perp(p, q);
            for (int k = 1; k <= k_max; ++k) ms.push_back({k * base.x, k * base.y});
        } else {
            for (int k = 1; k <= k_max && k <= static_cast<int>(cf.size()); ++k) ms.push_back(perp(cf[k - 1].first, cf[k - 1].second));
        }
    }
    for (std::size_t i = 0; i < ms.size(); ++i) {
        SaturationRow row;
        row.k = static_cast<int>(i) + 1;
        row.m = ms[i];
        row.phase_drift = std::abs(static_cast<double>(ms[i].x) * d.x + static_cast<double>(ms[i].y) * d.y);
        row.integral = oscillatory_integral(curve, b, ms[i]).value;
        row.magnitude = std::abs(row.integral);
        res.rows.push_back(row);
    }
    return res;
}

// ---------------------------------------------------------------------------

// Equator integral of the L^2-normalised degree-k zonal harmonic.
inline double zonal_great_circle(int k) {
    if (k < 0) throw InvalidArgument("zonal_great_circle: k must be nonnegative");
    return 2.0 * std::numbers::pi * std::sqrt((2.0 * k + 1.0) / (4.0 * std::numbers::pi)) * legendre_p_at_zero(k);
}

// ---------------------------------------------------------------------------
// All |I(m)|^2, |m| <= Lambda, binned by n = |m|^2, via row-wise NUFFT.

struct SpectralBins {
    double lambda_max = 0.0;
    std::vector<double> bins;  // bins[n] = (2 pi)^-2 sum_{|m|^2 = n} |I(m)|^2
    double probe_error = 0.0;  // max |I_nufft - I_direct| over probe vectors
    std::size_t nodes = 0;
};

struct SpectralOptions {
    unsigned threads = 1;
    bool allow_beyond_cap = false;
};

inline std::vector<LatticeVec> spectral_probes(long L) {
    const long h = static_cast<long>(std::floor(L / std::numbers::sqrt2));
    std::vector<LatticeVec> p{{0, 0}, {1, 0}, {0, L}, {L, 0}, {-h, h}, {L / 2, -(L / 3)}, {-(L / 5), L / 7}};
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    return p;
}

inline SpectralBins spectral_bins(const ParamCurve& c, const WeightWindow& b, double lambda_max,
                                  const SpectralOptions& opt = {}) {
    detail::require_flat_curve(c, "spectral_bins");
    if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max)) throw InvalidArgument("spectral_bins: bad Lambda");
    if (lambda_max > kLambdaCap && !opt.allow_beyond_cap)
        throw CapExceeded("spectral sum: Lambda " + io::format_double(lambda_max) + " exceeds the cap 1000");
    const long L = static_cast<long>(std::floor(lambda_max));
    const long n_max = static_cast<long>(std::floor(lambda_max * lambda_max));
    const auto [lo, hi] = detail::integration_range(c, b);
    // Panels sized for the fastest phase, then doubled for margin.
    const double rate = detail::phase_rate_bound(c, lo, hi, static_cast<double>(L), 0.0) +
                        detail::phase_rate_bound(c, lo, hi, 0.0, static_cast<double>(L));
    const std::size_t panels =
        2 * std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil((hi - lo) * rate / (2.0 * std::numbers::pi))));
    const auto q = composite_nodes(c, b, lo, hi, panels);
    const std::size_t N = q.s.size();

    std::vector<double> ys(N);
    for (std::size_t j = 0; j < N; ++j) ys[j] = q.point[j].y;
    const Nufft1D nufft(ys, static_cast<int>(L));
    std::vector<double> xs(N);
    for (std::size_t j = 0; j < N; ++j) {
        xs[j] = std::fmod(q.point[j].x, 2.0 * std::numbers::pi);
    }

    // rows[m1 + L][m2 + L] = I(m1, m2)
    const std::size_t width = 2 * static_cast<std::size_t>(L) + 1;
    std::vector<std::vector<cplx>> rows(width);
    const unsigned T = std::max(1u, opt.threads);
    parallel_for(T, T, [&](std::size_t chunk) {
        auto ws = nufft.make_workspace();
        std::vector<cplx> d(N);
        for (std::size_t r = chunk; r < width; r += T) {
            const long m1 = static_cast<long>(r) - L;
            const long k_max = static_cast<long>(std::floor(std::sqrt(static_cast<double>(n_max - m1 * m1))));
            for (std::size_t j = 0; j < N; ++j) {
                const double ph = static_cast<double>(m1) * xs[j];
                d[j] = q.w[j] * cplx(std::cos(ph), std::sin(ph));
            }
            rows[r].assign(width, cplx(0.0, 0.0));
            nufft.transform(d.data(), static_cast<int>(k_max), rows[r].data(), ws);
        }
    });

    SpectralBins out;
    out.lambda_max = lambda_max;
    out.nodes = N;
    std::vector<CompensatedSum> acc(static_cast<std::size_t>(n_max) + 1);
    for (long m1 = -L; m1 <= L; ++m1) {
        const long k_max = static_cast<long>(std::floor(std::sqrt(static_cast<double>(n_max - m1 * m1))));
        for (long m2 = -k_max; m2 <= k_max; ++m2) {
            const long n = m1 * m1 + m2 * m2;
            if (n > n_max) continue;
            acc[static_cast<std::size_t>(n)] += kTorusNormalisation * std::norm(rows[m1 + L][m2 + L]);
        }
    }
    out.bins.resize(acc.size());
    for (std::size_t n = 0; n < acc.size(); ++n) out.bins[n] = acc[n].value();

    for (const auto& m : spectral_probes(L)) {
        if (m.norm2() > n_max) continue;
        const cplx direct = oscillatory_integral(c, b, m).value;
        out.probe_error = std::max(out.probe_error, std::abs(direct - rows[m.x + L][m.y + L]));
    }
    return out;
}

struct KuznecovPoint {
    double lambda = 0.0;
    double sum = 0.0;
};

struct KuznecovSweep {
    std::vector<KuznecovPoint> points;
    double probe_error = 0.0;
    std::size_t nodes = 0;
};

// sum_{|m| <= Lambda} (2 pi)^-2 |I(m)|^2 for every requested Lambda in one pass.
inline KuznecovSweep kuznecov_sweep(const ParamCurve& c, const WeightWindow& b, std::vector<double> lambdas,
                                    const SpectralOptions& opt = {}) {
    if (lambdas.empty()) throw InvalidArgument("kuznecov_sweep: no Lambda values");
    const double top = *std::max_element(lambdas.begin(), lambdas.end());
    const auto bins = spectral_bins(c, b, top, opt);
    KuznecovSweep sw;
    sw.probe_error = bins.probe_error;
    sw.nodes = bins.nodes;
    std::vector<double> prefix(bins.bins.size());
    CompensatedSum run;
    for (std::size_t n = 0; n < bins.bins.size(); ++n) {
        run += bins.bins[n];
        prefix[n] = run.value();
    }
    for (double lam : lambdas) {
        if (lam < 0.0) throw InvalidArgument("kuznecov_sweep: negative Lambda");
        const auto n = static_cast<std::size_t>(std::floor(lam * lam));
        sw.points.push_back({lam, prefix[std::min(n, prefix.size() - 1)]});
    }
    return sw;
}

inline double kuznecov_sum(const ParamCurve& c, const WeightWindow& b, double lambda, const SpectralOptions& opt = {}) {
    return kuznecov_sweep(c, b, {lambda}, opt).points.front().sum;
}

// ---------------------------------------------------------------------------

enum class WindowMode { sharp, smooth };

inline const char* to_string(WindowMode m) { return m == WindowMode::sharp ? "sharp" : "smooth"; }

// Smooth spectral window exp(-x^2/2), cut off at |x| <= 9 (below 3e-18).
inline constexpr double kSmoothWindowCutoff = 9.0;
inline double smooth_window(double x) {
    return std::abs(x) <= kSmoothWindowCutoff ? std::exp(-0.5 * x * x) : 0.0;
}

struct WindowedSumResult {
    double lambda = 0.0, T = 0.0;
    WindowMode mode = WindowMode::sharp;
    double value = 0.0;
    std::size_t eigenvalues = 0;  // distinct n with nonzero weight and nonzero bin
    double probe_error = 0.0;
};

inline WindowedSumResult windowed_sum(const ParamCurve& c, const WeightWindow& b, double lambda, double T,
                                      WindowMode mode = WindowMode::sharp, const SpectralOptions& opt = {}) {
    if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("windowed_sum: T must be positive");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("windowed_sum: lambda must be >= 0");
    if (lambda > kLambdaCap && !opt.allow_beyond_cap) throw CapExceeded("windowed_sum: lambda exceeds the cap 1000");
    const double upper = mode == WindowMode::sharp ? lambda + 1.0 / T : lambda + kSmoothWindowCutoff / T;
    const auto bins = spectral_bins(c, b, upper, {opt.threads, true});
    WindowedSumResult res{lambda, T, mode, 0.0, 0, bins.probe_error};
    CompensatedSum sum;
    for (std::size_t n = 0; n < bins.bins.size(); ++n) {
        const double r = std::sqrt(static_cast<double>(n));
        double weight;
        if (mode == WindowMode::sharp)
            weight = (r >= lambda && r <= upper) ? 1.0 : 0.0;
        else
            weight = smooth_window(T * (r - lambda));
        if (weight == 0.0 || bins.bins[n] == 0.0) continue;
        ++res.eigenvalues;
        sum += weight * bins.bins[n];
    }
    res.value = sum.value();
    return res;
}

}  // namespace curvlab
