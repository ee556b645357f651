#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <fftw3.h>
#include <json.hpp>

#include "curvlab/admissibility.hpp"
#include "curvlab/curvature_profiles.hpp"
#include "curvlab/curves.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/io.hpp"
#include "curvlab/kcrit.hpp"
#include "curvlab/period_lab.hpp"
#include "curvlab/phase_geometry.hpp"

namespace curvlab {

inline constexpr const char* kVersion = "0.1.0";

enum class RunStatus { ok = 0, error = 1, violated = 2 };

struct ExperimentConfig {
    std::string experiment;
    json params;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    json raw;
};

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> k{"kcrit",      "admissibility",      "circle-threshold",
                                            "phase-check", "decay-scan",        "segment-saturation",
                                            "zonal",       "kuznecov",          "windowed-sum"};
    return k;
}

inline ExperimentConfig parse_config(const json& j) {
    detail::reject_unknown(j, {"experiment", "params", "output_dir", "seed"}, "");
    ExperimentConfig c;
    c.raw = j;
    const json& e = detail::require(j, "experiment", "");
    if (!e.is_string()) throw SchemaError("/experiment", "expected a string");
    c.experiment = e.get<std::string>();
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), c.experiment) == kinds.end())
        throw SchemaError("/experiment", "unknown experiment kind '" + c.experiment + "'");
    c.params = j.contains("params") ? j.at("params") : json::object();
    if (!c.params.is_object()) throw SchemaError("/params", "expected an object");
    if (j.contains("output_dir")) {
        if (!j.at("output_dir").is_string()) throw SchemaError("/output_dir", "expected a string");
        c.output_dir = j.at("output_dir").get<std::string>();
    }
    if (j.contains("seed")) {
        const json& s = j.at("seed");
        if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0))
            throw SchemaError("/seed", "expected a nonnegative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& p) {
    const std::string text = io::read_file(p);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError("", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

struct RunResult {
    RunStatus status = RunStatus::ok;
    json results = json::object();
    std::map<std::string, std::string> files;  // name -> content
};

namespace detail {

// Reports construction errors of a sub-document under its JSON path.
template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const SchemaError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw SchemaError(path, e.what());
    } catch (const PositiveCurvatureError& e) {
        throw SchemaError(path, e.what());
    } catch (const DomainError& e) {
        throw SchemaError(path, e.what());
    }
}

struct Params {
    const json& j;
    std::string path;

    bool has(const char* k) const { return j.contains(k); }
    const json& at(const char* k) const { return require(j, k, path); }
    std::string sub(const char* k) const { return path + "/" + k; }
    double num(const char* k) const { return json_number(at(k), sub(k)); }
    double num(const char* k, double dflt) const { return has(k) ? num(k) : dflt; }
    long integer(const char* k, long dflt) const {
        if (!has(k)) return dflt;
        if (!j.at(k).is_number_integer()) throw SchemaError(sub(k), "expected an integer");
        return j.at(k).get<long>();
    }
    std::string str(const char* k, const std::string& dflt) const {
        if (!has(k)) return dflt;
        if (!j.at(k).is_string()) throw SchemaError(sub(k), "expected a string");
        return j.at(k).get<std::string>();
    }
    std::vector<double> numbers(const char* k) const {
        const json& a = at(k);
        if (!a.is_array() || a.empty()) throw SchemaError(sub(k), "expected a nonempty array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < a.size(); ++i) out.push_back(json_number(a[i], sub(k) + "/" + std::to_string(i)));
        return out;
    }
    CurvatureProfile profile(const char* k) const {
        return at_path(sub(k), [&] { return profile_from_json(at(k), sub(k)); });
    }
    ParamCurve curve(const char* k) const {
        return at_path(sub(k), [&] { return curves::curve_from_json(at(k), sub(k)); });
    }
    WeightWindow window(const char* k) const {
        return at_path(sub(k), [&] { return window_from_json(at(k), sub(k)); });
    }
};

inline std::string plot_stub(const std::string& csv, const std::string& xcol, const std::string& ycol) {
    return "# Plotting stub: edit freely.\n"
           "import csv\n"
           "import matplotlib.pyplot as plt\n\n"
           "with open(\"" + csv + "\", newline=\"\") as f:\n"
           "    rows = list(csv.DictReader(f))\n"
           "x = [float(r[\"" + xcol + "\"]) for r in rows]\n"
           "y = [float(r[\"" + ycol + "\"]) for r in rows]\n"
           "plt.plot(x, y, \".-\")\n"
           "plt.xlabel(\"" + xcol + "\")\n"
           "plt.ylabel(\"" + ycol + "\")\n"
           "plt.savefig(\"" + csv.substr(0, csv.size() - 4) + ".png\")\n";
}

// +inf is not representable in JSON numbers.
inline json json_real(double v) {
    if (std::isinf(v)) return v > 0 ? json("+inf") : json("-inf");
    if (std::isnan(v)) return json("nan");
    return v;
}

inline RunResult run_kcrit(const Params& p) {
    reject_unknown(p.j, {"profile", "s_max", "method", "bracket_tol", "tol"}, p.path);
    const auto profile = p.profile("profile");
    const double s_max = p.num("s_max", 20.0);
    const double bracket_tol = p.num("bracket_tol", 1e-10);
    const double tol = p.num("tol", 1e-12);
    const std::string method = p.str("method", "both");
    RunResult r;
    io::CsvTable ladder({"s", "kappa_s"});
    auto emit_ladder = [&](const CriticalCurvatureEstimate& e) {
        for (const auto& [s, k] : e.ladder) ladder.add_numbers({s, k});
    };
    if (method == "shooting-family") {
        const auto e = kcrit_shooting(profile, s_max, tol);
        r.results = to_json(e);
        emit_ladder(e);
    } else if (method == "bounded-backward") {
        const auto e = kcrit_bounded_backward(profile, s_max, bracket_tol, tol);
        r.results = to_json(e);
    } else if (method == "both") {
        const auto sh = kcrit_shooting(profile, s_max, tol);
        const auto bb = kcrit_bounded_backward(profile, s_max, bracket_tol, tol);
        emit_ladder(sh);
        const double gap = std::abs(sh.value - bb.value);
        const double radii = sh.error_radius + bb.error_radius;
        // Report the tighter enclosure as the headline value.
        const auto& best = bb.error_radius <= sh.error_radius ? bb : sh;
        r.results = to_json(best);
        r.results["ladder"] = to_json(sh)["ladder"];
        r.results["cross_validation"] = {{"shooting", to_json(sh)},
                                         {"bounded_backward", to_json(bb)},
                                         {"gap", gap},
                                         {"combined_radius", radii},
                                         {"agree", gap <= radii}};
        if (gap > radii) r.status = RunStatus::violated;
    } else {
        throw SchemaError(p.sub("method"), "expected \"shooting-family\", \"bounded-backward\" or \"both\"");
    }
    r.files["kcrit_ladder.csv"] = ladder.str();
    r.files["kcrit.json"] = r.results.dump(2) + "\n";
    return r;
}

inline RunResult run_admissibility(const Params& p, unsigned threads) {
    reject_unknown(p.j, {"curve", "window", "K", "profiles", "s_max", "n_samples", "bracket_tol"}, p.path);
    const auto curve = p.curve("curve");
    const auto window = p.window("window");
    RayProfiles rays;
    if (p.has("K") == p.has("profiles"))
        throw SchemaError(p.path, "give exactly one of \"K\" (constant curvature) or \"profiles\"");
    if (p.has("K")) {
        const double K = p.num("K");
        rays = at_path(p.sub("K"), [&] { return constant_ray_profiles(K); });
    } else {
        const Params pr{p.at("profiles"), p.sub("profiles")};
        reject_unknown(pr.j, {"plus", "minus"}, pr.path);
        const auto plus = pr.profile("plus");
        const auto minus = pr.profile("minus");
        rays = [plus, minus](double) { return std::pair{plus, minus}; };
    }
    AdmissibilityOptions opt;
    opt.s_max = p.num("s_max", opt.s_max);
    opt.n_samples = static_cast<int>(p.integer("n_samples", opt.n_samples));
    opt.bracket_tol = p.num("bracket_tol", opt.bracket_tol);
    opt.threads = threads;
    const auto rep = check_curve(curve, window, rays, opt);
    RunResult r;
    r.results = rep.envelope();
    r.files["admissibility.csv"] = rep.to_csv();
    r.files["plot_admissibility.py"] = plot_stub("admissibility.csv", "s", "margin");
    if (rep.verdict == Verdict::violated) r.status = RunStatus::violated;
    return r;
}

inline RunResult run_circle_threshold(const Params& p) {
    reject_unknown(p.j, {"K0", "K1", "kappa_range"}, p.path);
    const double K0 = p.num("K0"), K1 = p.num("K1");
    const double thr = at_path(p.path, [&] { return circle_radius_threshold(K0, K1); });
    RunResult r;
    r.results = {{"K0", K0}, {"K1", K1}, {"threshold", json_real(thr)}};
    if (p.has("kappa_range")) {
        const auto kr = p.numbers("kappa_range");
        if (kr.size() != 2) throw SchemaError(p.sub("kappa_range"), "expected [kappa_min, kappa_max]");
        const auto band = at_path(p.sub("kappa_range"), [&] { return criterion_band(kr[0], kr[1], K0, K1); });
        r.results["band"] = to_string(band);
    }
    io::CsvTable t({"K0", "K1", "threshold"});
    t.add_numbers({K0, K1, thr});
    r.files["circle_threshold.csv"] = t.str();
    return r;
}

inline RunResult run_phase_check(const Params& p, std::uint64_t seed, unsigned threads) {
    reject_unknown(p.j, {"curve1", "curve2", "margin", "random_pairs", "n_samples", "checks"}, p.path);
    const int n = static_cast<int>(p.integer("n_samples", 1000));
    std::vector<ModelCurvePair> pairs;
    if (p.has("random_pairs")) {
        if (p.has("curve1") || p.has("curve2")) throw SchemaError(p.sub("random_pairs"), "conflicts with curve1/curve2");
        std::mt19937_64 rng(seed);
        const long count = p.integer("random_pairs", 1);
        if (count < 1) throw SchemaError(p.sub("random_pairs"), "must be >= 1");
        for (long i = 0; i < count; ++i) pairs.push_back(random_hyperbolic_pair(rng, p.num("margin", 0.1)));
    } else {
        const auto c1 = p.curve("curve1");
        const auto c2 = p.curve("curve2");
        const double margin = p.num("margin", 0.1);
        pairs.push_back(at_path(p.path, [&] { return make_model_pair(c1, c2, margin); }));
    }
    bool mixed = true, pure = true;
    if (p.has("checks")) {
        const json& cs = p.at("checks");
        if (!cs.is_array()) throw SchemaError(p.sub("checks"), "expected an array");
        mixed = pure = false;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (cs[i] == "mixed")
                mixed = true;
            else if (cs[i] == "pure")
                pure = true;
            else
                throw SchemaError(p.sub("checks") + "/" + std::to_string(i), "expected \"mixed\" or \"pure\"");
        }
    }
    RunResult r;
    std::vector<PhaseRow> all_rows;
    double max_ratio = 0.0, max_err = 0.0;
    std::size_t violations = 0, failures = 0;
    io::CsvTable pure_csv({"pair", "s", "t", "variable", "fd", "predicted", "sign", "error"});
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (mixed) {
            auto rep = check_mixed_bound(pairs[i], n, threads);
            max_ratio = std::max(max_ratio, rep.max_ratio);
            violations += rep.violations;
            all_rows.insert(all_rows.end(), rep.rows.begin(), rep.rows.end());
        }
        if (pure && (pairs[i].curve1.has_curvature() || pairs[i].curve2.has_curvature())) {
            auto rep = check_pure_second(pairs[i], n, threads);
            max_err = std::max(max_err, rep.max_error);
            failures += rep.failures;
            for (const auto& row : rep.rows) {
                const double pred = row.sign >= 0 ? row.predicted_plus : row.predicted_minus;
                pure_csv.add_row({std::to_string(i), io::format_double(row.s), io::format_double(row.t),
                                  std::string(1, row.variable), io::format_double(row.fd), io::format_double(pred),
                                  std::to_string(row.sign), io::format_double(row.error)});
            }
        }
    }
    r.results = {{"pairs", pairs.size()}, {"samples_per_pair", n}};
    if (mixed) {
        r.results["mixed_bound"] = {{"max_ratio", max_ratio}, {"violations", violations}};
        r.files["phase.csv"] = phase_csv(all_rows);
        r.files["plot_phase.py"] = plot_stub("phase.csv", "phi", "bound_ratio");
    }
    if (pure) {
        r.results["pure_second"] = {{"max_error", max_err}, {"failures", failures}};
        r.files["pure_second.csv"] = pure_csv.str();
    }
    if (violations > 0 || failures > 0) r.status = RunStatus::violated;
    return r;
}

inline std::vector<long> n_list_from(const Params& p) {
    if (p.has("n_list")) {
        std::vector<long> out;
        const json& a = p.at("n_list");
        if (!a.is_array() || a.empty()) throw SchemaError(p.sub("n_list"), "expected a nonempty integer array");
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!a[i].is_number_integer()) throw SchemaError(p.sub("n_list") + "/" + std::to_string(i), "expected an integer");
            out.push_back(a[i].get<long>());
        }
        return out;
    }
    const auto lr = p.numbers("lambda_range");
    if (lr.size() != 3 || !(lr[2] > 0.0) || lr[1] < lr[0])
        throw SchemaError(p.sub("lambda_range"), "expected [lo, hi, step] with step > 0");
    std::vector<long> out;
    for (double l = lr[0]; l <= lr[1] + 1e-9; l += lr[2]) out.push_back(std::lround(l * l));
    return out;
}

inline RunResult run_decay_scan(const Params& p, unsigned threads) {
    reject_unknown(p.j, {"curve", "window", "n_list", "lambda_range", "expect_slope"}, p.path);
    const auto curve = p.curve("curve");
    const auto window = p.window("window");
    const auto ns = n_list_from(p);
    const auto fit = at_path(p.path, [&] { return decay_scan(curve, window, ns, threads); });
    RunResult r;
    r.results = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual},
                 {"points", fit.points.size()}};
    if (p.has("expect_slope")) {
        const auto es = p.numbers("expect_slope");
        if (es.size() != 2) throw SchemaError(p.sub("expect_slope"), "expected [lo, hi]");
        const bool ok = fit.slope >= es[0] && fit.slope <= es[1];
        r.results["expectation_met"] = ok;
        if (!ok) r.status = RunStatus::violated;
    }
    r.files["decay.csv"] = decay_csv(fit);
    r.files["plot_decay.py"] = plot_stub("decay.csv", "lambda", "extremal_norm");
    return r;
}

inline RunResult run_segment_saturation(const Params& p) {
    reject_unknown(p.j, {"direction", "window", "k_max", "length", "origin"}, p.path);
    const auto dir = p.numbers("direction");
    if (dir.size() != 2) throw SchemaError(p.sub("direction"), "expected [a, b]");
    const auto window = p.window("window");
    const int k_max = static_cast<int>(p.integer("k_max", 8));
    const double length = p.num("length", 1.0);
    Vec2 origin{0.0, 0.0};
    if (p.has("origin")) {
        const auto o = p.numbers("origin");
        if (o.size() != 2) throw SchemaError(p.sub("origin"), "expected [x, y]");
        origin = {o[0], o[1]};
    }
    const auto res = at_path(p.path, [&] { return segment_saturation({dir[0], dir[1]}, window, k_max, length, origin); });
    io::CsvTable t({"k", "m1", "m2", "phase_drift", "abs_integral", "window_mass"});
    for (const auto& row : res.rows)
        t.add_numbers({static_cast<double>(row.k), static_cast<double>(row.m.x), static_cast<double>(row.m.y),
                       row.phase_drift, row.magnitude, res.window_mass});
    RunResult r;
    r.results = {{"rational", res.rational},
                 {"window_mass", res.window_mass},
                 {"deepest_ratio", res.rows.empty() ? 0.0 : res.rows.back().magnitude / res.window_mass}};
    r.files["saturation.csv"] = t.str();
    return r;
}

inline RunResult run_zonal(const Params& p) {
    reject_unknown(p.j, {"k_list", "k_max"}, p.path);
    std::vector<int> ks;
    if (p.has("k_list")) {
        for (double k : p.numbers("k_list")) ks.push_back(static_cast<int>(k));
    } else {
        const long kmax = p.integer("k_max", 400);
        if (kmax < 0) throw SchemaError(p.sub("k_max"), "must be >= 0");
        for (int k = 0; k <= kmax; ++k) ks.push_back(k);
    }
    io::CsvTable t({"k", "zonal_value"});
    double min_even = std::numeric_limits<double>::infinity();
    for (int k : ks) {
        const double z = at_path(p.path, [&] { return zonal_great_circle(k); });
        t.add_numbers({static_cast<double>(k), z});
        if (k > 0 && k % 2 == 0) min_even = std::min(min_even, std::abs(z));
    }
    RunResult r;
    r.results = {{"count", ks.size()}, {"min_abs_even_positive", json_real(min_even)}};
    r.files["zonal.csv"] = t.str();
    r.files["plot_zonal.py"] = plot_stub("zonal.csv", "k", "zonal_value");
    return r;
}

inline RunResult run_kuznecov(const Params& p, unsigned threads) {
    reject_unknown(p.j, {"curve", "window", "lambdas", "allow_beyond_cap"}, p.path);
    const auto curve = p.curve("curve");
    const auto window = p.window("window");
    const auto lams = p.numbers("lambdas");
    if (p.has("allow_beyond_cap") && !p.at("allow_beyond_cap").is_boolean())
        throw SchemaError(p.sub("allow_beyond_cap"), "expected a boolean");
    SpectralOptions opt{threads, p.has("allow_beyond_cap") && p.at("allow_beyond_cap").get<bool>()};
    const auto sw = kuznecov_sweep(curve, window, lams, opt);
    io::CsvTable t({"Lambda", "kuznecov_sum"});
    json ratios = json::array();
    for (const auto& pt : sw.points) {
        t.add_numbers({pt.lambda, pt.sum});
        ratios.push_back(pt.lambda > 0 ? json(pt.sum / pt.lambda) : json(nullptr));
    }
    RunResult r;
    r.results = {{"probe_error", sw.probe_error}, {"nodes", sw.nodes}, {"sum_over_lambda", ratios}};
    r.files["kuznecov.csv"] = t.str();
    r.files["plot_kuznecov.py"] = plot_stub("kuznecov.csv", "Lambda", "kuznecov_sum");
    return r;
}

inline RunResult run_windowed_sum(const Params& p, unsigned threads) {
    reject_unknown(p.j, {"curve", "window", "lambdas", "T", "mode"}, p.path);
    const auto curve = p.curve("curve");
    const auto window = p.window("window");
    const auto lams = p.numbers("lambdas");
    const double T = p.num("T");
    const std::string m = p.str("mode", "sharp");
    WindowMode mode;
    if (m == "sharp")
        mode = WindowMode::sharp;
    else if (m == "smooth")
        mode = WindowMode::smooth;
    else
        throw SchemaError(p.sub("mode"), "expected \"sharp\" or \"smooth\"");
    io::CsvTable t({"lambda", "windowed_sum"});
    double probe = 0.0;
    for (double l : lams) {
        const auto w = windowed_sum(curve, window, l, T, mode, {threads, false});
        t.add_numbers({l, w.value});
        probe = std::max(probe, w.probe_error);
    }
    RunResult r;
    r.results = {{"mode", m}, {"T", T}, {"probe_error", probe}};
    r.files["windowed.csv"] = t.str();
    r.files["plot_windowed.py"] = plot_stub("windowed.csv", "lambda", "windowed_sum");
    return r;
}

}  // namespace detail

inline RunResult run_experiment(const ExperimentConfig& c, unsigned threads = 1) {
    const detail::Params p{c.params, "/params"};
    const std::string& e = c.experiment;
    if (e == "kcrit") return detail::run_kcrit(p);
    if (e == "admissibility") return detail::run_admissibility(p, threads);
    if (e == "circle-threshold") return detail::run_circle_threshold(p);
    if (e == "phase-check") return detail::run_phase_check(p, c.seed, threads);
    if (e == "decay-scan") return detail::run_decay_scan(p, threads);
    if (e == "segment-saturation") return detail::run_segment_saturation(p);
    if (e == "zonal") return detail::run_zonal(p);
    if (e == "kuznecov") return detail::run_kuznecov(p, threads);
    if (e == "windowed-sum") return detail::run_windowed_sum(p, threads);
    throw SchemaError("/experiment", "unknown experiment kind");
}

// Runs the experiment and writes every output plus manifest.json atomically.
inline RunResult run_and_write(const ExperimentConfig& c, const std::filesystem::path& out_dir, unsigned threads = 1) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult r = run_experiment(c, threads);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json outputs = json::array();
    for (const auto& [name, content] : r.files) {
        io::write_file_atomic(out_dir / name, content);
        outputs.push_back(name);
    }
    json manifest = {
        {"experiment", c.experiment},
        {"config", c.raw},
        {"seed", c.seed},
        {"status", r.status == RunStatus::ok ? "ok" : "violated"},
        {"results", r.results},
        {"outputs", outputs},
        {"versions", {{"curvlab", kVersion}, {"compiler", __VERSION__}, {"fftw", std::string(fftw_version)}}},
        {"timings", {{"seconds", secs}, {"threads", threads}}},
    };
    io::write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return r;
}

}  // namespace curvlab
