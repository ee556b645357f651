#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "curvlab/acceptance.hpp"
#include "curvlab/experiments.hpp"

using namespace curvlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("curvlab_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct CliResult {
    int status;
    std::string out, err;
};

CliResult cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string(CURVLAB_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, io::read_file(out), io::read_file(err)};
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
    const fs::path p = dir / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

}  // namespace

TEST(Config, RejectsUnknownTopLevelField) {
    try {
        parse_config(json{{"experiment", "zonal"}, {"colour", "red"}});
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.path, "/colour");
    }
}

TEST(Config, RejectsUnknownExperiment) {
    EXPECT_THROW(parse_config(json{{"experiment", "nope"}}), SchemaError);
}

TEST(Config, NestedErrorsCarryPath) {
    const auto c = parse_config(json{{"experiment", "kcrit"}, {"params", {{"profile", {{"kind", "constant"}, {"K", 0.5}}}}}});
    try {
        run_experiment(c);
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.path, "/params/profile");
    }
    const auto d = parse_config(json{{"experiment", "kuznecov"},
                                     {"params",
                                      {{"curve", {{"type", "circle"}, {"center", {0, 0}}, {"radius", 1}}},
                                       {"window", {{"kind", "unit"}, {"lo", 0}, {"hi", 6.28}}},
                                       {"lambdas", {10}},
                                       {"allow_beyond_cap", "yes"}}}});
    try {
        run_experiment(d);
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.path, "/params/allow_beyond_cap");
    }
}

TEST(Config, AllSampleConfigsParse) {
    std::size_t count = 0;
    std::set<std::string> kinds;
    for (const auto& entry : fs::directory_iterator(CURVLAB_CONFIGS)) {
        if (entry.path().extension() != ".json") continue;
        const auto c = load_config(entry.path());
        kinds.insert(c.experiment);
        ++count;
    }
    EXPECT_GE(count, 9u);
    EXPECT_EQ(kinds.size(), experiment_kinds().size());
}

TEST(Experiments, KcritHorocycle) {
    const auto r = run_experiment(parse_config(
        json{{"experiment", "kcrit"}, {"params", {{"profile", {{"kind", "constant"}, {"K", -1}}}, {"s_max", 20}}}}));
    EXPECT_EQ(r.status, RunStatus::ok);
    EXPECT_NEAR(r.results.at("kcrit").get<double>(), 1.0, 1e-6);
    EXPECT_TRUE(r.results.at("cross_validation").at("agree").get<bool>());
    EXPECT_TRUE(r.files.count("kcrit_ladder.csv"));
}

TEST(Experiments, CircleThresholdCsv) {
    const auto r = run_experiment(parse_config(json{{"experiment", "circle-threshold"}, {"params", {{"K0", -1}, {"K1", -4}}}}));
    const std::string& csv = r.files.at("circle_threshold.csv");
    EXPECT_NE(csv.find("0.549306"), std::string::npos);
    EXPECT_EQ(csv, "K0,K1,threshold\r\n-1,-4," + io::format_double(0.5 * std::log(3.0)) + "\r\n");
    const auto inf = run_experiment(parse_config(json{{"experiment", "circle-threshold"}, {"params", {{"K0", -1}, {"K1", -1}}}}));
    EXPECT_EQ(inf.results.at("threshold"), "+inf");
    EXPECT_NE(inf.files.at("circle_threshold.csv").find("inf"), std::string::npos);
}

TEST(Experiments, ViolatedVerdictSetsStatus) {
    const auto r = run_experiment(load_config(fs::path(CURVLAB_CONFIGS) / "admissibility_horocycle.json"));
    EXPECT_EQ(r.status, RunStatus::violated);
    EXPECT_EQ(r.results.at("verdict"), "violated");
}

TEST(Experiments, DecayScanExpectation) {
    auto j = json::parse(io::read_file(fs::path(CURVLAB_CONFIGS) / "decay_scan_circle.json"));
    j["params"]["lambda_range"] = {10, 40, 1};
    EXPECT_EQ(run_experiment(parse_config(j)).status, RunStatus::ok);
    j["params"]["expect_slope"] = {0.0, 1.0};
    EXPECT_EQ(run_experiment(parse_config(j)).status, RunStatus::violated);
}

TEST(Experiments, SameSeedSameBytes) {
    const json j{{"experiment", "phase-check"}, {"params", {{"random_pairs", 3}, {"n_samples", 100}}}, {"seed", 7}};
    const auto a = run_experiment(parse_config(j), 1);
    const auto b = run_experiment(parse_config(j), 3);
    EXPECT_EQ(a.files, b.files);
    json k = j;
    k["seed"] = 8;
    EXPECT_NE(run_experiment(parse_config(k)).files.at("phase.csv"), a.files.at("phase.csv"));
}

TEST(Experiments, ManifestWrittenNextToCsv) {
    const auto dir = scratch("manifest");
    const auto cfg = load_config(fs::path(CURVLAB_CONFIGS) / "zonal.json");
    run_and_write(cfg, dir);
    const auto m = json::parse(io::read_file(dir / "manifest.json"));
    EXPECT_EQ(m.at("experiment"), "zonal");
    EXPECT_EQ(m.at("config"), cfg.raw);
    EXPECT_EQ(m.at("status"), "ok");
    EXPECT_TRUE(m.at("versions").contains("fftw"));
    EXPECT_TRUE(m.at("timings").contains("seconds"));
    EXPECT_TRUE(fs::exists(dir / "zonal.csv"));
    for (const auto& e : fs::directory_iterator(dir)) EXPECT_EQ(e.path().string().find(".tmp"), std::string::npos);
    const auto csv = io::read_file(dir / "zonal.csv");
    EXPECT_EQ(csv.substr(0, 15), "k,zonal_value\r\n");
    EXPECT_NE(csv.find("\r\n2,-1.98166364880300"), std::string::npos);
}

TEST(Cli, RunWritesOutputsAndExitsZero) {
    const auto dir = scratch("cli_run");
    const auto r = cli("run " + std::string(CURVLAB_CONFIGS) + "/kcrit_horocycle.json --out " + (dir / "o").string(), dir);
    EXPECT_EQ(r.status, 0) << r.err;
    const auto m = json::parse(io::read_file(dir / "o" / "manifest.json"));
    EXPECT_NEAR(m.at("results").at("kcrit").get<double>(), 1.0, 1e-6);
}

TEST(Cli, RunTwiceGivesIdenticalCsv) {
    const auto dir = scratch("cli_determinism");
    const std::string cfg = std::string(CURVLAB_CONFIGS) + "/phase_check_horocycle_point.json";
    ASSERT_EQ(cli("run " + cfg + " --out " + (dir / "a").string(), dir).status, 0);
    ASSERT_EQ(cli("run " + cfg + " --threads 2 --out " + (dir / "b").string(), dir).status, 0);
    for (const char* f : {"phase.csv", "pure_second.csv"})
        EXPECT_EQ(io::read_file(dir / "a" / f), io::read_file(dir / "b" / f)) << f;
}

TEST(Cli, ViolationExitsTwo) {
    const auto dir = scratch("cli_violated");
    const auto r = cli("run " + std::string(CURVLAB_CONFIGS) + "/admissibility_horocycle.json --out " + (dir / "o").string(), dir);
    EXPECT_EQ(r.status, 2);
    EXPECT_TRUE(fs::exists(dir / "o" / "manifest.json"));
}

TEST(Cli, MalformedConfigExitsOneWithPath) {
    const auto dir = scratch("cli_malformed");
    const auto p = write_config(dir, "bad.json",
                                json{{"experiment", "circle-threshold"}, {"params", {{"K0", "minus one"}, {"K1", -4}}}});
    const auto r = cli("run " + p.string() + " --out " + (dir / "o").string(), dir);
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("/params/K0"), std::string::npos) << r.err;
    std::ofstream(dir / "broken.json") << "{\"experiment\": ";
    EXPECT_EQ(cli("run " + (dir / "broken.json").string(), dir).status, 1);
    EXPECT_EQ(cli("run " + (dir / "missing.json").string(), dir).status, 1);
}

TEST(Cli, KcritSubcommand) {
    const auto dir = scratch("cli_kcrit");
    const auto r = cli("kcrit --K -1 --smax 20", dir);
    ASSERT_EQ(r.status, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_NEAR(j.at("kcrit").get<double>(), 1.0, 1e-6);
    EXPECT_EQ(j.at("ladder").size(), 6u);
    EXPECT_EQ(cli("kcrit --K 0.5", dir).status, 1);
}

TEST(Cli, VerifyPassesAndTamperedToleranceFails) {
    const auto dir = scratch("cli_verify");
    const auto ok = cli("verify --only 6 12", dir);
    EXPECT_EQ(ok.status, 0) << ok.out;
    EXPECT_NE(ok.out.find("[PASS]  6"), std::string::npos);
    const auto bad = cli("verify --only 6 12 --set zonal_floor=3", dir);
    EXPECT_EQ(bad.status, 2);
    EXPECT_NE(bad.out.find("[FAIL] 12"), std::string::npos);
    EXPECT_NE(bad.out.find("[PASS]  6"), std::string::npos);
    EXPECT_EQ(cli("verify --set no_such_key=1", dir).status, 1);
}

TEST(Acceptance, TamperingEachCheapToleranceFlipsItsRow) {
    struct Case {
        int id;
        const char* key;
        double value;
    };
    for (const auto& c : {Case{1, "horocycle", 1e-14}, Case{3, "circle_rel", 1e-17}, Case{6, "threshold_abs", -1.0},
                          Case{11, "saturation_frac", -1.0}, Case{12, "zonal_frac", 1e-9}}) {
        acceptance::Options o;
        EXPECT_TRUE(acceptance::run(o, {c.id}).front().pass) << c.key;
        o.tol.set(c.key, c.value);
        EXPECT_FALSE(acceptance::run(o, {c.id}).front().pass) << c.key;
    }
}
