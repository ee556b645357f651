#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "curvlab/acceptance.hpp"
#include "curvlab/experiments.hpp"

namespace {

int report_error(const std::exception& e) {
    if (const auto* s = dynamic_cast<const curvlab::SchemaError*>(&e)) {
        std::cerr << "schema error at " << (s->path.empty() ? "/" : s->path) << ": " << e.what() << "\n";
    } else if (const auto* c = dynamic_cast<const curvlab::Error*>(&e)) {
        std::cerr << c->kind() << " error: " << e.what() << "\n";
    } else {
        std::cerr << "error: " << e.what() << "\n";
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Curvature comparison and eigenfunction period experiments"};
    app.set_version_flag("--version", std::string(curvlab::kVersion));
    app.require_subcommand(1);

    std::string config_path, out_dir;
    unsigned threads = 1;
    auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    std::vector<std::string> overrides;
    std::vector<int> only;
    unsigned verify_threads = 1;
    auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
    verify->add_option("--set", overrides, "Override a tolerance, key=value");
    verify->add_option("--only", only, "Run only these criterion ids");
    verify->add_option("--threads", verify_threads, "Worker threads")->check(CLI::PositiveNumber);
    bool list_keys = false;
    verify->add_flag("--list-tolerances", list_keys, "Print the tolerance keys and defaults");

    double K = -1.0, s_max = 20.0;
    std::string method = "both";
    auto* kcrit = app.add_subcommand("kcrit", "Critical curvature for a constant profile");
    kcrit->add_option("--K", K, "Constant curvature (<= 0)");
    kcrit->add_option("--smax", s_max, "Truncation depth");
    kcrit->add_option("--method", method, "shooting-family, bounded-backward or both")
        ->check(CLI::IsMember({"shooting-family", "bounded-backward", "both"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto cfg = curvlab::load_config(config_path);
            const std::filesystem::path dir = out_dir.empty() ? cfg.output_dir : out_dir;
            const auto r = curvlab::run_and_write(cfg, dir, threads);
            std::cout << r.results.dump(2) << "\n";
            return static_cast<int>(r.status);
        }
        if (*verify) {
            curvlab::acceptance::Options opt;
            opt.threads = verify_threads;
            if (list_keys) {
                for (const auto& [k, v] : opt.tol.fields()) std::cout << k << " = " << *v << "\n";
                return 0;
            }
            for (const auto& kv : overrides) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw curvlab::InvalidArgument("--set expects key=value, got '" + kv + "'");
                opt.tol.set(kv.substr(0, eq), std::stod(kv.substr(eq + 1)));
            }
            int failures = 0;
            curvlab::acceptance::run(opt, only, [&](const curvlab::acceptance::Row& row) {
                std::cout << curvlab::acceptance::format_row(row) << std::endl;
                failures += row.pass ? 0 : 1;
            });
            std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failed") << "\n";
            return failures == 0 ? 0 : 2;
        }
        if (*kcrit) {
            const auto p = curvlab::make_constant_profile(K);
            curvlab::json out;
            if (method == "both") {
                const auto rep = curvlab::kcrit_cross_validate(p, s_max);
                out = curvlab::to_json(rep.shooting);
                out["bounded_backward"] = curvlab::to_json(rep.backward);
                out["gap"] = rep.gap;
            } else if (method == "shooting-family") {
                out = curvlab::to_json(curvlab::kcrit_shooting(p, s_max));
            } else {
                out = curvlab::to_json(curvlab::kcrit_bounded_backward(p, s_max));
            }
            std::cout << out.dump(2) << "\n";
            return 0;
        }
    } catch (const curvlab::DiscrepancyError& e) {
        std::cerr << "discrepancy: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        return report_error(e);
    }
    return 1;
}
