// Experiment runner for frequency-domain SSM learning dynamics.
//
// Exit codes: 0 success, 1 config error, 2 runtime divergence, 3 I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ssmlab/lab/runner.hpp"
#include "ssmlab/version.hpp"

namespace fs = std::filesystem;
using ssmlab::lab::ExperimentConfig;

namespace {

ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed,
                             std::optional<std::string> out_override) {
    std::ifstream f(path);
    if (!f) throw ssmlab::io_error("cannot read config file: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ssmlab::config_error(std::string("config error: invalid JSON: ") + e.what());
    }
    if (seed) j["data"]["seed"] = *seed;
    if (out_override) j["outputs"]["directory"] = *out_override;
    return ssmlab::lab::parse_config(j);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ssmlab: learning dynamics of linear SSMs in the frequency domain"};
    app.set_version_flag("--version", std::string("ssmlab ") + ssmlab::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool quiet = false;
    app.add_option("--config", config_path, "experiment config file (JSON)")->required();
    app.add_option("--seed", seed, "override data.seed");
    app.add_option("--out", out_dir, "override outputs.directory");
    app.add_flag("--quiet", quiet, "suppress progress output");

    auto* cmd_gen = app.add_subcommand("gen", "generate the (U, Y) data pair");
    auto* cmd_train = app.add_subcommand("train", "run a training experiment");
    auto* cmd_analytic = app.add_subcommand("analytic", "evaluate a closed-form curve");
    auto* cmd_compare = app.add_subcommand("compare", "empirical vs analytic comparison");
    auto* cmd_sweep = app.add_subcommand("sweep", "run a parameter sweep");
    auto* cmd_validate = app.add_subcommand("validate", "lint the config and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig cfg = load_config(config_path, seed, out_dir);
        const fs::path out = cfg.outputs.directory;

        if (cmd_validate->parsed()) {
            if (!quiet) std::cout << "config ok (hash " << ssmlab::lab::config_hash(cfg.raw) << ")\n";
            return 0;
        }
        if (cmd_gen->parsed()) {
            ssmlab::lab::run_gen(cfg, out);
            if (!quiet) std::cout << "wrote " << (out / "data.csv").string() << '\n';
            return 0;
        }
        if (cmd_train->parsed()) {
            const auto res = ssmlab::lab::run_train(cfg, out);
            if (!quiet)
                std::cout << "status: " << res.manifest.status << ", records: "
                          << res.trajectory.records.size() << '\n';
            return res.trajectory.status == ssmlab::RunStatus::completed ? 0 : 2;
        }
        if (cmd_analytic->parsed()) {
            ssmlab::lab::run_analytic(cfg, out);
            if (!quiet) std::cout << "wrote curves under " << (out / "curves").string() << '\n';
            return 0;
        }
        if (cmd_compare->parsed()) {
            const auto rep = ssmlab::lab::run_compare(cfg, out);
            if (!quiet)
                std::cout << "sup_norm: " << rep.sup_norm << ", within_threshold: "
                          << (rep.within_threshold ? "yes" : "no") << '\n';
            return rep.status == "completed" ? 0 : 2;
        }
        if (cmd_sweep->parsed()) {
            const auto res = ssmlab::lab::run_sweep(cfg, out);
            if (!quiet) std::cout << "sweep rows: " << res.rows.size() << '\n';
            for (const auto& row : res.rows)
                if (row.status == "diverged") return 2;
            return 0;
        }
    } catch (const ssmlab::config_error& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const ssmlab::io_error& e) {
        std::cerr << e.what() << '\n';
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
    return 0;
}
