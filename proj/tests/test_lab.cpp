#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "helpers.hpp"
#include "ssmlab/lab/runner.hpp"

using namespace ssmlab;
using namespace ssmlab::lab;
namespace fs = std::filesystem;

namespace {

json base_config() {
    return json::parse(R"({
        "data": {
            "kind": "teacher",
            "L": 32,
            "seed": 7,
            "sinusoids": [{"bin": 1, "amplitude": 1.0, "phase": 0.0}],
            "teacher": {"a": [0.5], "b": [1.0], "c": [1.0]},
            "normalize_eta": true
        },
        "model": {
            "N": 1, "K": 1,
            "init": {"a0": 0.5, "b0": 0.31622776601683794, "c0": 0.31622776601683794},
            "freeze": {"learn_a": false, "learn_b": true, "learn_c": true}
        },
        "schedule": {"tau": 1.0, "dt": 1e-3, "steps": 3000, "record_every": 20},
        "outputs": {"directory": "out"}
    })");
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ssmlab_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

} // namespace

TEST_CASE("config validation names the offending field") {
    json j = base_config();
    j["data"].erase("L");
    CHECK_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("data.L"));

    j = base_config();
    j["data"]["kind"] = "banana";
    CHECK_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("data.kind"));

    j = base_config();
    j["model"]["init"]["a0"] = 1.5;
    CHECK_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("model.init"));

    j = base_config();
    j["data"]["teacher"]["a"] = {1.0};
    CHECK_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("data.teacher"));

    j = base_config();
    j["schedule"]["integrator"] = "leapfrog";
    CHECK_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("schedule.integrator"));
}

TEST_CASE("config hash is invariant to key order") {
    const std::string a = R"({"data": {"kind": "noise", "L": 8, "seed": 1}, "model": {"N": 2}})";
    const std::string b = R"({"model": {"N": 2}, "data": {"seed": 1, "L": 8, "kind": "noise"}})";
    CHECK(config_hash(json::parse(a)) == config_hash(json::parse(b)));
    const std::string c = R"({"data": {"kind": "noise", "L": 8, "seed": 2}, "model": {"N": 2}})";
    CHECK(config_hash(json::parse(a)) != config_hash(json::parse(c)));
}

TEST_CASE("sinusoid data: one real tone occupies a conjugate pair of bins") {
    json j = base_config();
    j["data"]["kind"] = "sinusoids";
    j["data"]["L"] = 8;
    j["data"].erase("teacher");
    j["data"]["normalize_eta"] = false;
    const auto cfg = parse_config(j);
    const auto [U, Y] = generate_data(cfg.data);
    for (std::size_t k = 0; k < 8; ++k) {
        if (k == 1 || k == 7)
            CHECK(std::abs(U[k]) > 1.0);
        else
            CHECK(std::abs(U[k]) < 1e-10);
    }
    // conjugate symmetry
    CHECK(std::abs(U[1] - std::conj(U[7])) < 1e-10);
}

TEST_CASE("identity teacher reproduces the input spectrum") {
    json j = base_config();
    j["data"]["teacher"] = {{"a", {0.0}}, {"b", {1.0}}, {"c", {1.0}}};
    j["data"]["normalize_eta"] = false;
    const auto cfg = parse_config(j);
    const auto [U, Y] = generate_data(cfg.data);
    for (std::size_t k = 0; k < U.size(); ++k) CHECK(std::abs(U[k] - Y[k]) < 1e-12);
}

TEST_CASE("data generation is deterministic given the seed") {
    json j = base_config();
    j["data"]["kind"] = "noise";
    j["data"].erase("teacher");
    j["data"]["normalize_eta"] = false;
    const auto cfg = parse_config(j);
    const auto [u1, y1] = generate_data(cfg.data);
    const auto [u2, y2] = generate_data(cfg.data);
    for (std::size_t k = 0; k < u1.size(); ++k) {
        CHECK(u1[k] == u2[k]);
        CHECK(y1[k] == y2[k]);
    }
}

TEST_CASE("run_train writes byte-identical CSVs for identical config and seed") {
    TempDir d1, d2;
    const auto cfg = parse_config(base_config());
    run_train(cfg, d1.path);
    run_train(cfg, d2.path);
    CHECK(slurp(d1.path / "trajectory.csv") == slurp(d2.path / "trajectory.csv"));
    CHECK(!slurp(d1.path / "trajectory.csv").empty());
    const json m = json::parse(slurp(d1.path / "manifest.json"));
    CHECK(m.at("status") == "completed");
    CHECK(m.at("config_hash") == config_hash(cfg.raw));
}

TEST_CASE("zero-step schedule writes the header and initial record only") {
    TempDir d;
    json j = base_config();
    j["schedule"]["steps"] = 0;
    run_train(parse_config(j), d.path);
    const std::string csv = slurp(d.path / "trajectory.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(csv.rfind("step,t,loss_freq,lambda", 0) == 0);
}

TEST_CASE("teacher-fit run converges and reduces the loss by 1e6") {
    TempDir d;
    json j = base_config();
    j["schedule"]["steps"] = 8000;
    const auto res = run_train(parse_config(j), d.path);
    REQUIRE(res.trajectory.status == RunStatus::completed);
    const double l0 = res.trajectory.records.front().loss_freq;
    const double lf = res.trajectory.records.back().loss_freq;
    CHECK(lf <= 1e-6 * l0);
}

TEST_CASE("a deliberately huge dt yields a diverged manifest") {
    TempDir d;
    json j = base_config();
    j["model"]["freeze"] = {{"learn_a", true}, {"learn_b", true}, {"learn_c", true}};
    j["model"]["init"] = {{"a0", 0.95}, {"b0", 2.0}, {"c0", 2.0}};
    j["schedule"]["dt"] = 0.9;
    j["schedule"]["steps"] = 200;
    const auto res = run_train(parse_config(j), d.path);
    CHECK(res.trajectory.status == RunStatus::diverged);
    CHECK(json::parse(slurp(d.path / "manifest.json")).at("status") == "diverged");
}

TEST_CASE("run_analytic fans out eq6 curves over n_values") {
    TempDir d;
    json j = base_config();
    j["analytic"] = {{"formula", "eq6"}, {"t_max", 1.0}, {"points", 11},
                     {"n_values", {1, 2, 4, 8}}};
    run_analytic(parse_config(j), d.path);
    for (int n : {1, 2, 4, 8})
        CHECK(fs::exists(d.path / "curves" / ("eq6_N" + std::to_string(n) + ".csv")));
}

TEST_CASE("run_analytic at the fixed point produces a constant column") {
    TempDir d;
    json j = base_config();
    j["analytic"] = {{"formula", "eq5"}, {"t_max", 2.0}, {"points", 21},
                     {"setup", {{"sigma", 1.0}, {"eta", 1.0}, {"lambda0", 1.0}}}};
    run_analytic(parse_config(j), d.path);
    std::istringstream in(slurp(d.path / "curves" / "eq5.csv"));
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        const double v = std::stod(line.substr(line.find(',') + 1));
        CHECK(v == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("run_compare: matched scalar case agrees, scaled sigma flags mismatch") {
    {
        TempDir d;
        json j = base_config();
        j["model"]["init"] = {{"a0", 0.5}, {"b0", 0.1}, {"c0", 0.1}};
        j["schedule"]["dt"] = 2.5e-4;
        j["schedule"]["steps"] = 20000;
        j["schedule"]["record_every"] = 100;
        j["compare"] = {{"threshold", 1e-3}};
        const auto rep = run_compare(parse_config(j), d.path);
        CHECK(rep.sup_norm <= 1e-3);
        CHECK(rep.within_threshold);
        CHECK(fs::exists(d.path / "report.json"));
        CHECK(fs::exists(d.path / "curves" / "compare.csv"));
    }
    {
        TempDir d;
        json j = base_config();
        j["model"]["init"] = {{"a0", 0.5}, {"b0", 0.1}, {"c0", 0.1}};
        j["schedule"]["dt"] = 2.5e-4;
        j["schedule"]["steps"] = 20000;
        j["schedule"]["record_every"] = 100;
        j["compare"] = {{"threshold", 1e-3}, {"sigma_scale", 2.0}};
        const auto rep = run_compare(parse_config(j), d.path);
        CHECK(rep.sup_norm > 1e-3);
        CHECK_FALSE(rep.within_threshold);
    }
}

TEST_CASE("run_sweep: single value behaves like run_train plus one row") {
    TempDir d;
    json j = base_config();
    j["sweep"] = {{"param", "model.N"}, {"values", {1}}, {"alpha", 0.9}};
    const auto res = run_sweep(parse_config(j), d.path);
    REQUIRE(res.rows.size() == 1);
    CHECK(res.rows[0].status == "completed");
    CHECK(fs::exists(d.path / "sweep_0" / "trajectory.csv"));
    CHECK(fs::exists(d.path / "sweep.csv"));
    CHECK(std::isfinite(res.rows[0].time_to_alpha));
}

TEST_CASE("run_sweep: child failures are recorded and do not stop the sweep") {
    TempDir d;
    json j = base_config();
    j["sweep"] = {{"param", "model.N"}, {"values", {1, 0, 2}}, {"alpha", 0.9}};
    const auto res = run_sweep(parse_config(j), d.path);
    REQUIRE(res.rows.size() == 3);
    CHECK(res.rows[0].status == "completed");
    CHECK(res.rows[1].status.rfind("error:", 0) == 0);
    CHECK(res.rows[2].status == "completed");
    CHECK(res.any_failed);
}

TEST_CASE("sweep over dt: smaller steps track the RK4 reference more closely") {
    const auto cfg = parse_config(base_config());
    const auto [U, Y] = generate_data(cfg.data);
    const StackedSSM model = build_model(cfg.model);
    const FreezeMask mask = FreezeMask::uniform(1, cfg.model.freeze);

    auto final_lambda = [&](double dt, Integrator integ) {
        TrainSchedule s{1.0, dt, static_cast<long>(std::llround(1.0 / dt)), 1000000, integ};
        const Trajectory t = integrate(model, U, Y, mask, s);
        REQUIRE(t.status == RunStatus::completed);
        return t.records.back().lambda;
    };
    const double ref = final_lambda(1e-3, Integrator::rk4);
    const double coarse = std::abs(final_lambda(1e-2, Integrator::euler) - ref);
    const double fine = std::abs(final_lambda(1e-3, Integrator::euler) - ref);
    CHECK(fine < coarse);
}
