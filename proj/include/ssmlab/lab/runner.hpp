#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ssmlab/analytic.hpp"
#include "ssmlab/errors.hpp"
#include "ssmlab/graddyn.hpp"
#include "ssmlab/lab/config.hpp"
#include "ssmlab/lab/data_gen.hpp"
#include "ssmlab/suffstats.hpp"
#include "ssmlab/version.hpp"

namespace ssmlab::lab {

namespace fs = std::filesystem;

// ---- deterministic serialization helpers ----

/// 17 significant digits: lossless double round-trip in the CSV outputs.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// FNV-1a over the canonical (sorted-key) JSON dump; invariant to key order
/// in the config file.
inline std::string config_hash(const json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::ofstream open_out(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    std::ofstream f(p);
    if (!f) throw io_error("cannot open for writing: " + p.string());
    return f;
}

// ---- manifest ----

struct RunManifest {
    std::string config_hash;
    std::string tool_version = kVersion;
    std::string started_at, finished_at;
    std::string status = "completed"; // completed | diverged
    std::vector<std::string> files;

    json to_json() const {
        return json{{"config_hash", config_hash}, {"tool_version", tool_version},
                    {"started_at", started_at},   {"finished_at", finished_at},
                    {"status", status},           {"files", files}};
    }
};

// ---- training runs ----

struct TrainResult {
    Trajectory trajectory;
    RunManifest manifest;
    ComplexSequence U{std::vector<cplx>{cplx{}}};
    ComplexSequence Y{std::vector<cplx>{cplx{}}};
};

namespace detail_run {

inline void write_trajectory_csv(const fs::path& path, const Trajectory& traj,
                                 const StackedSSM& shape) {
    std::ofstream f = open_out(path);
    f << "step,t,loss_freq,lambda";
    for (std::size_t l = 0; l < shape.depth(); ++l) {
        const std::size_t n = shape.layers[l].dim();
        for (const char* p : {"a", "b", "c"})
            for (std::size_t i = 0; i < n; ++i)
                f << ',' << p << '_' << i << "_l" << l;
    }
    f << '\n';
    for (const TrajectoryRecord& r : traj.records) {
        f << r.step << ',' << fmt17(r.t) << ',' << fmt17(r.loss_freq) << ','
          << fmt17(r.lambda);
        for (double p : r.params) f << ',' << fmt17(p);
        f << '\n';
    }
    if (!f) throw io_error("write failed: " + path.string());
}

inline json trajectory_json(const Trajectory& traj) {
    json records = json::array();
    for (const TrajectoryRecord& r : traj.records)
        records.push_back(json{{"step", r.step},
                               {"t", r.t},
                               {"loss_freq", r.loss_freq},
                               {"lambda", r.lambda},
                               {"params", r.params}});
    return json{{"status", traj.status == RunStatus::completed ? "completed" : "diverged"},
                {"records", std::move(records)}};
}

} // namespace detail_run

inline TrainResult run_train(const ExperimentConfig& cfg, const fs::path& out_dir) {
    TrainResult res;
    res.manifest.config_hash = config_hash(cfg.raw);
    res.manifest.started_at = timestamp_utc();

    auto [U, Y] = generate_data(cfg.data);
    const StackedSSM model = build_model(cfg.model);
    const FreezeMask mask = FreezeMask::uniform(cfg.model.K, cfg.model.freeze);
    TrainSchedule sched{cfg.schedule.tau, cfg.schedule.dt, cfg.schedule.steps,
                        cfg.schedule.record_every, cfg.schedule.integrator};

    res.trajectory = integrate(model, U, Y, mask, sched);
    res.U = U;
    res.Y = Y;
    res.manifest.status =
        res.trajectory.status == RunStatus::completed ? "completed" : "diverged";

    if (cfg.outputs.csv) {
        detail_run::write_trajectory_csv(out_dir / "trajectory.csv", res.trajectory, model);
        res.manifest.files.push_back("trajectory.csv");
    }
    if (cfg.outputs.json_records) {
        std::ofstream f = open_out(out_dir / "trajectory.json");
        f << detail_run::trajectory_json(res.trajectory).dump(2) << '\n';
        res.manifest.files.push_back("trajectory.json");
    }
    if (cfg.outputs.emit_plot_data) {
        std::ofstream f = open_out(out_dir / "curves" / "lambda.csv");
        f << "t,lambda\n";
        for (const TrajectoryRecord& r : res.trajectory.records)
            f << fmt17(r.t) << ',' << fmt17(r.lambda) << '\n';
        res.manifest.files.push_back("curves/lambda.csv");
    }

    res.manifest.finished_at = timestamp_utc();
    std::ofstream mf = open_out(out_dir / "manifest.json");
    mf << res.manifest.to_json().dump(2) << '\n';
    return res;
}

// ---- analytic curve evaluation ----

/// Reduced setup for the product dynamics derived from the experiment's data
/// and symmetric init. The trainer follows tau dtheta/dt = -grad L (with the
/// factor 2 from the squared modulus); the closed forms follow the convention
/// without that factor, so the derived setup halves tau to put both curves on
/// the same time axis.
inline ReducedScalarSetup derive_reduced_setup(const ExperimentConfig& cfg,
                                               const ComplexSequence& U,
                                               const ComplexSequence& Y,
                                               bool empirical_time_axis) {
    if (!cfg.model.init.a0 || !cfg.model.init.b0 || !cfg.model.init.c0)
        throw config_error("config error at 'model.init': reduced-dynamics comparison needs "
                           "symmetric scalar init {a0, b0, c0}");
    const SufficientStats stats = aggregate(U, Y, Weighting::g_weighted(*cfg.model.init.a0));
    ReducedScalarSetup s;
    s.sigma = stats.sigma_real() * cfg.compare.sigma_scale;
    s.eta = stats.eta_real();
    s.tau = empirical_time_axis ? cfg.schedule.tau / 2.0 : cfg.schedule.tau;
    s.lambda0 = (*cfg.model.init.b0) * (*cfg.model.init.c0);
    s.n_dim = static_cast<long>(cfg.model.N);
    return s;
}

inline FixedABSetup derive_fixed_ab_setup(const ExperimentConfig& cfg,
                                          const ComplexSequence& U,
                                          const ComplexSequence& Y) {
    if (!cfg.model.init.a0 || !cfg.model.init.b0 || !cfg.model.init.c0)
        throw config_error("config error at 'model.init': fixed-A,B formulas need symmetric "
                           "scalar init {a0, b0, c0}");
    const SufficientStats stats = aggregate(U, Y, Weighting::plain());
    FixedABSetup s;
    s.a = *cfg.model.init.a0;
    s.b_fixed = *cfg.model.init.b0;
    s.c0 = *cfg.model.init.c0;
    s.sigma = stats.sigma_real();
    s.eta = stats.eta_real();
    s.tau = cfg.schedule.tau;
    s.n_dim = static_cast<long>(cfg.model.N);
    return s;
}

inline void run_analytic(const ExperimentConfig& cfg, const fs::path& out_dir) {
    if (!cfg.analytic)
        throw config_error("config error at 'analytic': section required for this command");
    const AnalyticConfig& ac = *cfg.analytic;
    auto [U, Y] = generate_data(cfg.data);

    auto grid = [&](auto&& eval, const fs::path& file) {
        std::ofstream f = open_out(file);
        f << "t,value\n";
        for (long i = 0; i < ac.points; ++i) {
            const double t = ac.t_max * static_cast<double>(i) / static_cast<double>(ac.points - 1);
            f << fmt17(t) << ',' << fmt17(eval(t)) << '\n';
        }
    };

    if (ac.formula == "appB_c") {
        FixedABSetup s = derive_fixed_ab_setup(cfg, U, Y);
        if (!ac.setup.is_null()) {
            s.a = detail::get_or<double>(ac.setup, "a", "analytic.setup", s.a);
            s.c0 = detail::get_or<double>(ac.setup, "c0", "analytic.setup", s.c0);
            s.sigma = detail::get_or<double>(ac.setup, "sigma", "analytic.setup", s.sigma);
            s.eta = detail::get_or<double>(ac.setup, "eta", "analytic.setup", s.eta);
            s.tau = detail::get_or<double>(ac.setup, "tau", "analytic.setup", s.tau);
            s.n_dim = detail::get_or<long>(ac.setup, "N", "analytic.setup", s.n_dim);
        }
        grid([&](double t) { return c_of_t(t, s); }, out_dir / "curves" / "appB_c.csv");
        return;
    }

    ReducedScalarSetup base = derive_reduced_setup(cfg, U, Y, false);
    if (!ac.setup.is_null()) {
        base.sigma = detail::get_or<double>(ac.setup, "sigma", "analytic.setup", base.sigma);
        base.eta = detail::get_or<double>(ac.setup, "eta", "analytic.setup", base.eta);
        base.tau = detail::get_or<double>(ac.setup, "tau", "analytic.setup", base.tau);
        base.lambda0 = detail::get_or<double>(ac.setup, "lambda0", "analytic.setup", base.lambda0);
        base.n_dim = detail::get_or<long>(ac.setup, "N", "analytic.setup", base.n_dim);
    }

    if (ac.formula == "eq5") {
        grid([&](double t) { return lambda_scalar(t, base); }, out_dir / "curves" / "eq5.csv");
        return;
    }
    // eq6, optionally fanned out over n_values
    std::vector<long> ns = ac.n_values.empty() ? std::vector<long>{base.n_dim} : ac.n_values;
    for (long n : ns) {
        ReducedScalarSetup s = base;
        s.n_dim = n;
        grid([&](double t) { return lambda_ndim(t, s); },
             out_dir / "curves" / ("eq6_N" + std::to_string(n) + ".csv"));
    }
}

// ---- empirical vs analytic comparison ----

struct CompareReport {
    double sup_norm = 0.0;
    double rms = 0.0;
    double threshold = 0.0;
    bool within_threshold = false;
    bool normalized = false; // N > 1 comparisons use value / limit
    bool resampled = false;
    long n_points = 0;
    std::string status = "completed";

    json to_json() const {
        return json{{"sup_norm", sup_norm},
                    {"rms", rms},
                    {"threshold", threshold},
                    {"within_threshold", within_threshold},
                    {"normalized", normalized},
                    {"resampled", resampled},
                    {"n_points", n_points},
                    {"status", status}};
    }
};

inline CompareReport run_compare(const ExperimentConfig& cfg, const fs::path& out_dir) {
    TrainResult train = run_train(cfg, out_dir);
    const ReducedScalarSetup setup = derive_reduced_setup(cfg, train.U, train.Y, true);

    CompareReport rep;
    rep.threshold = cfg.compare.threshold;
    rep.normalized = cfg.model.N > 1;
    if (train.trajectory.status == RunStatus::diverged) rep.status = "diverged";

    const double limit = setup.sigma / setup.eta; // shared limit of both curves
    double sq = 0.0;
    std::ofstream pf = open_out(out_dir / "curves" / "compare.csv");
    pf << "t,empirical,analytic\n";
    for (const TrajectoryRecord& r : train.trajectory.records) {
        const double analytic = cfg.model.N == 1 ? lambda_scalar(r.t, setup)
                                                 : lambda_ndim(r.t, setup);
        double e = r.lambda;
        double a = analytic;
        if (rep.normalized) {
            e /= limit;
            a /= limit;
        }
        pf << fmt17(r.t) << ',' << fmt17(e) << ',' << fmt17(a) << '\n';
        const double d = std::abs(e - a);
        rep.sup_norm = std::max(rep.sup_norm, d);
        sq += d * d;
        ++rep.n_points;
    }
    rep.rms = rep.n_points > 0 ? std::sqrt(sq / static_cast<double>(rep.n_points)) : 0.0;
    rep.within_threshold = rep.sup_norm <= rep.threshold && rep.status == "completed";

    std::ofstream rf = open_out(out_dir / "report.json");
    rf << rep.to_json().dump(2) << '\n';
    return rep;
}

// ---- sweeps ----

/// First time (linear interpolation between records) at which the lambda
/// column reaches `alpha` times its final value; NaN when it never does.
inline double time_to_alpha(const Trajectory& traj, double alpha) {
    if (traj.records.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double target = alpha * traj.records.back().lambda;
    for (std::size_t i = 1; i < traj.records.size(); ++i) {
        const double prev = traj.records[i - 1].lambda;
        const double cur = traj.records[i].lambda;
        if ((prev < target && cur >= target) || (prev > target && cur <= target)) {
            const double frac = (target - prev) / (cur - prev);
            return traj.records[i - 1].t +
                   frac * (traj.records[i].t - traj.records[i - 1].t);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

struct SweepRow {
    json value;
    std::string status; // completed | diverged | error:<what>
    double final_loss = std::numeric_limits<double>::quiet_NaN();
    double time_to_alpha = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool any_failed = false;
};

namespace detail_run {

inline void set_by_path(json& j, const std::string& path, const json& value) {
    json* cur = &j;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) throw config_error("config error at 'sweep.param': empty path segment");
        if (dot == std::string::npos) {
            (*cur)[key] = value;
            return;
        }
        if (!cur->contains(key)) (*cur)[key] = json::object();
        cur = &(*cur)[key];
        start = dot + 1;
    }
}

} // namespace detail_run

/// One training run per sweep value; children run concurrently in isolated
/// per-run directories and are aggregated in value order.
inline SweepResult run_sweep(const ExperimentConfig& cfg, const fs::path& out_dir) {
    if (!cfg.sweep)
        throw config_error("config error at 'sweep': section required for this command");
    const SweepConfig& sw = *cfg.sweep;

    auto child = [&](std::size_t idx) -> SweepRow {
        SweepRow row;
        row.value = sw.values[idx];
        try {
            json cj = cfg.raw;
            detail_run::set_by_path(cj, sw.param, sw.values[idx]);
            const ExperimentConfig ccfg = parse_config(cj);
            const TrainResult r =
                run_train(ccfg, out_dir / ("sweep_" + std::to_string(idx)));
            row.status = r.manifest.status;
            if (!r.trajectory.records.empty())
                row.final_loss = r.trajectory.records.back().loss_freq;
            row.time_to_alpha = time_to_alpha(r.trajectory, sw.alpha);
        } catch (const std::exception& e) {
            row.status = std::string("error:") + e.what();
        }
        return row;
    };

    std::vector<std::future<SweepRow>> futures;
    futures.reserve(sw.values.size());
    for (std::size_t i = 0; i < sw.values.size(); ++i)
        futures.push_back(std::async(std::launch::async, child, i));

    SweepResult res;
    for (auto& f : futures) {
        res.rows.push_back(f.get());
        if (res.rows.back().status != "completed") res.any_failed = true;
    }

    std::ofstream f = open_out(out_dir / "sweep.csv");
    f << "value,status,final_loss_freq,time_to_alpha\n";
    for (const SweepRow& r : res.rows)
        f << r.value.dump() << ',' << r.status << ',' << fmt17(r.final_loss) << ','
          << fmt17(r.time_to_alpha) << '\n';
    return res;
}

// ---- data emission ----

inline void run_gen(const ExperimentConfig& cfg, const fs::path& out_dir) {
    auto [U, Y] = generate_data(cfg.data);
    std::ofstream f = open_out(out_dir / "data.csv");
    f << "k,U_re,U_im,Y_re,Y_im\n";
    for (std::size_t k = 0; k < U.size(); ++k)
        f << k << ',' << fmt17(U[k].real()) << ',' << fmt17(U[k].imag()) << ','
          << fmt17(Y[k].real()) << ',' << fmt17(Y[k].imag()) << '\n';
    if (!f) throw io_error("write failed: " + (out_dir / "data.csv").string());
}

} // namespace ssmlab::lab
