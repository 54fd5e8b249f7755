#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssmlab/errors.hpp"
#include "ssmlab/graddyn.hpp"
#include "ssmlab/ssm.hpp"

// Declarative experiment description. One JSON file per experiment; science
// parameters never come from positional CLI arguments, so a config plus a
// seed fully reproduces a run.

namespace ssmlab::lab {

using nlohmann::json;

enum class DataKind { teacher, sinusoids, noise };

struct SinusoidSpec {
    std::size_t bin = 1;
    double amplitude = 1.0;
    double phase = 0.0;
};

struct TeacherSpec {
    std::vector<double> a, b, c;
};

struct DataConfig {
    DataKind kind = DataKind::sinusoids;
    std::size_t L = 8;
    std::uint64_t seed = 0;
    std::optional<TeacherSpec> teacher;
    std::vector<SinusoidSpec> sinusoids;
    double noise_scale = 1.0;
    bool normalize_eta = false; // rescale (U, Y) so the plain eta equals 1
};

struct InitConfig {
    // Either symmetric scalars or explicit per-dimension lists.
    std::optional<double> a0, b0, c0;
    std::vector<double> a, b, c;
};

struct ModelConfig {
    std::size_t N = 1;
    std::size_t K = 1;
    InitConfig init;
    LayerMask freeze{true, true, true};
};

struct ScheduleConfig {
    double tau = 1.0;
    double dt = 1e-3;
    long steps = 0;
    long record_every = 1;
    Integrator integrator = Integrator::euler;
};

struct OutputConfig {
    std::string directory = "out";
    bool csv = true;
    bool json_records = false;
    bool emit_plot_data = false;
};

struct AnalyticConfig {
    std::string formula = "eq5"; // eq5 | eq6 | appB_c
    double t_max = 1.0;
    long points = 101;
    std::vector<long> n_values; // optional fan-out for eq6
    json setup;                 // optional explicit setup; derived from data/model if absent
};

struct CompareConfig {
    double threshold = 5e-3;
    double sigma_scale = 1.0; // diagnostic knob; 1.0 for honest comparisons
};

struct SweepConfig {
    std::string param; // dotted path into the config, e.g. "model.N"
    std::vector<json> values;
    double alpha = 0.9; // convergence fraction for the time-to-alpha column
};

struct ExperimentConfig {
    DataConfig data;
    ModelConfig model;
    ScheduleConfig schedule;
    OutputConfig outputs;
    std::optional<AnalyticConfig> analytic;
    CompareConfig compare;
    std::optional<SweepConfig> sweep;
    json raw; // parsed document, for hashing and sweep rewrites
};

namespace detail {

[[noreturn]] inline void bad_field(const std::string& path, const std::string& why) {
    throw config_error("config error at '" + path + "': " + why);
}

template <typename T>
T get_or(const json& j, const std::string& key, const std::string& path, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        bad_field(path + "." + key, "wrong type");
    }
}

template <typename T>
T get_req(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) bad_field(path + "." + key, "missing required field");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        bad_field(path + "." + key, "wrong type");
    }
}

inline DataConfig parse_data(const json& j) {
    DataConfig d;
    const std::string kind = get_or<std::string>(j, "kind", "data", "sinusoids");
    if (kind == "teacher") d.kind = DataKind::teacher;
    else if (kind == "sinusoids") d.kind = DataKind::sinusoids;
    else if (kind == "noise") d.kind = DataKind::noise;
    else bad_field("data.kind", "must be teacher, sinusoids, or noise");

    d.L = get_req<std::size_t>(j, "L", "data");
    if (d.L < 1) bad_field("data.L", "must be >= 1");
    d.seed = get_or<std::uint64_t>(j, "seed", "data", 0);
    if (d.kind == DataKind::noise && !j.contains("seed"))
        bad_field("data.seed", "required whenever randomness is used");
    d.noise_scale = get_or<double>(j, "noise_scale", "data", 1.0);
    d.normalize_eta = get_or<bool>(j, "normalize_eta", "data", false);

    if (j.contains("sinusoids")) {
        if (!j.at("sinusoids").is_array()) bad_field("data.sinusoids", "must be an array");
        for (const auto& sj : j.at("sinusoids")) {
            SinusoidSpec s;
            s.bin = get_req<std::size_t>(sj, "bin", "data.sinusoids[]");
            s.amplitude = get_or<double>(sj, "amplitude", "data.sinusoids[]", 1.0);
            s.phase = get_or<double>(sj, "phase", "data.sinusoids[]", 0.0);
            if (s.bin >= d.L) bad_field("data.sinusoids[].bin", "must be < L");
            d.sinusoids.push_back(s);
        }
    }

    if (j.contains("teacher")) {
        TeacherSpec t;
        t.a = get_req<std::vector<double>>(j.at("teacher"), "a", "data.teacher");
        t.b = get_req<std::vector<double>>(j.at("teacher"), "b", "data.teacher");
        t.c = get_req<std::vector<double>>(j.at("teacher"), "c", "data.teacher");
        if (t.a.size() != t.b.size() || t.a.size() != t.c.size() || t.a.empty())
            bad_field("data.teacher", "a, b, c must share a positive length");
        for (double ai : t.a)
            if (!(std::abs(ai) < 1.0)) bad_field("data.teacher.a", "teacher must be stable (|a_i| < 1)");
        d.teacher = std::move(t);
    }
    if (d.kind == DataKind::teacher && !d.teacher)
        bad_field("data.teacher", "required for kind = teacher");
    if (d.kind != DataKind::noise && d.sinusoids.empty() && d.kind != DataKind::teacher)
        bad_field("data.sinusoids", "required for kind = sinusoids");
    return d;
}

inline ModelConfig parse_model(const json& j) {
    ModelConfig m;
    m.N = get_or<std::size_t>(j, "N", "model", 1);
    m.K = get_or<std::size_t>(j, "K", "model", 1);
    if (m.N < 1) bad_field("model.N", "must be >= 1");
    if (m.K < 1) bad_field("model.K", "must be >= 1");

    if (!j.contains("init")) bad_field("model.init", "missing required field");
    const json& ij = j.at("init");
    if (ij.contains("a")) m.init.a = get_req<std::vector<double>>(ij, "a", "model.init");
    if (ij.contains("b")) m.init.b = get_req<std::vector<double>>(ij, "b", "model.init");
    if (ij.contains("c")) m.init.c = get_req<std::vector<double>>(ij, "c", "model.init");
    if (ij.contains("a0")) m.init.a0 = get_req<double>(ij, "a0", "model.init");
    if (ij.contains("b0")) m.init.b0 = get_req<double>(ij, "b0", "model.init");
    if (ij.contains("c0")) m.init.c0 = get_req<double>(ij, "c0", "model.init");

    const bool lists = !m.init.a.empty() || !m.init.b.empty() || !m.init.c.empty();
    const bool scalars = m.init.a0 && m.init.b0 && m.init.c0;
    if (lists) {
        if (m.init.a.size() != m.N || m.init.b.size() != m.N || m.init.c.size() != m.N)
            bad_field("model.init", "per-dimension lists must have length N");
    } else if (!scalars) {
        bad_field("model.init", "provide either {a0, b0, c0} or per-dimension lists {a, b, c}");
    }
    const auto check_a = [&](double v) {
        if (!(std::abs(v) < 1.0)) bad_field("model.init", "initial |a| must be < 1");
    };
    if (m.init.a0) check_a(*m.init.a0);
    for (double v : m.init.a) check_a(v);

    if (j.contains("freeze")) {
        const json& fj = j.at("freeze");
        m.freeze.learn_a = get_or<bool>(fj, "learn_a", "model.freeze", true);
        m.freeze.learn_b = get_or<bool>(fj, "learn_b", "model.freeze", true);
        m.freeze.learn_c = get_or<bool>(fj, "learn_c", "model.freeze", true);
    }
    return m;
}

inline ScheduleConfig parse_schedule(const json& j) {
    ScheduleConfig s;
    s.tau = get_or<double>(j, "tau", "schedule", 1.0);
    s.dt = get_or<double>(j, "dt", "schedule", 1e-3);
    s.steps = get_or<long>(j, "steps", "schedule", 0);
    s.record_every = get_or<long>(j, "record_every", "schedule", 1);
    const std::string integ = get_or<std::string>(j, "integrator", "schedule", "euler");
    if (integ == "euler") s.integrator = Integrator::euler;
    else if (integ == "rk4") s.integrator = Integrator::rk4;
    else bad_field("schedule.integrator", "must be euler or rk4");
    if (!(s.tau > 0.0)) bad_field("schedule.tau", "must be > 0");
    if (!(s.dt > 0.0)) bad_field("schedule.dt", "must be > 0");
    if (s.steps < 0) bad_field("schedule.steps", "must be >= 0");
    if (s.record_every < 1) bad_field("schedule.record_every", "must be >= 1");
    return s;
}

inline OutputConfig parse_outputs(const json& j) {
    OutputConfig o;
    o.directory = get_or<std::string>(j, "directory", "outputs", "out");
    if (j.contains("formats")) {
        o.csv = false;
        o.json_records = false;
        for (const auto& f : j.at("formats")) {
            const std::string s = f.get<std::string>();
            if (s == "csv") o.csv = true;
            else if (s == "json") o.json_records = true;
            else bad_field("outputs.formats", "must contain only csv or json");
        }
    }
    o.emit_plot_data = get_or<bool>(j, "emit_plot_data", "outputs", false);
    return o;
}

inline AnalyticConfig parse_analytic(const json& j) {
    AnalyticConfig a;
    a.formula = get_or<std::string>(j, "formula", "analytic", "eq5");
    if (a.formula != "eq5" && a.formula != "eq6" && a.formula != "appB_c")
        bad_field("analytic.formula", "must be eq5, eq6, or appB_c");
    a.t_max = get_req<double>(j, "t_max", "analytic");
    a.points = get_or<long>(j, "points", "analytic", 101);
    if (!(a.t_max > 0.0)) bad_field("analytic.t_max", "must be > 0");
    if (a.points < 2) bad_field("analytic.points", "must be >= 2");
    a.n_values = get_or<std::vector<long>>(j, "n_values", "analytic", {});
    if (j.contains("setup")) a.setup = j.at("setup");
    return a;
}

} // namespace detail

inline ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw config_error("config error at '<root>': must be a JSON object");
    ExperimentConfig c;
    c.raw = j;
    if (!j.contains("data")) detail::bad_field("data", "missing required section");
    c.data = detail::parse_data(j.at("data"));
    if (j.contains("model")) c.model = detail::parse_model(j.at("model"));
    if (j.contains("schedule")) c.schedule = detail::parse_schedule(j.at("schedule"));
    if (j.contains("outputs")) c.outputs = detail::parse_outputs(j.at("outputs"));
    if (j.contains("analytic")) c.analytic = detail::parse_analytic(j.at("analytic"));
    if (j.contains("compare")) {
        c.compare.threshold = detail::get_or<double>(j.at("compare"), "threshold", "compare", 5e-3);
        c.compare.sigma_scale =
            detail::get_or<double>(j.at("compare"), "sigma_scale", "compare", 1.0);
    }
    if (j.contains("sweep")) {
        SweepConfig s;
        s.param = detail::get_req<std::string>(j.at("sweep"), "param", "sweep");
        if (!j.at("sweep").contains("values") || !j.at("sweep").at("values").is_array() ||
            j.at("sweep").at("values").empty())
            detail::bad_field("sweep.values", "must be a nonempty array");
        for (const auto& v : j.at("sweep").at("values")) s.values.push_back(v);
        s.alpha = detail::get_or<double>(j.at("sweep"), "alpha", "sweep", 0.9);
        if (!(s.alpha > 0.0 && s.alpha < 1.0)) detail::bad_field("sweep.alpha", "must be in (0, 1)");
        c.sweep = std::move(s);
    }
    return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config error: invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

/// Model from the config's init section (symmetric scalars or explicit lists),
/// replicated across K layers.
inline StackedSSM build_model(const ModelConfig& m) {
    std::vector<DiagonalSSM> layers;
    layers.reserve(m.K);
    for (std::size_t l = 0; l < m.K; ++l) {
        if (!m.init.a.empty())
            layers.emplace_back(m.init.a, m.init.b, m.init.c);
        else
            layers.push_back(DiagonalSSM::symmetric(m.N, *m.init.a0, *m.init.b0, *m.init.c0));
    }
    return StackedSSM(std::move(layers));
}

} // namespace ssmlab::lab
