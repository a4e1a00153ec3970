#include "ndo/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

#include "ndo/errors.hpp"

namespace ndo {

using nlohmann::json;

Engine parse_engine(const std::string& s) {
    if (s == "master") return Engine::Master;
    if (s == "qsd") return Engine::Qsd;
    if (s == "semiclassical") return Engine::Semiclassical;
    if (s == "all") return Engine::All;
    throw ValidationError("engine: expected one of master|qsd|semiclassical|all, got '" + s +
                          "'");
}

std::string to_string(Engine e) {
    switch (e) {
        case Engine::Master: return "master";
        case Engine::Qsd: return "qsd";
        case Engine::Semiclassical: return "semiclassical";
        case Engine::All: return "all";
    }
    return "?";
}

namespace {

const std::pair<Task, const char*> kTaskNames[] = {
    {Task::Hysteresis, "hysteresis"},
    {Task::Bistable, "bistable"},
    {Task::AmplitudeScan, "amplitude-scan"},
    {Task::Scaling, "scaling"},
    {Task::PulsedWigner, "pulsed-wigner"},
    {Task::PurityScan, "purity-scan"},
    {Task::ChaosEnsemble, "chaos-ensemble"},
    {Task::ChaosSnapshot, "chaos-snapshot"},
    {Task::LyapunovSweep, "lyapunov-sweep"},
    {Task::MinMaxSweep, "minmax-sweep"},
};

}  // namespace

Task parse_task(const std::string& s) {
    for (const auto& [task, name] : kTaskNames)
        if (s == name) return task;
    std::string all;
    for (const auto& [task, name] : kTaskNames) {
        if (!all.empty()) all += "|";
        all += name;
    }
    throw ValidationError("task: expected one of " + all + ", got '" + s + "'");
}

std::string to_string(Task t) {
    for (const auto& [task, name] : kTaskNames)
        if (t == task) return name;
    return "?";
}

DampingConvention parse_convention(const std::string& s) {
    if (s == "half") return DampingConvention::Half;
    if (s == "full") return DampingConvention::Full;
    throw ValidationError("damping_convention: expected half|full, got '" + s + "'");
}

std::string to_string(DampingConvention c) {
    return c == DampingConvention::Half ? "half" : "full";
}

double phase_for(const std::vector<PhasePoint>& table, double omega) {
    if (table.empty()) return 0.0;
    for (const auto& p : table)
        if (omega <= p.upto) return p.t0;
    return table.back().t0;
}

namespace {

// --- JSON field helpers: every error names the offending field. -------------

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ValidationError(path + ": " + what);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.count(key)) fail(path, "unknown key '" + key + "'");
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

double opt_number(const json& j, const std::string& path, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    return get_number(j.at(key), path + "." + key);
}

int opt_int(const json& j, const std::string& path, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
    return v.get<int>();
}

bool opt_bool(const json& j, const std::string& path, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
    return v.get<bool>();
}

std::string opt_string(const json& j, const std::string& path, const char* key,
                       const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

// A value axis is either an explicit array of numbers or {from, to, step}.
std::vector<double> read_axis(const json& j, const std::string& path) {
    std::vector<double> out;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }
    if (j.is_object()) {
        check_keys(j, path, {"from", "to", "step"});
        if (!j.contains("from") || !j.contains("to") || !j.contains("step"))
            fail(path, "range form needs from, to, and step");
        double from = get_number(j.at("from"), path + ".from");
        double to = get_number(j.at("to"), path + ".to");
        double step = get_number(j.at("step"), path + ".step");
        if (!(step > 0.0)) fail(path + ".step", "must be > 0");
        if (to < from) fail(path, "to must be >= from");
        long n = std::lround((to - from) / step);
        for (long k = 0; k <= n; ++k) {
            double v = from + static_cast<double>(k) * step;
            if (v <= to + 1e-12 * (1.0 + std::abs(to))) out.push_back(v);
        }
        return out;
    }
    fail(path, "expected an array of numbers or {from, to, step}");
}

std::vector<PhasePoint> read_phase_table(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of {upto, t0} objects");
    std::vector<PhasePoint> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        check_keys(j[i], p, {"upto", "t0"});
        if (!j[i].contains("upto") || !j[i].contains("t0")) fail(p, "needs upto and t0");
        PhasePoint pt;
        pt.upto = get_number(j[i].at("upto"), p + ".upto");
        pt.t0 = get_number(j[i].at("t0"), p + ".t0");
        if (!out.empty() && pt.upto <= out.back().upto) fail(p + ".upto", "must be increasing");
        out.push_back(pt);
    }
    return out;
}

ModelParams read_model(const json& j) {
    check_keys(j, "model", {"delta", "chi", "omega", "gamma", "n_bath"});
    ModelParams p;
    p.delta = opt_number(j, "model", "delta", 0.0);
    p.chi = opt_number(j, "model", "chi", 0.0);
    p.omega_drive = opt_number(j, "model", "omega", 0.0);
    p.gamma = opt_number(j, "model", "gamma", 1.0);
    p.n_bath = opt_number(j, "model", "n_bath", 0.0);
    return p;
}

DriveEnvelope read_drive(const json& j) {
    check_keys(j, "drive", {"kind", "t0", "T", "tau", "pulse_count"});
    std::string kind = opt_string(j, "drive", "kind", "constant");
    if (kind == "constant") {
        for (const char* key : {"t0", "T", "tau", "pulse_count"})
            if (j.contains(key))
                fail(std::string("drive.") + key, "not valid for kind=constant");
        return DriveEnvelope::constant();
    }
    if (kind != "pulse-train") fail("drive.kind", "expected constant|pulse-train");
    DriveEnvelope env;
    env.kind = DriveEnvelope::Kind::PulseTrain;
    env.t0 = opt_number(j, "drive", "t0", 0.0);
    env.T = opt_number(j, "drive", "T", 1.0);
    env.tau = opt_number(j, "drive", "tau", 1.0);
    if (j.contains("pulse_count") && !j.at("pulse_count").is_null()) {
        if (!j.at("pulse_count").is_number_integer())
            fail("drive.pulse_count", "expected an integer");
        env.pulse_count = j.at("pulse_count").get<long>();
    }
    return env;
}

GridConfig read_grid(const json& j) {
    check_keys(j, "grid",
               {"dim", "t_final", "record_dt", "snapshot_times", "wigner",
                "wigner_auto_expand"});
    GridConfig g;
    g.dim = opt_int(j, "grid", "dim", 0);
    g.t_final = opt_number(j, "grid", "t_final", g.t_final);
    g.record_dt = opt_number(j, "grid", "record_dt", g.record_dt);
    if (j.contains("snapshot_times"))
        g.snapshot_times = read_axis(j.at("snapshot_times"), "grid.snapshot_times");
    if (j.contains("wigner")) {
        const json& w = j.at("wigner");
        check_keys(w, "grid.wigner", {"xmin", "xmax", "ymin", "ymax", "nx", "ny"});
        g.wigner.xmin = opt_number(w, "grid.wigner", "xmin", g.wigner.xmin);
        g.wigner.xmax = opt_number(w, "grid.wigner", "xmax", g.wigner.xmax);
        g.wigner.ymin = opt_number(w, "grid.wigner", "ymin", g.wigner.ymin);
        g.wigner.ymax = opt_number(w, "grid.wigner", "ymax", g.wigner.ymax);
        g.wigner.nx = opt_int(w, "grid.wigner", "nx", g.wigner.nx);
        g.wigner.ny = opt_int(w, "grid.wigner", "ny", g.wigner.ny);
    }
    g.wigner_auto_expand = opt_bool(j, "grid", "wigner_auto_expand", true);
    return g;
}

EnsembleConfig read_ensemble(const json& j) {
    check_keys(j, "ensemble", {"seeds", "trajectories", "seed_base", "dt"});
    EnsembleConfig e;
    if (j.contains("seeds")) {
        const json& s = j.at("seeds");
        if (!s.is_array()) fail("ensemble.seeds", "expected an array of integers");
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::string p = "ensemble.seeds[" + std::to_string(i) + "]";
            if (!s[i].is_number_integer()) fail(p, "expected an integer");
            if (s[i].is_number_integer() && s[i].get<long long>() < 0)
                fail(p, "must be >= 0");
            e.seeds.push_back(s[i].get<std::uint64_t>());
        }
    }
    e.trajectories = opt_int(j, "ensemble", "trajectories", 0);
    if (j.contains("seed_base")) {
        const json& v = j.at("seed_base");
        if (!v.is_number_integer() || v.get<long long>() < 0)
            fail("ensemble.seed_base", "expected an integer >= 0");
        e.seed_base = v.get<std::uint64_t>();
    }
    e.dt = opt_number(j, "ensemble", "dt", e.dt);
    return e;
}

SweepSpec read_sweep(const json& j) {
    check_keys(j, "sweep", {"omega", "pulse_T", "pulse_tau", "lambda", "t0_max", "t0_min"});
    SweepSpec s;
    if (j.contains("omega")) s.omega = read_axis(j.at("omega"), "sweep.omega");
    if (j.contains("pulse_T")) s.pulse_T = read_axis(j.at("pulse_T"), "sweep.pulse_T");
    if (j.contains("pulse_tau")) s.pulse_tau = read_axis(j.at("pulse_tau"), "sweep.pulse_tau");
    if (j.contains("lambda")) s.lambda = read_axis(j.at("lambda"), "sweep.lambda");
    if (j.contains("t0_max")) s.t0_max = read_phase_table(j.at("t0_max"), "sweep.t0_max");
    if (j.contains("t0_min")) s.t0_min = read_phase_table(j.at("t0_min"), "sweep.t0_min");
    return s;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (name.empty()) throw ValidationError("name: must not be empty");
    if (!std::isfinite(model.gamma) || model.gamma <= 0.0)
        throw ValidationError("model.gamma: must be > 0");
    if (!std::isfinite(model.omega_drive) || model.omega_drive < 0.0)
        throw ValidationError("model.omega: must be >= 0");
    if (!std::isfinite(model.n_bath) || model.n_bath < 0.0)
        throw ValidationError("model.n_bath: must be >= 0");
    if (!std::isfinite(model.delta)) throw ValidationError("model.delta: must be finite");
    if (!std::isfinite(model.chi)) throw ValidationError("model.chi: must be finite");
    if (drive.kind == DriveEnvelope::Kind::PulseTrain) {
        if (!(drive.T > 0.0)) throw ValidationError("drive.T: must be > 0");
        if (!(drive.tau > 0.0)) throw ValidationError("drive.tau: must be > 0");
        if (!std::isfinite(drive.t0) || drive.t0 < 0.0)
            throw ValidationError("drive.t0: must be >= 0");
        if (drive.pulse_count && *drive.pulse_count < 1)
            throw ValidationError("drive.pulse_count: must be >= 1");
    }
    if (grid.dim < 0) throw ValidationError("grid.dim: must be >= 0");
    if (grid.dim > 0 && grid.dim < 2) throw ValidationError("grid.dim: must be >= 2");
    if (!(grid.t_final > 0.0)) throw ValidationError("grid.t_final: must be > 0");
    if (!(grid.record_dt > 0.0)) throw ValidationError("grid.record_dt: must be > 0");
    for (double ts : grid.snapshot_times)
        if (ts < 0.0 || ts > grid.t_final + 1e-9)
            throw ValidationError("grid.snapshot_times: must lie in [0, t_final]");
    if (grid.wigner.nx < 32 || grid.wigner.ny < 32)
        throw ValidationError("grid.wigner.nx/ny: must be >= 32");
    if (!(grid.wigner.xmax > grid.wigner.xmin))
        throw ValidationError("grid.wigner.xmax: must exceed xmin");
    if (!(grid.wigner.ymax > grid.wigner.ymin))
        throw ValidationError("grid.wigner.ymax: must exceed ymin");
    if (ensemble.trajectories < 0)
        throw ValidationError("ensemble.trajectories: must be >= 0");
    if (!(ensemble.dt > 0.0)) throw ValidationError("ensemble.dt: must be > 0");
    if (!(solver.rtol > 0.0)) throw ValidationError("solver.rtol: must be > 0");
    if (!(solver.atol > 0.0)) throw ValidationError("solver.atol: must be > 0");
    for (double om : sweep.omega)
        if (om < 0.0) throw ValidationError("sweep.omega: amplitudes must be >= 0");
    for (double T : sweep.pulse_T)
        if (!(T > 0.0)) throw ValidationError("sweep.pulse_T: durations must be > 0");
    for (double tau : sweep.pulse_tau)
        if (!(tau > 0.0)) throw ValidationError("sweep.pulse_tau: spacings must be > 0");
    for (double lam : sweep.lambda)
        if (!(lam > 0.0)) throw ValidationError("sweep.lambda: factors must be > 0");
}

std::vector<std::uint64_t> ExperimentConfig::seed_list() const {
    if (!ensemble.seeds.empty()) return ensemble.seeds;
    std::vector<std::uint64_t> out;
    for (int k = 0; k < ensemble.trajectories; ++k)
        out.push_back(ensemble.seed_base + static_cast<std::uint64_t>(k));
    return out;
}

ExperimentConfig config_from_json(const json& j) {
    check_keys(j, "config",
               {"name", "task", "engine", "damping_convention", "model", "drive", "grid",
                "ensemble", "solver", "sweep", "output"});
    ExperimentConfig c;
    c.name = opt_string(j, "config", "name", c.name);
    if (j.contains("task")) c.task = parse_task(opt_string(j, "config", "task", ""));
    if (j.contains("engine")) c.engine = parse_engine(opt_string(j, "config", "engine", ""));
    if (j.contains("damping_convention"))
        c.convention = parse_convention(opt_string(j, "config", "damping_convention", ""));
    if (j.contains("model")) c.model = read_model(j.at("model"));
    if (j.contains("drive")) c.drive = read_drive(j.at("drive"));
    if (j.contains("grid")) c.grid = read_grid(j.at("grid"));
    if (j.contains("ensemble")) c.ensemble = read_ensemble(j.at("ensemble"));
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        check_keys(s, "solver", {"rtol", "atol"});
        c.solver.rtol = opt_number(s, "solver", "rtol", c.solver.rtol);
        c.solver.atol = opt_number(s, "solver", "atol", c.solver.atol);
    }
    if (j.contains("sweep")) c.sweep = read_sweep(j.at("sweep"));
    if (j.contains("output")) {
        const json& o = j.at("output");
        check_keys(o, "output", {"dir", "plot_scripts"});
        c.output.dir = opt_string(o, "output", "dir", "");
        c.output.plot_scripts = opt_bool(o, "output", "plot_scripts", false);
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    json j;
    j["name"] = c.name;
    j["task"] = to_string(c.task);
    j["engine"] = to_string(c.engine);
    j["damping_convention"] = to_string(c.convention);
    j["model"] = {{"delta", c.model.delta},
                  {"chi", c.model.chi},
                  {"omega", c.model.omega_drive},
                  {"gamma", c.model.gamma},
                  {"n_bath", c.model.n_bath}};
    if (c.drive.kind == DriveEnvelope::Kind::Constant) {
        j["drive"] = {{"kind", "constant"}};
    } else {
        j["drive"] = {{"kind", "pulse-train"},
                      {"t0", c.drive.t0},
                      {"T", c.drive.T},
                      {"tau", c.drive.tau}};
        if (c.drive.pulse_count) j["drive"]["pulse_count"] = *c.drive.pulse_count;
    }
    j["grid"] = {{"dim", c.grid.dim},
                 {"t_final", c.grid.t_final},
                 {"record_dt", c.grid.record_dt},
                 {"wigner",
                  {{"xmin", c.grid.wigner.xmin},
                   {"xmax", c.grid.wigner.xmax},
                   {"ymin", c.grid.wigner.ymin},
                   {"ymax", c.grid.wigner.ymax},
                   {"nx", c.grid.wigner.nx},
                   {"ny", c.grid.wigner.ny}}},
                 {"wigner_auto_expand", c.grid.wigner_auto_expand}};
    if (!c.grid.snapshot_times.empty()) j["grid"]["snapshot_times"] = c.grid.snapshot_times;
    j["ensemble"] = {{"trajectories", c.ensemble.trajectories},
                     {"seed_base", c.ensemble.seed_base},
                     {"dt", c.ensemble.dt}};
    if (!c.ensemble.seeds.empty()) j["ensemble"]["seeds"] = c.ensemble.seeds;
    j["solver"] = {{"rtol", c.solver.rtol}, {"atol", c.solver.atol}};
    json sw = json::object();
    if (!c.sweep.omega.empty()) sw["omega"] = c.sweep.omega;
    if (!c.sweep.pulse_T.empty()) sw["pulse_T"] = c.sweep.pulse_T;
    if (!c.sweep.pulse_tau.empty()) sw["pulse_tau"] = c.sweep.pulse_tau;
    if (!c.sweep.lambda.empty()) sw["lambda"] = c.sweep.lambda;
    auto phase_json = [](const std::vector<PhasePoint>& t) {
        json a = json::array();
        for (const auto& p : t) a.push_back({{"upto", p.upto}, {"t0", p.t0}});
        return a;
    };
    if (!c.sweep.t0_max.empty()) sw["t0_max"] = phase_json(c.sweep.t0_max);
    if (!c.sweep.t0_min.empty()) sw["t0_min"] = phase_json(c.sweep.t0_min);
    if (!sw.empty()) j["sweep"] = sw;
    json out = json::object();
    if (!c.output.dir.empty()) out["dir"] = c.output.dir;
    if (c.output.plot_scripts) out["plot_scripts"] = true;
    if (!out.empty()) j["output"] = out;
    return j;
}

}  // namespace ndo
