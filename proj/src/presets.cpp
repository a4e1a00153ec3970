#include "ndo/presets.hpp"

#include <cmath>

#include "ndo/errors.hpp"

namespace ndo {

namespace {

// Pulse spacing shared by all chaotic-regime presets.
const double kTau5 = 2.0 * M_PI / 5.0;

ModelParams bistable_params() {  // the few-quanta bistable operating point
    ModelParams p;
    p.delta = -8.0;
    p.chi = 2.0;
    p.omega_drive = 2.7;
    return p;
}

ModelParams chaos_params() {  // the pulse-driven chaotic operating point
    ModelParams p;
    p.delta = -15.0;
    p.chi = 0.7;
    p.omega_drive = 20.4;
    return p;
}

std::vector<double> linspace_step(double from, double to, double step) {
    std::vector<double> v;
    long n = std::lround((to - from) / step);
    for (long k = 0; k <= n; ++k) v.push_back(from + static_cast<double>(k) * step);
    return v;
}

Preset fig1() {
    Preset pr;
    pr.name = "fig1-hysteresis";
    pr.summary = "mean excitation vs drive amplitude: closed-form quantum curve "
                 "against semiclassical up/down sweep branches (delta=-15, chi=2)";
    ExperimentConfig& c = pr.config;
    c.name = pr.name;
    c.task = Task::Hysteresis;
    c.engine = Engine::All;
    c.model.delta = -15.0;
    c.model.chi = 2.0;
    c.model.omega_drive = 2.7;  // nominal; the sweep axis overrides per point
    c.sweep.omega = linspace_step(0.1, 10.0, 0.1);
    return pr;
}

Preset fig2() {
    Preset pr;
    pr.name = "fig2-bistable";
    pr.summary = "constant-drive bistability at few quanta: steady Wigner peaks, "
                 "classical section, switching trajectory (delta=-8, chi=2, omega=2.7)";
    ExperimentConfig& c = pr.config;
    c.name = pr.name;
    c.task = Task::Bistable;
    c.engine = Engine::All;
    c.model = bistable_params();
    c.grid.t_final = 100.0;
    c.grid.record_dt = 0.05;
    c.grid.snapshot_times = {100.0};
    c.ensemble.trajectories = 8;
    return pr;
}

Preset fig3() {
    Preset pr;
    pr.name = "fig3-amplitude-sweep";
    pr.summary = "steady-state Wigner functions across the bistable window of "
                 "drive amplitudes 2.1..3.1 (delta=-8, chi=2)";
    ExperimentConfig& c = pr.config;
    c.name = pr.name;
    c.task = Task::AmplitudeScan;
    c.engine = Engine::Master;
    c.model = bistable_params();
    c.sweep.omega = {2.1, 2.3, 2.5, 2.7, 2.9, 3.1};
    return pr;
}

Preset fig4() {
    Preset pr;
    pr.name = "fig4-scaling";
    pr.summary = "lambda-scaled steady states (lambda=2,3): classical dynamics is "
                 "invariant while quantum peak structure changes (delta=-8, chi=2, omega=2.7)";
    ExperimentConfig& c = pr.config;
    c.name = pr.name;
    c.task = Task::Scaling;
    c.engine = Engine::All;
    c.model = bistable_params();
    c.sweep.lambda = {2.0, 3.0};
    return pr;
}

Preset fig5() {
    Preset pr;
    pr.name = "fig5-interference";
    pr.summary = "pulse-train interference fringes: over-transient Wigner snapshots "
                 "for pulse durations T=0.5 and T=0.1 at spacing tau=2";
    ExperimentConfig& c = pr.config;
    c.name = pr.name;
    c.task = Task::PulsedWigner;
    c.engine = Engine::Master;
    c.model = bistable_params();
    c.drive = DriveEnvelope::pulse_train(0.0, 0.5, 2.0);
    c.sweep.pulse_T = {0.5, 0.1};
    c.grid.dim = 32;
    c.grid.t_final = 20.5;  // quarter period past the 10th pulse: over-transient
    c.grid.record_dt = 0.1;
    c.grid.snapshot_times = {20.5};
    return pr;
}

Preset fig6() {
    Preset pr;
    pr.name = "fig6-purity";
    pr.summary = "over-transient purity: vs pulse duration T at tau=2.5 fixed, and "
                 "vs spacing tau at T=0.5 fixed (delta=-8, chi=2, omega=2.7)";
    ExperimentConfig& c = pr.config;
    c.name = pr.name;
    c.task = Task::PurityScan;
    c.engine = Engine::Master;
    c.model = bistable_params();
    c.drive = DriveEnvelope::pulse_train(0.0, 0.5, 2.5);  // fixed values of each panel
    c.sweep.pulse_T = {0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.7, 1.0};
    c.sweep.pulse_tau = {1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0};
    c.grid.dim = 32;
    c.grid.t_final = 25.0;
    return pr;
}

Preset chaos_preset(const std::string& name, double T, double t_final) {
    Preset pr;
    pr.name = name;
    pr.summary = "pulse-driven chaotic regime, duration T=" + std::to_string(T).substr(0, 5) +
                 ": trajectory ensemble, classical section, Wigner snapshot "
                 "(chi=0.7, omega=20.4, delta=-15, tau=2pi/5, 10-level reference basis)";
    ExperimentConfig& c = pr.config;
    c.name = name;
    c.task = Task::ChaosEnsemble;
    c.engine = Engine::All;
    c.model = chaos_params();
    c.drive = DriveEnvelope::pulse_train(0.0, T, kTau5);
    c.grid.dim = 10;  // reference-data basis: the published values are defined here
    c.grid.t_final = t_final;
    c.grid.record_dt = 0.1;
    c.grid.snapshot_times = {t_final};
    c.ensemble.trajectories = 500;
    c.ensemble.dt = 2e-4;
    return pr;
}

Preset fig13() {
    Preset pr;
    pr.name = "fig13-lyapunov-sweep";
    pr.summary = "largest Lyapunov exponent vs drive amplitude 1..26 at two "
                 "stroboscopic phase families (chi=0.7, delta=-15, T=0.1, tau=2pi/5)";
    ExperimentConfig& c = pr.config;
    c.name = pr.name;
    c.task = Task::LyapunovSweep;
    c.engine = Engine::Semiclassical;
    c.model = chaos_params();
    c.drive = DriveEnvelope::pulse_train(0.0, 0.1, kTau5);
    c.sweep.omega = linspace_step(1.0, 26.0, 0.5);
    // Sampling phases: one family anchored at the excitation maximum, one at
    // the minimum; each switches its anchor once along the amplitude axis.
    c.sweep.t0_max = {{19.25, 39.1}, {1e30, 39.0}};
    c.sweep.t0_min = {{8.75, 40.2}, {1e30, 40.1}};
    return pr;
}

Preset fig14() {
    Preset pr;
    pr.name = "fig14-minmax-n";
    pr.summary = "late-window excitation extrema and dynamics class (regular / "
                 "transient chaos / chaos) vs drive amplitude 1..26";
    ExperimentConfig& c = pr.config;
    c.name = pr.name;
    c.task = Task::MinMaxSweep;
    c.engine = Engine::Semiclassical;
    c.model = chaos_params();
    c.drive = DriveEnvelope::pulse_train(0.0, 0.1, kTau5);
    c.sweep.omega = linspace_step(1.0, 26.0, 0.5);
    return pr;
}

std::vector<Preset> build_catalog() {
    std::vector<Preset> v;
    v.push_back(fig1());
    v.push_back(fig2());
    v.push_back(fig3());
    v.push_back(fig4());
    v.push_back(fig5());
    v.push_back(fig6());
    v.push_back(chaos_preset("fig7-chaos-T0.25", 0.25, 100.0));
    v.push_back(chaos_preset("fig8-chaos-T0.205", 0.205, 100.0));
    v.push_back(chaos_preset("fig9-chaos-T0.15", 0.15, 100.0));
    v.push_back(chaos_preset("fig10-chaos-T0.1", 0.1, 100.0));
    {
        Preset pr = chaos_preset("fig11-max-n", 0.1, 100.6);
        pr.config.task = Task::ChaosSnapshot;
        pr.summary = "chaotic regime sampled at the excitation-number maximum of the "
                     "reference time series (T=0.1, snapshot at t=100.6)";
        pr.config.name = pr.name;
        v.push_back(pr);
    }
    {
        Preset pr = chaos_preset("fig12-min-n", 0.1, 100.4);
        pr.config.task = Task::ChaosSnapshot;
        pr.summary = "chaotic regime sampled at the excitation-number minimum of the "
                     "reference time series (T=0.1, snapshot at t=100.4)";
        pr.config.name = pr.name;
        v.push_back(pr);
    }
    v.push_back(fig13());
    v.push_back(fig14());
    for (auto& pr : v) pr.config.validate();
    return v;
}

}  // namespace

const std::vector<Preset>& preset_catalog() {
    static const std::vector<Preset> catalog = build_catalog();
    return catalog;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& p : preset_catalog()) names.push_back(p.name);
    return names;
}

const Preset& find_preset(const std::string& query) {
    const auto& cat = preset_catalog();
    for (const auto& p : cat)
        if (p.name == query) return p;
    const Preset* hit = nullptr;
    int matches = 0;
    std::string candidates;
    for (const auto& p : cat) {
        if (p.name.rfind(query, 0) == 0) {
            ++matches;
            hit = &p;
            if (!candidates.empty()) candidates += ", ";
            candidates += p.name;
        }
    }
    if (matches == 1) return *hit;
    if (matches > 1)
        throw InvalidArgument("preset '" + query + "' is ambiguous; candidates: " + candidates);
    std::string all;
    for (const auto& p : cat) {
        if (!all.empty()) all += ", ";
        all += p.name;
    }
    throw InvalidArgument("unknown preset '" + query + "'; available: " + all);
}

}  // namespace ndo
