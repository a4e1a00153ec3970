#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndo/master.hpp"
#include "ndo/params.hpp"
#include "ndo/semiclassical.hpp"
#include "ndo/trajectories.hpp"
#include "ndo/wigner.hpp"

namespace ndo {

// Which dynamical engine(s) an experiment runs. All = master + qsd +
// semiclassical on the same parameters plus a cross-check report.
enum class Engine { Master, Qsd, Semiclassical, All };

Engine parse_engine(const std::string& s);
std::string to_string(Engine e);

// An experiment is a parameter set plus one of these measurement pipelines.
enum class Task {
    Hysteresis,      // quantum mean-excitation curve + semiclassical up/down branches
    Bistable,        // constant drive: steady state, Wigner, section, sample trajectory
    AmplitudeScan,   // steady-state Wigner + peak table across a drive-amplitude list
    Scaling,         // lambda-scaled steady Wigner family + classical-identity residuals
    PulsedWigner,    // pulse-train transient with over-transient Wigner snapshots
    PurityScan,      // over-transient purity vs pulse duration and vs pulse spacing
    ChaosEnsemble,   // pulse-train trajectory ensemble + classical section + Wigner
    ChaosSnapshot,   // like ChaosEnsemble, focused on one snapshot time
    LyapunovSweep,   // largest Lyapunov exponent vs drive amplitude
    MinMaxSweep,     // late-window excitation extrema + dynamics class vs amplitude
};

Task parse_task(const std::string& s);
std::string to_string(Task t);

DampingConvention parse_convention(const std::string& s);
std::string to_string(DampingConvention c);

// Piecewise-constant sampling phase: value t0 applies to amplitudes <= upto.
struct PhasePoint {
    double upto = 0.0;
    double t0 = 0.0;
};

double phase_for(const std::vector<PhasePoint>& table, double omega);

// Scan axes; each task reads the axes it needs and ignores the rest.
struct SweepSpec {
    std::vector<double> omega;       // drive amplitudes
    std::vector<double> pulse_T;     // pulse durations
    std::vector<double> pulse_tau;   // pulse spacings
    std::vector<double> lambda;      // scaling factors
    std::vector<PhasePoint> t0_max;  // section phase, max-excitation family
    std::vector<PhasePoint> t0_min;  // section phase, min-excitation family
};

struct GridConfig {
    int dim = 0;              // Fock dimension; 0 = choose automatically
    double t_final = 20.0;    // evolution horizon
    double record_dt = 0.1;   // output sampling interval
    std::vector<double> snapshot_times;
    WignerGridSpec wigner;
    bool wigner_auto_expand = true;  // enlarge grid when the support check trips
};

struct EnsembleConfig {
    std::vector<std::uint64_t> seeds;  // explicit list wins over trajectories+seed_base
    int trajectories = 0;
    std::uint64_t seed_base = 1;
    double dt = 2e-4;  // Euler-Maruyama step
};

struct OutputConfig {
    std::string dir;  // empty: resolved by the CLI (flag, env var, or ./runs/<name>)
    bool plot_scripts = false;
};

struct ExperimentConfig {
    std::string name = "custom";
    Task task = Task::Bistable;
    Engine engine = Engine::Master;
    DampingConvention convention = DampingConvention::Half;
    ModelParams model;
    DriveEnvelope drive = DriveEnvelope::constant();
    GridConfig grid;
    EnsembleConfig ensemble;
    MasterConfig solver;
    SweepSpec sweep;
    OutputConfig output;

    // Field-by-field checks; throws ValidationError naming the offending field.
    void validate() const;

    // Seeds actually used: explicit list, else seed_base .. seed_base+trajectories-1.
    std::vector<std::uint64_t> seed_list() const;
};

// Build a config from JSON. Unknown keys anywhere in the tree are rejected;
// the schema shipped in docs/config_schema.json documents the accepted shape.
ExperimentConfig config_from_json(const nlohmann::json& j);

// Parse + validate a config file; ValidationError carries file/field context.
ExperimentConfig load_config(const std::string& path);

// Inverse of config_from_json (round-trips exactly for valid configs).
nlohmann::json config_to_json(const ExperimentConfig& c);

}  // namespace ndo
