#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "doctest.h"
#include "ndo/config.hpp"
#include "ndo/presets.hpp"
#include "ndo/runner.hpp"

using namespace ndo;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json tiny_run_json() {
    return json{
        {"name", "rerun-check"},
        {"task", "bistable"},
        {"engine", "all"},
        {"model", {{"delta", -8.0}, {"chi", 2.0}, {"omega", 2.7}}},
        {"grid",
         {{"dim", 12},
          {"t_final", 1.0},
          {"record_dt", 0.5},
          {"wigner",
           {{"xmin", -3.0}, {"xmax", 3.0}, {"ymin", -3.0}, {"ymax", 3.0}, {"nx", 33},
            {"ny", 33}}}}},
        {"ensemble", {{"trajectories", 4}, {"dt", 2e-4}}},
    };
}

}  // namespace

TEST_CASE("enum names round-trip and reject unknowns") {
    for (Engine e : {Engine::Master, Engine::Qsd, Engine::Semiclassical, Engine::All})
        CHECK(parse_engine(to_string(e)) == e);
    CHECK_THROWS_AS(parse_engine("quantumish"), ValidationError);

    using T = Task;
    for (T t : {T::Hysteresis, T::Bistable, T::AmplitudeScan, T::Scaling, T::PulsedWigner,
                T::PurityScan, T::ChaosEnsemble, T::ChaosSnapshot, T::LyapunovSweep,
                T::MinMaxSweep})
        CHECK(parse_task(to_string(t)) == t);
    CHECK_THROWS_AS(parse_task("bogus-task"), ValidationError);

    CHECK(parse_convention("half") == DampingConvention::Half);
    CHECK(parse_convention("full") == DampingConvention::Full);
    CHECK_THROWS_AS(parse_convention("quarter"), ValidationError);
}

TEST_CASE("piecewise sampling phase selects by amplitude") {
    const std::vector<PhasePoint> table{{19.25, 39.1}, {1e30, 39.0}};
    CHECK(phase_for(table, 5.0) == doctest::Approx(39.1));
    CHECK(phase_for(table, 19.25) == doctest::Approx(39.1));
    CHECK(phase_for(table, 19.26) == doctest::Approx(39.0));
    CHECK(phase_for({}, 7.0) == doctest::Approx(0.0));
}

TEST_CASE("empty config yields documented defaults") {
    const ExperimentConfig c = config_from_json(json::object());
    CHECK(c.name == "custom");
    CHECK(c.task == Task::Bistable);
    CHECK(c.engine == Engine::Master);
    CHECK(c.convention == DampingConvention::Half);
    CHECK(c.model.gamma == 1.0);
    CHECK(c.grid.t_final == 20.0);
    CHECK(c.ensemble.dt == 2e-4);
    CHECK(c.grid.wigner.nx == 201);
}

TEST_CASE("unknown keys are rejected with their path") {
    json top = {{"bogus", 1}};
    CHECK_THROWS_WITH_AS(config_from_json(top),
                         doctest::Contains("unknown key 'bogus'"), ValidationError);

    json nested = {{"model", {{"delta", -8.0}, {"xi", 2.0}}}};
    CHECK_THROWS_WITH_AS(config_from_json(nested), doctest::Contains("model"),
                         ValidationError);

    json deep = {{"grid", {{"wigner", {{"nz", 10}}}}}};
    CHECK_THROWS_WITH_AS(config_from_json(deep), doctest::Contains("grid.wigner"),
                         ValidationError);
}

TEST_CASE("validation errors name the offending field") {
    json bad_gamma = {{"model", {{"gamma", -1.0}}}};
    CHECK_THROWS_WITH_AS(config_from_json(bad_gamma), doctest::Contains("model.gamma"),
                         ValidationError);

    json bad_nx = {{"grid", {{"wigner", {{"nx", 8}}}}}};
    CHECK_THROWS_WITH_AS(config_from_json(bad_nx), doctest::Contains("nx"),
                         ValidationError);

    json late_snapshot = {{"grid", {{"t_final", 5.0}, {"snapshot_times", {6.0}}}}};
    CHECK_THROWS_WITH_AS(config_from_json(late_snapshot),
                         doctest::Contains("snapshot_times"), ValidationError);

    json bad_dt = {{"ensemble", {{"dt", 0.0}}}};
    CHECK_THROWS_WITH_AS(config_from_json(bad_dt), doctest::Contains("ensemble.dt"),
                         ValidationError);
}

TEST_CASE("axes accept explicit lists and range objects") {
    json list_form = {{"sweep", {{"omega", {1.0, 2.0, 3.0}}}}};
    CHECK(config_from_json(list_form).sweep.omega == std::vector<double>{1.0, 2.0, 3.0});

    json range_form = {
        {"sweep", {{"omega", {{"from", 1.0}, {"to", 2.0}, {"step", 0.5}}}}}};
    const auto omega = config_from_json(range_form).sweep.omega;
    REQUIRE(omega.size() == 3);
    CHECK(omega[0] == doctest::Approx(1.0));
    CHECK(omega[1] == doctest::Approx(1.5));
    CHECK(omega[2] == doctest::Approx(2.0));

    json bad_step = {
        {"sweep", {{"omega", {{"from", 1.0}, {"to", 2.0}, {"step", -0.5}}}}}};
    CHECK_THROWS_AS(config_from_json(bad_step), ValidationError);
}

TEST_CASE("phase tables must have increasing break points") {
    json good = {{"sweep",
                  {{"t0_max", {{{"upto", 19.25}, {"t0", 39.1}},
                               {{"upto", 1e30}, {"t0", 39.0}}}}}}};
    const auto table = config_from_json(good).sweep.t0_max;
    REQUIRE(table.size() == 2);
    CHECK(table[0].upto == doctest::Approx(19.25));

    json bad = {{"sweep",
                 {{"t0_max", {{{"upto", 20.0}, {"t0", 1.0}},
                              {{"upto", 5.0}, {"t0", 2.0}}}}}}};
    CHECK_THROWS_AS(config_from_json(bad), ValidationError);
}

TEST_CASE("constant drives reject pulse-only keys") {
    json bad = {{"drive", {{"kind", "constant"}, {"T", 0.5}}}};
    CHECK_THROWS_WITH_AS(config_from_json(bad), doctest::Contains("drive.T"),
                         ValidationError);

    json pulse = {{"drive",
                   {{"kind", "pulse-train"}, {"T", 0.5}, {"tau", 2.0},
                    {"pulse_count", nullptr}}}};
    const auto c = config_from_json(pulse);
    CHECK(c.drive.kind == DriveEnvelope::Kind::PulseTrain);
    CHECK_FALSE(c.drive.pulse_count.has_value());
}

TEST_CASE("configs round-trip through their serialized form") {
    for (const Preset& preset : preset_catalog()) {
        const json first = config_to_json(preset.config);
        const ExperimentConfig reparsed = config_from_json(first);
        const json second = config_to_json(reparsed);
        CHECK(first == second);
    }
}

TEST_CASE("preset catalog carries the documented names in order") {
    const std::vector<std::string> expected{
        "fig1-hysteresis",     "fig2-bistable",      "fig3-amplitude-sweep",
        "fig4-scaling",        "fig5-interference",  "fig6-purity",
        "fig7-chaos-T0.25",    "fig8-chaos-T0.205",  "fig9-chaos-T0.15",
        "fig10-chaos-T0.1",    "fig11-max-n",        "fig12-min-n",
        "fig13-lyapunov-sweep", "fig14-minmax-n"};
    CHECK(preset_names() == expected);
    for (const Preset& p : preset_catalog()) {
        CHECK_FALSE(p.summary.empty());
        CHECK_NOTHROW(p.config.validate());
    }
}

TEST_CASE("preset lookup accepts exact names and unique prefixes") {
    CHECK(find_preset("fig2-bistable").name == "fig2-bistable");
    CHECK(find_preset("fig13").name == "fig13-lyapunov-sweep");
    CHECK(find_preset("fig7").name == "fig7-chaos-T0.25");
    // "fig1" prefixes fig1-hysteresis, fig10..fig14: ambiguous.
    CHECK_THROWS_AS(find_preset("fig1"), InvalidArgument);
    CHECK_THROWS_AS(find_preset("no-such-preset"), InvalidArgument);
}

TEST_CASE("seed lists expand from base and honor explicit values") {
    ExperimentConfig c;
    c.ensemble.trajectories = 3;
    c.ensemble.seed_base = 10;
    CHECK(c.seed_list() == std::vector<std::uint64_t>{10, 11, 12});
    c.ensemble.seeds = {4, 7};
    CHECK(c.seed_list() == std::vector<std::uint64_t>{4, 7});
}

TEST_CASE("dimension resolution honors pins and falls back to a bound") {
    ExperimentConfig c = config_from_json(tiny_run_json());
    CHECK(resolve_dim(c) == 12);
    c.grid.dim = 0;
    const int dim = resolve_dim(c);
    CHECK(dim >= 12);
    CHECK(dim <= 56);
}

TEST_CASE("config files load with path context in errors") {
    CHECK_THROWS_WITH_AS(load_config("/nonexistent/nope.json"),
                         doctest::Contains("nope.json"), ValidationError);

    const fs::path dir = fs::temp_directory_path() / "ndo_cfg_test";
    fs::create_directories(dir);
    const fs::path file = dir / "exp.json";
    std::ofstream(file) << tiny_run_json().dump(2);
    const ExperimentConfig c = load_config(file.string());
    CHECK(c.name == "rerun-check");
    CHECK(c.ensemble.trajectories == 4);

    std::ofstream(file) << "{ not json";
    CHECK_THROWS_AS(load_config(file.string()), ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("experiment reruns are byte-identical apart from run metadata") {
    const ExperimentConfig cfg = config_from_json(tiny_run_json());
    const fs::path base = fs::temp_directory_path() / "ndo_rerun_test";
    fs::remove_all(base);
    const fs::path dir_a = base / "a", dir_b = base / "b";

    const Bundle run_a = run_experiment(cfg, dir_a.string());
    const Bundle run_b = run_experiment(cfg, dir_b.string());
    REQUIRE(run_a.files == run_b.files);
    CHECK(std::is_sorted(run_a.files.begin(), run_a.files.end()));

    // The full bundle for engine=all on this task.
    const std::vector<std::string> expected{
        "crosscheck.json", "ensemble_mean.csv", "master_series.csv", "meta.json",
        "poincare.csv",    "steady_peaks.csv",  "steady_roots.csv",  "steady_wigner.csv",
        "trajectory.csv"};
    CHECK(run_a.files == expected);

    for (const std::string& name : run_a.files) {
        if (name == "meta.json") continue;  // timestamp + runtime live here
        CHECK_MESSAGE(slurp(dir_a / name) == slurp(dir_b / name), "file differs: ", name);
    }

    // Metadata agrees on everything except the run stamp.
    json meta_a = json::parse(slurp(dir_a / "meta.json"));
    json meta_b = json::parse(slurp(dir_b / "meta.json"));
    meta_a.erase("run");
    meta_b.erase("run");
    CHECK(meta_a == meta_b);
    CHECK(meta_a.at("name") == "rerun-check");
    CHECK(meta_a.at("files").size() == expected.size() - 1);  // meta.json not self-listed

    fs::remove_all(base);
}

TEST_CASE("config files drive runs with command-line style overrides") {
    const fs::path base = fs::temp_directory_path() / "ndo_runcfg_test";
    fs::remove_all(base);
    fs::create_directories(base);
    const fs::path file = base / "exp.json";
    std::ofstream(file) << tiny_run_json().dump(2);

    RunOverrides o;
    o.trajectories = 2;
    o.engine = Engine::Qsd;
    const Bundle run = run_config(file.string(), o, (base / "out").string());
    const json meta = json::parse(slurp(fs::path(run.dir) / "meta.json"));
    CHECK(meta.at("engine") == "qsd");
    CHECK(meta.at("config").at("ensemble").at("trajectories") == 2);
    // qsd-only bundle: no steady-state or semiclassical files.
    for (const std::string& name : run.files) {
        CHECK(name != "steady_wigner.csv");
        CHECK(name != "poincare.csv");
        CHECK(name != "crosscheck.json");
    }
    fs::remove_all(base);
}
