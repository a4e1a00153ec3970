// Command-line front end: named experiment presets, JSON-config runs, catalog
// introspection, and the fast invariant suite.
//
// Exit codes: 0 success, 2 bad input (flags, config, unknown preset),
// 3 numerical failure (integration or stochastic step breakdown).

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ndo/config.hpp"
#include "ndo/errors.hpp"
#include "ndo/presets.hpp"
#include "ndo/runner.hpp"
#include "ndo/selfcheck.hpp"

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
    std::vector<std::uint64_t> seeds;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        const std::string tok = s.substr(pos, comma - pos);
        if (tok.empty()) throw ndo::InvalidArgument("--seeds: empty entry");
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(tok, &used);
        } catch (const std::exception&) {
            throw ndo::InvalidArgument("--seeds: '" + tok + "' is not a seed");
        }
        if (used != tok.size() || tok[0] == '-')
            throw ndo::InvalidArgument("--seeds: '" + tok + "' is not a seed");
        seeds.push_back(v);
        pos = comma + 1;
    }
    if (seeds.empty()) throw ndo::InvalidArgument("--seeds: no seeds given");
    return seeds;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"driven Kerr oscillator toolkit: master equation, quantum-state-diffusion "
                 "ensembles, semiclassical bistability and chaos"};
    app.set_version_flag("--version", "0.1.0");
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a preset or config file into a data bundle");
    std::string positional, preset, config_path, out, seeds_str, conv_str, engine_str;
    int trajectories = 0;
    double dt = 0.0;
    bool plots = false;
    run->add_option("name", positional, "preset name (unique prefix accepted)");
    run->add_option("--preset", preset, "preset name (unique prefix accepted)");
    run->add_option("--config", config_path, "JSON experiment config file");
    run->add_option("--out", out,
                    "output directory (default: $NDO_OUT_ROOT/<name>, else runs/<name>)");
    run->add_option("--seeds", seeds_str, "comma-separated trajectory seeds, e.g. 1,2,3");
    run->add_option("--trajectories", trajectories,
                    "trajectory count (uses seeds seed_base..seed_base+M-1)");
    run->add_option("--dt", dt, "Euler-Maruyama step for trajectory ensembles");
    run->add_option("--damping-convention", conv_str, "half | full")
        ->check(CLI::IsMember({"half", "full"}));
    run->add_option("--engine", engine_str, "master | qsd | semiclassical | all")
        ->check(CLI::IsMember({"master", "qsd", "semiclassical", "all"}));
    run->add_flag("--plots", plots, "also emit a plot.py convenience script");

    auto* list = app.add_subcommand("list", "list available presets");

    auto* describe = app.add_subcommand("describe", "show a preset's full parameter set");
    std::string describe_name;
    bool describe_json = false;
    describe->add_option("name", describe_name, "preset name (unique prefix accepted)")
        ->required();
    describe->add_flag("--json", describe_json, "print only the runnable JSON config");

    auto* validate = app.add_subcommand("validate", "run the fast invariant suite (< 30 s)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ndo::kExitValidation;
    }

    try {
        if (list->parsed()) {
            for (const auto& p : ndo::preset_catalog())
                std::printf("%-22s %s\n", p.name.c_str(), p.summary.c_str());
            return ndo::kExitOk;
        }

        if (describe->parsed()) {
            const ndo::Preset& p = ndo::find_preset(describe_name);
            const std::string body = ndo::config_to_json(p.config).dump(2);
            if (describe_json) {
                std::printf("%s\n", body.c_str());
            } else {
                std::printf("%s\n  %s\n\nconfig:\n%s\n", p.name.c_str(), p.summary.c_str(),
                            body.c_str());
            }
            return ndo::kExitOk;
        }

        if (validate->parsed()) {
            bool all_pass = true;
            for (const auto& r : ndo::run_selfcheck()) {
                std::printf("[%s] %-28s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                            r.detail.c_str());
                all_pass = all_pass && r.pass;
            }
            if (!all_pass) {
                std::fprintf(stderr, "validate: invariant suite failed\n");
                return ndo::kExitNumerical;
            }
            std::printf("all checks passed\n");
            return ndo::kExitOk;
        }

        // run
        if (!positional.empty()) {
            if (!preset.empty() && preset != positional)
                throw ndo::InvalidArgument("conflicting preset names '" + positional +
                                           "' and '" + preset + "'");
            preset = positional;
        }
        if (!preset.empty() && !config_path.empty())
            throw ndo::InvalidArgument("--preset and --config are mutually exclusive");
        if (preset.empty() && config_path.empty())
            throw ndo::InvalidArgument("run needs a preset name or --config <file>");

        ndo::RunOverrides o;
        if (run->count("--seeds")) o.seeds = parse_seeds(seeds_str);
        if (run->count("--trajectories")) {
            if (trajectories < 1)
                throw ndo::InvalidArgument("--trajectories: must be >= 1");
            o.trajectories = trajectories;
        }
        if (run->count("--dt")) {
            if (!(dt > 0.0)) throw ndo::InvalidArgument("--dt: must be > 0");
            o.dt = dt;
        }
        if (run->count("--damping-convention")) o.convention = ndo::parse_convention(conv_str);
        if (run->count("--engine")) o.engine = ndo::parse_engine(engine_str);
        if (plots) o.plot_scripts = true;

        const ndo::Bundle b = preset.empty() ? ndo::run_config(config_path, o, out)
                                             : ndo::run_preset(preset, o, out);
        std::printf("wrote %zu files to %s\n", b.files.size(), b.dir.c_str());
        for (const auto& f : b.files) std::printf("  %s\n", f.c_str());
        return ndo::kExitOk;
    } catch (const ndo::InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return ndo::kExitValidation;
    } catch (const ndo::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return ndo::kExitValidation;
    } catch (const ndo::UnsupportedParameter& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return ndo::kExitValidation;
    } catch (const ndo::IntegrationFailure& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return ndo::kExitNumerical;
    } catch (const ndo::StepFailure& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return ndo::kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return ndo::kExitNumerical;
    }
}
