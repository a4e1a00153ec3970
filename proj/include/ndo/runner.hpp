#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ndo/config.hpp"

namespace ndo {

// Command-line overrides applied on top of a preset or config file.
struct RunOverrides {
    std::optional<std::vector<std::uint64_t>> seeds;
    std::optional<int> trajectories;  // replaces the seed list with seed_base..+M-1
    std::optional<double> dt;         // Euler-Maruyama step for trajectory ensembles
    std::optional<DampingConvention> convention;
    std::optional<Engine> engine;
    std::optional<bool> plot_scripts;
};

// What a run produced: the bundle directory and the files inside it (relative
// names; CSV data plus meta.json, optionally plot.py and crosscheck.json).
struct Bundle {
    std::string dir;
    std::vector<std::string> files;
};

// Execute a resolved experiment. Output directory priority: out_dir argument,
// then cfg.output.dir, then "runs/<name>". Data files are written atomically
// (write-then-rename); reruns with the same config and seeds are byte-identical
// except for the timestamp/runtime fields inside meta.json.
Bundle run_experiment(const ExperimentConfig& cfg, const std::string& out_dir = "");

Bundle run_preset(const std::string& name_or_prefix, const RunOverrides& o = {},
                  const std::string& out_dir = "");

Bundle run_config(const std::string& path, const RunOverrides& o = {},
                  const std::string& out_dir = "");

// Fock dimension a run will use: the configured value if pinned, otherwise a
// bound from the classical steady amplitudes plus fluctuation margin.
int resolve_dim(const ExperimentConfig& cfg);

}  // namespace ndo
