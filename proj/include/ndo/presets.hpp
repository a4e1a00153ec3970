#pragma once

#include <string>
#include <vector>

#include "ndo/config.hpp"

namespace ndo {

// A named, ready-to-run experiment. The catalog entries carry the exact
// parameter values of the reference data set they reproduce.
struct Preset {
    std::string name;
    std::string summary;
    ExperimentConfig config;
};

// All built-in presets, in catalog order.
const std::vector<Preset>& preset_catalog();

std::vector<std::string> preset_names();

// Exact-name match first, then unique-prefix match. Ambiguous prefixes list
// the candidates; unknown names list the whole catalog.
const Preset& find_preset(const std::string& name_or_prefix);

}  // namespace ndo
