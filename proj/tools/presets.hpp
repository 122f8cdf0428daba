#pragma once

#include <string>
#include <vector>

#include "scenario.hpp"

namespace escape::cli {

struct Preset {
  std::string name;
  std::string summary;
  std::string yaml;  // a complete scenario file
};

const std::vector<Preset>& presets();

// Throws ConfigError for unknown names.
const Preset& find_preset(const std::string& name);
ScenarioConfig preset_config(const std::string& name);

}  // namespace escape::cli
