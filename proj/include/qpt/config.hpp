#pragma once

#include <string>

#include "qpt/sweep.hpp"

namespace qpt::config {

struct ParsedConfig {
  sweep::SweepConfig sweep;
  std::string out_dir = "out";
};

// Line-oriented config: [section] headers, key = value pairs, '#' comments.
// Sections: model, curve, grid, measures, bases, output. Unknown sections or
// keys are rejected outright (ConfigError names the offender and line).
ParsedConfig parse_config(const std::string& text);

// Reads and parses; IoError when the file cannot be read.
ParsedConfig load_config_file(const std::string& path);

}  // namespace qpt::config
