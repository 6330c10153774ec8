#pragma once

#include <filesystem>
#include <string>

#include "fcsp/instance.hpp"
#include "fcsp/solve.hpp"

namespace fcsp {

TransportNetwork load_transport_network(const std::filesystem::path& path);
DistributionNetwork load_distribution_network(const std::filesystem::path& path);
CouplingMap load_coupling(const std::filesystem::path& path);

// Everything an instance config points at, resolved and validated.
struct LoadedConfig {
  std::filesystem::path file;
  Instance instance;
  SolveConfig solve;
  int scenario_count = 0;
  std::uint64_t scenario_seed = 0;
  bool scenarios_from_file = false;
};

// Reads an instance config. Relative paths resolve against the config's
// directory. Scenario supports are generated when no file is given.
LoadedConfig load_config(const std::filesystem::path& path);

// Parses the config from text; `base` anchors relative paths.
LoadedConfig parse_config(const std::string& text, const std::filesystem::path& base);

}  // namespace fcsp
