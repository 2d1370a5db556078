#pragma once

#include <filesystem>
#include <string>

#include "scenforge/campaign.hpp"

namespace scenforge {

/// Everything a CLI invocation needs; flags override config-file values,
/// config-file values override these defaults.
struct ToolConfig {
  ModelParams model;
  SearchConfig search;
  SimConfig sim;
  EgoAgentSpec agent;
  std::string catalog = "default";  // "default", "all", or a DSL file path
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool merge_drives = false;
};

/// Parses the key-value config format: one `key = value` per line, '#'
/// comments, blank lines allowed. Unknown keys are errors. The accepted keys
/// are documented in the README.
void apply_config_file(ToolConfig& cfg, const std::filesystem::path& path);

/// Applies one key-value pair (the config file loader and tests share this).
void apply_config_entry(ToolConfig& cfg, const std::string& key, const std::string& value);

/// Propagates the shared seed into search/sim configs and validates.
void finalize_config(ToolConfig& cfg);

}  // namespace scenforge
