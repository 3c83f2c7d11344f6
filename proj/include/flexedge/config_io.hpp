#pragma once

// Flat key-value configuration files: `key = value` lines, `#` comments, SI
// units throughout. Unknown keys are a hard error. Vector-valued keys take
// space-separated entries.

#include <cstdint>
#include <string>

#include "flexedge/rl.hpp"
#include "flexedge/scenario.hpp"

namespace flexedge {

struct RunConfig {
  ScenarioConfig scenario;
  rl::TrainConfig train;
};

// Parses a config file on top of the defaults and validates the result.
// `parse_run_config` accepts scenario and training keys; the scenario-only
// variant rejects training keys like any other unknown key.
RunConfig parse_run_config(const std::string& text);
ScenarioConfig parse_scenario_config(const std::string& text);

RunConfig load_run_config(const std::string& path);

std::string serialize(const ScenarioConfig& config);
std::string serialize(const RunConfig& config);

// FNV-1a digest of the serialized scenario; ties checkpoints to the world
// they were trained in.
std::uint64_t scenario_digest(const ScenarioConfig& config);

}  // namespace flexedge
