#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "terraid/episode.hpp"
#include "terraid/gmm.hpp"
#include "terraid/heightfield.hpp"
#include "terraid/ppo.hpp"
#include "terraid/robot.hpp"
#include "terraid/telemetry.hpp"

namespace terraid {

/// Every knob of the pipeline, with full defaults. A config file overrides
/// fields selectively; CLI flags override the file.
struct RunConfig {
  std::uint64_t seed = 7;
  std::string out_dir = "out";

  HeightfieldParams terrain;
  RobotParams robot;
  TaskConstants task;
  PpoConfig ppo_initial;  // flat-area stage, 9 parallel envs
  PpoConfig ppo_general;  // mixed-area stage, 8 parallel envs, pretrained
  CollectParams telemetry;
  int feature_stride = 1;
  std::vector<int> windows{10, 20, 40, 70};
  EmOptions gmm;
  int eval_episodes = 50;

  RunConfig();

  void validate() const;
};

RunConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const RunConfig& config);

RunConfig load_config_file(const std::string& path);
void save_config_file(const std::string& path, const RunConfig& config);

}  // namespace terraid
