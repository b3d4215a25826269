#pragma once

#include <cstdint>
#include <vector>

#include "terraid/episode.hpp"

namespace terraid {

struct EpisodeSummary {
  long episode_id = 0;
  double initial_distance = 0.0;
  int steps = 0;
  EpisodeStatus status = EpisodeStatus::kRunning;
  double total_reward = 0.0;
  double mean_orientation = 0.0;
};

/// Target-reaching environment over one area of the heightfield. Episodes
/// chain: on termination a new target is sampled around the current pose
/// without resetting the robot; the robot is respawned only when target
/// sampling around its pose is impossible.
class TargetReachEnv {
 public:
  TargetReachEnv(const Heightfield* field, const AreaRect& area,
                 const RobotParams& robot_params, const TaskConstants& task,
                 std::uint64_t seed);

  /// Respawns the robot uniformly in the area and starts a fresh episode.
  std::array<double, 10> reset();

  struct StepOut {
    std::array<double, 10> observation;
    double reward = 0.0;
    bool done = false;
    EpisodeStatus status = EpisodeStatus::kRunning;
  };

  /// Advances one step; when the episode terminates its summary is recorded
  /// and the next episode begins immediately (pose preserved), so the
  /// returned observation always belongs to a running episode.
  StepOut step(double action_left, double action_right);

  std::array<double, 10> observation() const;

  const RobotState& robot() const { return robot_; }
  const EpisodeState& episode() const { return episode_; }
  const Heightfield& field() const { return *field_; }
  const AreaRect& area() const { return area_; }

  const std::vector<EpisodeSummary>& completed_episodes() const {
    return completed_;
  }
  void clear_completed_episodes() { completed_.clear(); }
  long episodes_started() const { return episodes_started_; }
  long respawns() const { return respawns_; }

  /// Places the robot inside the area if it is not already, starting a new
  /// episode if one had to be respawned. Used by telemetry collection.
  bool keep_in_area();

 private:
  void respawn_robot();
  void begin_episode();

  const Heightfield* field_;
  AreaRect area_;
  RobotParams robot_params_;
  TaskConstants task_;
  Rng rng_;
  RobotState robot_;
  EpisodeState episode_;
  std::vector<EpisodeSummary> completed_;
  long episodes_started_ = 0;
  long respawns_ = 0;
};

}  // namespace terraid
