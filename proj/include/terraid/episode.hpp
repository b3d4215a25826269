#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "terraid/heightfield.hpp"
#include "terraid/rng.hpp"
#include "terraid/robot.hpp"

namespace terraid {

enum class ProgressMetric { kFromStart, kTowardTarget };

struct TaskConstants {
  /// Threshold spacing; also the reach radius and the inner target-exclusion
  /// radius. The target annulus spans (delta, 5 * delta].
  double delta = 0.1;
  ProgressMetric progress_metric = ProgressMetric::kFromStart;
  int target_retry_limit = 200;
  int respawn_retry_limit = 50;

  double outer_radius() const { return 5.0 * delta; }
};

enum class EpisodeStatus { kRunning, kReached, kTimeout, kDrifted };

const char* to_string(EpisodeStatus status);

struct Target {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Maximum episode steps for an initial distance, rounded to the nearest
/// integer: 300 + 200 * initial_distance.
int max_episode_steps(double initial_distance);

/// Dynamic drift limit: (initial_distance + 2 * delta) - k * delta. The
/// episode aborts when the robot-target distance exceeds it.
double penalty_distance(double initial_distance, int k, double delta = 0.1);

/// Number of delta-approach thresholds crossed given the minimum distance
/// seen so far: floor((initial_distance - min_distance) / delta), never
/// negative.
int approach_count(double initial_distance, double min_distance, double delta);

/// Completion reward component: N = floor(ID / delta) capped at 5,
/// RD = 15 - N(N+1)/2, BR = 100 + 10 * RD.
double base_reward(double initial_distance, double delta = 0.1);

/// Truncates toward zero to one decimal place.
double truncate_tenth(double value);

struct EpisodeState {
  double initial_x = 0.0;
  double initial_z = 0.0;
  Target target;
  double initial_distance = 0.0;  // ID, on the X-Z plane
  int max_steps = 0;              // MES
  int step_count = 0;
  int k = 0;             // approach-threshold count, monotone
  double min_distance = 0.0;
  std::uint32_t paid_thresholds = 0;  // bitmask, threshold m -> bit (m-1)
  double mo_sum = 0.0;                // running sum of cos(pitch)
  double progress_total = 0.0;
  double reward_total = 0.0;
  EpisodeStatus status = EpisodeStatus::kRunning;

  double mean_orientation() const {
    return step_count > 0 ? mo_sum / step_count : 0.0;
  }
};

/// Terminal reward for a reached episode: BR + 50 * MO - steps / MES where
/// MO is the episode average of cos(pitch). Throws std::logic_error if the
/// episode has not reached the target.
double final_reward(const EpisodeState& episode, const TaskConstants& task);

struct TargetSample {
  Target target;
  double initial_distance = 0.0;
};

/// Draws a target uniformly over the annulus {delta < r <= 5 delta} around
/// the robot, intersected with the area bounds; the target sits on the
/// terrain surface. Returns nullopt when the intersection appears empty
/// after the retry budget.
std::optional<TargetSample> try_sample_target(double robot_x, double robot_z,
                                              Rng& rng, const AreaRect& bounds,
                                              const Heightfield& field,
                                              const TaskConstants& task);

/// Fresh episode around the current robot pose.
EpisodeState start_episode(const RobotState& robot, const TargetSample& sample);

/// 10-dimensional observation: target offset in the yaw-rotated robot frame
/// (t_x, t_y, t_z), planar distance d = sqrt(t_x^2 + t_z^2), then the six
/// orientation features.
std::array<double, 10> build_observation(const RobotState& robot,
                                         const Target& target);

double planar_distance(double ax, double az, double bx, double bz);

struct EpisodeStepResult {
  double reward = 0.0;
  bool done = false;
  EpisodeStatus status = EpisodeStatus::kRunning;
  bool held_at_boundary = false;
};

/// Advances the robot one step and applies the episode rules: accumulates
/// the orientation average, pays newly crossed progress thresholds, and
/// resolves termination (reached < delta, drifted > PED, timeout at MES).
/// The reached terminal additionally pays the final reward.
EpisodeStepResult step_episode(EpisodeState& episode, RobotState& robot,
                               double action_left, double action_right,
                               const Heightfield& field,
                               const RobotParams& params,
                               const TaskConstants& task);

}  // namespace terraid
