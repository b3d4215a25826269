#include "terraid/episode.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace terraid {

namespace {

// Guards floor() against 0.3/0.1 = 2.999... style representation error.
constexpr double kFloorGuard = 1e-9;

int floor_ratio(double value, double divisor) {
  return static_cast<int>(std::floor(value / divisor + kFloorGuard));
}

}  // namespace

const char* to_string(EpisodeStatus status) {
  switch (status) {
    case EpisodeStatus::kRunning:
      return "running";
    case EpisodeStatus::kReached:
      return "reached";
    case EpisodeStatus::kTimeout:
      return "timeout";
    default:
      return "drifted";
  }
}

int max_episode_steps(double initial_distance) {
  return static_cast<int>(std::llround(300.0 + 200.0 * initial_distance));
}

double penalty_distance(double initial_distance, int k, double delta) {
  return (initial_distance + 2.0 * delta) - k * delta;
}

int approach_count(double initial_distance, double min_distance,
                   double delta) {
  const int n = floor_ratio(initial_distance - min_distance, delta);
  return n > 0 ? n : 0;
}

double base_reward(double initial_distance, double delta) {
  int n = floor_ratio(initial_distance, delta);
  n = std::min(n, 5);
  const double rd = 15.0 - 0.5 * n * (n + 1);
  return 100.0 + 10.0 * rd;
}

double truncate_tenth(double value) {
  return std::floor(value * 10.0 + kFloorGuard) / 10.0;
}

double final_reward(const EpisodeState& episode, const TaskConstants& task) {
  if (episode.status != EpisodeStatus::kReached) {
    throw std::logic_error("final_reward requires a reached episode");
  }
  const double br = base_reward(episode.initial_distance, task.delta);
  const double orientation = 50.0 * episode.mean_orientation();
  const double time_penalty =
      static_cast<double>(episode.step_count) / episode.max_steps;
  return br + orientation - time_penalty;
}

double planar_distance(double ax, double az, double bx, double bz) {
  const double dx = ax - bx;
  const double dz = az - bz;
  return std::sqrt(dx * dx + dz * dz);
}

std::optional<TargetSample> try_sample_target(double robot_x, double robot_z,
                                              Rng& rng, const AreaRect& bounds,
                                              const Heightfield& field,
                                              const TaskConstants& task) {
  const double r_in = task.delta;
  const double r_out = task.outer_radius();
  for (int attempt = 0; attempt < task.target_retry_limit; ++attempt) {
    // Uniform over the annulus area: radial CDF is (r^2 - r_in^2) over
    // (r_out^2 - r_in^2).
    const double u = rng.uniform();
    const double r =
        std::sqrt(r_in * r_in + u * (r_out * r_out - r_in * r_in));
    const double phi = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double tx = robot_x + r * std::cos(phi);
    const double tz = robot_z + r * std::sin(phi);
    if (!bounds.contains(tx, tz) || !field.in_extent(tx, tz)) continue;
    const double id = planar_distance(robot_x, robot_z, tx, tz);
    if (id <= r_in || id > r_out) continue;
    return TargetSample{Target{tx, field.height_at(tx, tz), tz}, id};
  }
  return std::nullopt;
}

EpisodeState start_episode(const RobotState& robot,
                           const TargetSample& sample) {
  EpisodeState episode;
  episode.initial_x = robot.x;
  episode.initial_z = robot.z;
  episode.target = sample.target;
  episode.initial_distance = sample.initial_distance;
  episode.max_steps = max_episode_steps(sample.initial_distance);
  episode.min_distance = sample.initial_distance;
  return episode;
}

std::array<double, 10> build_observation(const RobotState& robot,
                                         const Target& target) {
  const double rel_x = target.x - robot.x;
  const double rel_y = target.y - robot.y;
  const double rel_z = target.z - robot.z;
  const double cy = std::cos(robot.yaw);
  const double sy = std::sin(robot.yaw);
  // Project onto the robot axes: X = (cy, -sy), Z = (sy, cy) in world X-Z.
  const double tx = rel_x * cy - rel_z * sy;
  const double tz = rel_x * sy + rel_z * cy;
  const double d = std::sqrt(tx * tx + tz * tz);
  const auto orient = orientation_features(robot);
  return {tx,        rel_y,     tz,        d,         orient[0],
          orient[1], orient[2], orient[3], orient[4], orient[5]};
}

EpisodeStepResult step_episode(EpisodeState& episode, RobotState& robot,
                               double action_left, double action_right,
                               const Heightfield& field,
                               const RobotParams& params,
                               const TaskConstants& task) {
  if (episode.status != EpisodeStatus::kRunning) {
    throw std::logic_error("step_episode on a finished episode");
  }
  const StepResult moved =
      step(robot, action_left, action_right, field, params);
  robot = moved.state;

  episode.step_count += 1;
  episode.mo_sum += std::cos(robot.pitch);

  const double distance =
      planar_distance(robot.x, robot.z, episode.target.x, episode.target.z);
  if (distance < episode.min_distance) episode.min_distance = distance;

  EpisodeStepResult result;
  result.held_at_boundary = moved.held_at_boundary;

  // Pay each newly crossed approach threshold exactly once.
  const int reached_k =
      approach_count(episode.initial_distance, episode.min_distance, task.delta);
  for (int m = episode.k + 1; m <= reached_k; ++m) {
    const std::uint32_t bit = 1u << (m - 1);
    if (episode.paid_thresholds & bit) continue;
    episode.paid_thresholds |= bit;
    const double progressed =
        task.progress_metric == ProgressMetric::kFromStart
            ? planar_distance(robot.x, robot.z, episode.initial_x,
                              episode.initial_z)
            : episode.initial_distance - distance;
    result.reward += 100.0 * truncate_tenth(progressed);
  }
  episode.k = reached_k > episode.k ? reached_k : episode.k;
  episode.progress_total += result.reward;

  if (distance < task.delta) {
    episode.status = EpisodeStatus::kReached;
    result.reward += final_reward(episode, task);
  } else if (distance >
             penalty_distance(episode.initial_distance, episode.k,
                              task.delta)) {
    episode.status = EpisodeStatus::kDrifted;
  } else if (episode.step_count >= episode.max_steps) {
    episode.status = EpisodeStatus::kTimeout;
  }

  episode.reward_total += result.reward;
  result.done = episode.status != EpisodeStatus::kRunning;
  result.status = episode.status;
  return result;
}

}  // namespace terraid
