#include "terraid/env.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace terraid {

TargetReachEnv::TargetReachEnv(const Heightfield* field, const AreaRect& area,
                               const RobotParams& robot_params,
                               const TaskConstants& task, std::uint64_t seed)
    : field_(field), area_(area), robot_params_(robot_params), task_(task),
      rng_(seed) {
  if (field_ == nullptr) throw std::invalid_argument("null heightfield");
  robot_params_.validate();
  reset();
}

void TargetReachEnv::respawn_robot() {
  for (int attempt = 0; attempt < task_.respawn_retry_limit; ++attempt) {
    const double x = rng_.uniform(area_.x_min, area_.x_max);
    const double z = rng_.uniform(area_.z_min, area_.z_max);
    const double yaw = rng_.uniform(-std::numbers::pi, std::numbers::pi);
    if (!probes_in_extent(x, z, yaw, *field_, robot_params_)) continue;
    robot_ = spawn(x, z, yaw, *field_, robot_params_);
    ++respawns_;
    return;
  }
  throw std::runtime_error("could not place robot inside the area");
}

void TargetReachEnv::begin_episode() {
  for (int attempt = 0; attempt < task_.respawn_retry_limit; ++attempt) {
    auto sample =
        try_sample_target(robot_.x, robot_.z, rng_, area_, *field_, task_);
    if (sample) {
      episode_ = start_episode(robot_, *sample);
      ++episodes_started_;
      return;
    }
    // Annulus does not intersect the area from here; move the robot.
    respawn_robot();
  }
  throw std::runtime_error("target sampling failed; area misconfigured");
}

std::array<double, 10> TargetReachEnv::reset() {
  respawn_robot();
  begin_episode();
  return observation();
}

std::array<double, 10> TargetReachEnv::observation() const {
  return build_observation(robot_, episode_.target);
}

TargetReachEnv::StepOut TargetReachEnv::step(double action_left,
                                             double action_right) {
  const EpisodeStepResult r = step_episode(
      episode_, robot_, action_left, action_right, *field_, robot_params_,
      task_);
  StepOut out;
  out.reward = r.reward;
  out.done = r.done;
  out.status = r.status;
  if (r.done) {
    completed_.push_back(EpisodeSummary{
        episodes_started_, episode_.initial_distance, episode_.step_count,
        episode_.status, episode_.reward_total, episode_.mean_orientation()});
    begin_episode();
  }
  out.observation = observation();
  return out;
}

bool TargetReachEnv::keep_in_area() {
  if (area_.contains(robot_.x, robot_.z)) return false;
  respawn_robot();
  begin_episode();
  return true;
}

}  // namespace terraid
