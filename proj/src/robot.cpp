#include "terraid/robot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace terraid {

namespace {

constexpr double kPi = std::numbers::pi;

struct ProbePoints {
  double right_x, right_z;
  double left_x, left_z;
  double fore_x, fore_z;
  double aft_x, aft_z;
};

ProbePoints probe_points(double x, double z, double yaw,
                         const RobotParams& p) {
  const double cy = std::cos(yaw);
  const double sy = std::sin(yaw);
  const double tw2 = 0.5 * p.track_width;
  const double bl2 = 0.5 * p.body_length;
  // Robot X-axis in world coordinates is (cy, -sy); robot Z-axis is (sy, cy).
  return ProbePoints{
      x + cy * tw2, z - sy * tw2,  // right wheel
      x - cy * tw2, z + sy * tw2,  // left wheel
      x + sy * bl2, z + cy * bl2,  // fore contact
      x - sy * bl2, z - cy * bl2,  // aft contact
  };
}

}  // namespace

void RobotParams::validate() const {
  if (!(wheel_radius > 0.0) || !(track_width > 0.0) || !(body_length > 0.0) ||
      !(max_wheel_rate > 0.0) || !(speed_per_unit > 0.0) || !(dt > 0.0)) {
    throw std::invalid_argument("robot parameters must all be positive");
  }
}

double wrap_angle(double angle) {
  double a = std::fmod(angle + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

bool probes_in_extent(double x, double z, double yaw, const Heightfield& field,
                      const RobotParams& params) {
  const ProbePoints pp = probe_points(x, z, yaw, params);
  return field.in_extent(pp.right_x, pp.right_z) &&
         field.in_extent(pp.left_x, pp.left_z) &&
         field.in_extent(pp.fore_x, pp.fore_z) &&
         field.in_extent(pp.aft_x, pp.aft_z);
}

SettledPose settle(double x, double z, double yaw, const Heightfield& field,
                   const RobotParams& params) {
  const ProbePoints pp = probe_points(x, z, yaw, params);
  const double h_right = field.height_at(pp.right_x, pp.right_z);
  const double h_left = field.height_at(pp.left_x, pp.left_z);
  const double h_fore = field.height_at(pp.fore_x, pp.fore_z);
  const double h_aft = field.height_at(pp.aft_x, pp.aft_z);
  SettledPose pose;
  pose.y = 0.25 * (h_right + h_left + h_fore + h_aft);
  pose.pitch = std::atan((h_fore - h_aft) / params.body_length);
  pose.roll = std::atan((h_left - h_right) / params.track_width);
  return pose;
}

StepResult step(const RobotState& state, double action_left,
                double action_right, const Heightfield& field,
                const RobotParams& params) {
  const double al =
      std::clamp(action_left, -params.max_wheel_rate, params.max_wheel_rate);
  const double ar =
      std::clamp(action_right, -params.max_wheel_rate, params.max_wheel_rate);
  const double v = params.speed_per_unit * 0.5 * (al + ar);
  const double omega = params.speed_per_unit * (ar - al) / params.track_width;

  double yaw = state.yaw;
  if (omega != 0.0) yaw = wrap_angle(state.yaw + omega * params.dt);
  double x = state.x + v * params.dt * std::sin(state.yaw);
  double z = state.z + v * params.dt * std::cos(state.yaw);

  StepResult result;
  if (!probes_in_extent(x, z, yaw, field, params)) {
    x = state.x;
    z = state.z;
    result.held_at_boundary = true;
    if (!probes_in_extent(x, z, yaw, field, params)) yaw = state.yaw;
  }
  const SettledPose pose = settle(x, z, yaw, field, params);
  result.state = RobotState{x, pose.y, z, pose.pitch, yaw, pose.roll, al, ar};
  return result;
}

RobotState spawn(double x, double z, double yaw, const Heightfield& field,
                 const RobotParams& params) {
  const SettledPose pose = settle(x, z, yaw, field, params);
  RobotState state;
  state.x = x;
  state.y = pose.y;
  state.z = z;
  state.pitch = pose.pitch;
  state.yaw = yaw;
  state.roll = pose.roll;
  return state;
}

std::array<double, 6> orientation_features(const RobotState& state) {
  return {std::cos(state.pitch), std::sin(state.pitch),
          std::cos(state.yaw),   std::sin(state.yaw),
          std::cos(state.roll),  std::sin(state.roll)};
}

}  // namespace terraid
