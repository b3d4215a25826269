#pragma once

#include <array>

#include "terraid/heightfield.hpp"

namespace terraid {

struct RobotParams {
  double wheel_radius = 0.03;
  /// Distance between the wheel contact points, along the robot X-axis.
  double track_width = 0.12;
  /// Fore-aft contact separation, along the robot Z-axis.
  double body_length = 0.10;
  double max_wheel_rate = 3.0;
  /// Forward speed per action unit; full throttle on both wheels gives
  /// max_wheel_rate * speed_per_unit m/s.
  double speed_per_unit = 0.1;
  double dt = 0.1;

  void validate() const;
};

/// Pose of the robot, always settled onto the terrain.
/// Axis convention: X through the wheel centers (positive toward the right
/// wheel), Z fore-aft (positive forward), Y up. pitch/roll/yaw are the Euler
/// angles about X, Z and Y respectively.
struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double pitch = 0.0;  // theta_x
  double yaw = 0.0;    // theta_y
  double roll = 0.0;   // theta_z
  double action_left = 0.0;
  double action_right = 0.0;
};

struct SettledPose {
  double y = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

/// Probes the terrain at the two wheel contacts and the fore/aft contacts,
/// and derives height, pitch and roll:
///   y     = mean of the four heights
///   pitch = atan((h_fore - h_aft) / body_length)
///   roll  = atan((h_left - h_right) / track_width)
/// Throws std::domain_error when a probe leaves the field extent.
SettledPose settle(double x, double z, double yaw, const Heightfield& field,
                   const RobotParams& params);

/// True when all four probe points are inside the field extent.
bool probes_in_extent(double x, double z, double yaw, const Heightfield& field,
                      const RobotParams& params);

struct StepResult {
  RobotState state;
  bool held_at_boundary = false;
};

/// One kinematic step. Actions are clamped to [-max_wheel_rate,
/// max_wheel_rate]; forward speed is the wheel mean, yaw rate the wheel
/// difference over the track width. If the move would push a probe outside
/// the field the translation is cancelled and held_at_boundary is set.
StepResult step(const RobotState& state, double action_left,
                double action_right, const Heightfield& field,
                const RobotParams& params);

/// Settled state at (x, z) with the given heading and zero action history.
RobotState spawn(double x, double z, double yaw, const Heightfield& field,
                 const RobotParams& params);

/// (cos pitch, sin pitch, cos yaw, sin yaw, cos roll, sin roll).
std::array<double, 6> orientation_features(const RobotState& state);

/// Wraps an angle into [-pi, pi).
double wrap_angle(double angle);

}  // namespace terraid
