#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "terraid/env.hpp"
#include "terraid/policy.hpp"

namespace terraid {

struct TrajectoryRow {
  int step = 0;
  double time_s = 0.0;
  double x = 0.0;
  double z = 0.0;
  double pitch = 0.0;  // theta_x
  double roll = 0.0;   // theta_z
  double yaw = 0.0;    // theta_y
  double sin_pitch = 0.0;
  double sin_roll = 0.0;
  Area area = Area::kNeither;
};

struct Trajectory {
  std::vector<TrajectoryRow> rows;
  double dt = 0.1;

  std::vector<double> sin_pitch_series() const;
  std::vector<double> sin_roll_series() const;
};

struct CollectParams {
  int n_steps = 500;
  int discard = 100;

  void validate() const;
};

/// Runs the policy on the target-reaching task inside `area`, recording the
/// settled pose every step. The first `discard` rows are dropped. The robot
/// is respawned inside the area whenever it leaves it; respawn events are
/// counted on the returned env statistics.
Trajectory collect(const PolicyNet& policy, const Heightfield& field,
                   const AreaRect& area, const RobotParams& robot_params,
                   const TaskConstants& task, const CollectParams& params,
                   std::uint64_t seed, long* respawn_count = nullptr);

/// Streaming sliding-window population standard deviation, O(1) per sample.
/// Sums are kept relative to a pivot (the first sample) with Neumaier
/// compensation, so the error scales with the in-window spread rather than
/// the raw magnitude of the series.
class RollingStd {
 public:
  explicit RollingStd(int window);
  void push(double x);
  bool ready() const { return count_ >= window_; }
  double value() const;
  int window() const { return window_; }

 private:
  int window_;
  long count_ = 0;
  bool pivot_set_ = false;
  double pivot_ = 0.0;
  double sum_ = 0.0;        // compensated sum of (x - pivot)
  double sum_comp_ = 0.0;
  double sum_sq_ = 0.0;     // compensated sum of (x - pivot)^2
  double sum_sq_comp_ = 0.0;
  std::deque<double> buf_;
};

/// Rolling population standard deviation with stride 1; output index i
/// covers input [i, i + window). Throws std::invalid_argument when the
/// window is < 2 or longer than the series.
std::vector<double> rolling_std(std::span<const double> series, int window);

struct FeatureSeries {
  int window = 0;
  int stride = 1;
  std::vector<int> start_steps;  // trajectory step index of window start
  std::vector<double> values;
  std::vector<Area> labels;  // ground truth of the window's last row
};

/// Rolling std of sin(pitch) over the retained trajectory rows.
FeatureSeries pitch_std_features(const Trajectory& trajectory, int window,
                                 int stride = 1);

void write_trajectory_csv(const std::string& path, const Trajectory& t);
Trajectory read_trajectory_csv(const std::string& path);
void write_features_csv(const std::string& path, const FeatureSeries& f);

}  // namespace terraid
