#include "terraid/telemetry.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "terraid/io.hpp"

namespace terraid {

std::vector<double> Trajectory::sin_pitch_series() const {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.sin_pitch);
  return v;
}

std::vector<double> Trajectory::sin_roll_series() const {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.sin_roll);
  return v;
}

void CollectParams::validate() const {
  if (n_steps < 0 || discard < 0 || discard > n_steps) {
    throw std::invalid_argument("collect: need 0 <= discard <= n_steps");
  }
}

Trajectory collect(const PolicyNet& policy, const Heightfield& field,
                   const AreaRect& area, const RobotParams& robot_params,
                   const TaskConstants& task, const CollectParams& params,
                   std::uint64_t seed, long* respawn_count) {
  params.validate();
  TargetReachEnv env(&field, area, robot_params, task, seed);
  Rng action_rng(derive_seed(seed, "collect-actions"));

  Trajectory trajectory;
  trajectory.dt = robot_params.dt;
  trajectory.rows.reserve(params.n_steps - params.discard);

  auto obs = env.observation();
  for (int step_idx = 0; step_idx < params.n_steps; ++step_idx) {
    const auto sample = act(policy, obs, action_rng);
    const auto out = env.step(sample.action[0], sample.action[1]);
    obs = out.observation;
    if (env.keep_in_area()) obs = env.observation();

    if (step_idx >= params.discard) {
      const RobotState& r = env.robot();
      TrajectoryRow row;
      row.step = step_idx;
      row.time_s = step_idx * robot_params.dt;
      row.x = r.x;
      row.z = r.z;
      row.pitch = r.pitch;
      row.roll = r.roll;
      row.yaw = r.yaw;
      row.sin_pitch = std::sin(r.pitch);
      row.sin_roll = std::sin(r.roll);
      row.area = field.area_at(r.x, r.z);
      trajectory.rows.push_back(row);
    }
  }
  if (respawn_count != nullptr) *respawn_count = env.respawns();
  return trajectory;
}

RollingStd::RollingStd(int window) : window_(window) {
  if (window < 2) throw std::invalid_argument("window must be >= 2");
}

namespace {

// Neumaier-compensated accumulation.
void compensated_add(double& sum, double& comp, double term) {
  const double t = sum + term;
  if (std::abs(sum) >= std::abs(term)) {
    comp += (sum - t) + term;
  } else {
    comp += (term - t) + sum;
  }
  sum = t;
}

}  // namespace

void RollingStd::push(double x) {
  if (!pivot_set_) {
    pivot_ = x;
    pivot_set_ = true;
  }
  ++count_;
  buf_.push_back(x);
  const double d = x - pivot_;
  compensated_add(sum_, sum_comp_, d);
  compensated_add(sum_sq_, sum_sq_comp_, d * d);
  if (buf_.size() > static_cast<size_t>(window_)) {
    // (x_old - pivot) reproduces the exact term added earlier, so the
    // compensated sums remain exact partial sums of the window.
    const double od = buf_.front() - pivot_;
    buf_.pop_front();
    compensated_add(sum_, sum_comp_, -od);
    compensated_add(sum_sq_, sum_sq_comp_, -(od * od));
  }
}

double RollingStd::value() const {
  if (!ready()) throw std::logic_error("window not yet full");
  const double s1 = sum_ + sum_comp_;
  const double s2 = sum_sq_ + sum_sq_comp_;
  const double mean_d = s1 / static_cast<double>(window_);
  const double var = s2 / static_cast<double>(window_) - mean_d * mean_d;
  return std::sqrt(var > 0.0 ? var : 0.0);
}

std::vector<double> rolling_std(std::span<const double> series, int window) {
  if (window < 2) throw std::invalid_argument("window must be >= 2");
  if (series.size() < static_cast<size_t>(window)) {
    throw std::invalid_argument("series shorter than the window");
  }
  RollingStd acc(window);
  std::vector<double> out;
  out.reserve(series.size() - window + 1);
  for (double x : series) {
    acc.push(x);
    if (acc.ready()) out.push_back(acc.value());
  }
  return out;
}

FeatureSeries pitch_std_features(const Trajectory& trajectory, int window,
                                 int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  const auto series = trajectory.sin_pitch_series();
  const auto stds = rolling_std(series, window);
  FeatureSeries features;
  features.window = window;
  features.stride = stride;
  for (size_t i = 0; i < stds.size(); i += stride) {
    features.start_steps.push_back(trajectory.rows[i].step);
    features.values.push_back(stds[i]);
    // Label by the most recent row the window covers.
    features.labels.push_back(trajectory.rows[i + window - 1].area);
  }
  return features;
}

void write_trajectory_csv(const std::string& path, const Trajectory& t) {
  std::string out =
      "step,time_s,x,z,theta_x,theta_z,theta_y,sin_theta_x,sin_theta_z,area\n";
  for (const auto& r : t.rows) {
    out += csv_row({std::to_string(r.step), format_double(r.time_s),
                    format_double(r.x), format_double(r.z),
                    format_double(r.pitch), format_double(r.roll),
                    format_double(r.yaw), format_double(r.sin_pitch),
                    format_double(r.sin_roll), to_string(r.area)});
  }
  write_text_file(path, out);
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty trajectory file: " + path);
  }
  Trajectory t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != 10) {
      throw std::runtime_error("malformed trajectory row in " + path);
    }
    TrajectoryRow r;
    r.step = static_cast<int>(parse_long(fields[0]));
    r.time_s = parse_double(fields[1]);
    r.x = parse_double(fields[2]);
    r.z = parse_double(fields[3]);
    r.pitch = parse_double(fields[4]);
    r.roll = parse_double(fields[5]);
    r.yaw = parse_double(fields[6]);
    r.sin_pitch = parse_double(fields[7]);
    r.sin_roll = parse_double(fields[8]);
    r.area = area_from_string(fields[9]);
    t.rows.push_back(r);
  }
  if (t.rows.size() >= 2) t.dt = t.rows[1].time_s - t.rows[0].time_s;
  return t;
}

void write_features_csv(const std::string& path, const FeatureSeries& f) {
  std::string out = "start_step,window,std,area_label\n";
  for (size_t i = 0; i < f.values.size(); ++i) {
    out += csv_row({std::to_string(f.start_steps[i]),
                    std::to_string(f.window), format_double(f.values[i]),
                    to_string(f.labels[i])});
  }
  write_text_file(path, out);
}

}  // namespace terraid
