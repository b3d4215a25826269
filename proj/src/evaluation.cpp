#include "terraid/evaluation.hpp"

#include <cmath>
#include <stdexcept>

namespace terraid {

EvalStats evaluate_policy(const PolicyNet* policy, ActionMode mode,
                          const Heightfield& field, const AreaRect& area,
                          const RobotParams& robot_params,
                          const TaskConstants& task, int n_episodes,
                          std::uint64_t seed) {
  if (mode != ActionMode::kUniformRandom && policy == nullptr) {
    throw std::invalid_argument("policy required for this action mode");
  }
  TargetReachEnv env(&field, area, robot_params, task, seed);
  Rng action_rng(derive_seed(seed, "eval-actions"));

  EvalStats stats;
  stats.episodes = n_episodes;
  double time_sum = 0.0;
  double time_sq_sum = 0.0;

  for (int trial = 0; trial < n_episodes; ++trial) {
    auto obs = env.reset();
    const int max_steps = env.episode().max_steps;
    for (int s = 0; s < max_steps + 1; ++s) {
      double a_left = 0.0, a_right = 0.0;
      switch (mode) {
        case ActionMode::kDeterministic: {
          const auto a = act_deterministic(*policy, obs);
          a_left = a[0];
          a_right = a[1];
          break;
        }
        case ActionMode::kStochastic: {
          const auto a = act(*policy, obs, action_rng);
          a_left = a.action[0];
          a_right = a.action[1];
          break;
        }
        case ActionMode::kUniformRandom:
          a_left = action_rng.uniform(-robot_params.max_wheel_rate,
                                      robot_params.max_wheel_rate);
          a_right = action_rng.uniform(-robot_params.max_wheel_rate,
                                       robot_params.max_wheel_rate);
          break;
      }
      const auto out = env.step(a_left, a_right);
      obs = out.observation;
      if (out.done) {
        if (out.status == EpisodeStatus::kReached) {
          ++stats.reached;
          const auto& ep = env.completed_episodes().back();
          const double t = ep.steps * robot_params.dt;
          time_sum += t;
          time_sq_sum += t * t;
        }
        break;
      }
    }
  }

  stats.success_rate =
      n_episodes > 0 ? static_cast<double>(stats.reached) / n_episodes : 0.0;
  if (stats.reached > 0) {
    stats.mean_time_s = time_sum / stats.reached;
    const double var =
        time_sq_sum / stats.reached - stats.mean_time_s * stats.mean_time_s;
    stats.std_time_s = std::sqrt(var > 0.0 ? var : 0.0);
  }
  return stats;
}

}  // namespace terraid
