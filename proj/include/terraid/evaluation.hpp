#pragma once

#include <cstdint>
#include <string>

#include "terraid/env.hpp"
#include "terraid/policy.hpp"

namespace terraid {

enum class ActionMode { kDeterministic, kStochastic, kUniformRandom };

struct EvalStats {
  int episodes = 0;
  int reached = 0;
  double success_rate = 0.0;
  double mean_time_s = 0.0;  // over reached episodes
  double std_time_s = 0.0;

  double success_pct() const { return 100.0 * success_rate; }
};

/// Runs independent target-reaching trials (fresh spawn per trial) and
/// reports the success rate and reaching-time statistics. `policy` may be
/// null for ActionMode::kUniformRandom.
EvalStats evaluate_policy(const PolicyNet* policy, ActionMode mode,
                          const Heightfield& field, const AreaRect& area,
                          const RobotParams& robot_params,
                          const TaskConstants& task, int n_episodes,
                          std::uint64_t seed);

}  // namespace terraid
