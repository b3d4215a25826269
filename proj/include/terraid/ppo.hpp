#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "terraid/env.hpp"
#include "terraid/policy.hpp"

namespace terraid {

struct PpoConfig {
  long total_steps = 50000;  // aggregate environment steps across all envs
  int rollout_steps = 1024;  // per environment, per update
  int batch_size = 64;
  int epochs = 10;
  double learning_rate = 3e-4;
  double clip_eps = 0.2;
  double gamma = 0.99;
  double entropy_coef = 5e-4;
  double gae_lambda = 0.95;
  bool advantage_normalization = true;
  bool linear_lr_decay = true;
  int n_envs = 9;
  double value_coef = 0.5;
  double initial_action_std = 1.2;  // fresh-policy exploration std
  std::string pretrain_checkpoint;  // empty = train from scratch

  void validate() const;
};

/// Linearly decayed learning rate: lr0 * (1 - step / total_steps).
double lr_at(long step, long total_steps, double lr0);

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;  // advantages + values
};

/// Generalized advantage estimation over one trajectory:
///   delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
///   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
/// `final_value` bootstraps past the last step. Throws on length mismatch.
GaeResult gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
              const Eigen::VectorXd& dones, double final_value, double gamma,
              double lambda);

/// Per-step tuples across n_envs environments, row index t * n_envs + env.
struct RolloutBuffer {
  int n_envs = 0;
  int horizon = 0;
  Eigen::MatrixXd observations;  // (horizon * n_envs) x obs_dim
  Eigen::MatrixXd actions;       // (horizon * n_envs) x act_dim
  Eigen::VectorXd log_probs;
  Eigen::VectorXd rewards;
  Eigen::VectorXd values;
  Eigen::VectorXd dones;
  Eigen::VectorXd final_values;  // one per env, for bootstrapping

  Eigen::Index rows() const {
    return static_cast<Eigen::Index>(horizon) * n_envs;
  }

  /// GAE applied per environment column.
  GaeResult compute_gae(double gamma, double lambda) const;
};

/// First-order optimizer with adaptive moments over a flat parameter vector.
class Adam {
 public:
  explicit Adam(int n, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);

 private:
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  double beta1_, beta2_, eps_;
  long t_ = 0;
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

/// One PPO update: `epochs` passes over shuffled minibatches, advantages
/// normalized per minibatch when enabled, one Adam step per minibatch.
UpdateStats ppo_update(PolicyNet& policy, ValueNet& value, Adam& policy_opt,
                       Adam& value_opt, const RolloutBuffer& buffer,
                       const PpoConfig& config, double lr, Rng& shuffle_rng);

struct IterationLog {
  int iteration = 0;
  long env_steps = 0;
  double mean_reward = 0.0;
  double success_rate = 0.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  PolicyNet policy;
  ValueNet value;
  std::vector<IterationLog> log;
  std::vector<EpisodeSummary> episodes;
};

using EnvFactory = std::function<std::vector<TargetReachEnv>(int n_envs)>;
using IterationCallback =
    std::function<void(int iteration, const PolicyNet&, const ValueNet&)>;

/// Runs rollout/update cycles until total_steps aggregate environment steps.
/// Fully single-threaded and deterministic for a fixed seed. When
/// `initial` is non-null training continues from those parameters.
TrainResult train(const PpoConfig& config, const EnvFactory& env_factory,
                  std::uint64_t seed, const Checkpoint* initial = nullptr,
                  std::ostream* progress = nullptr,
                  const IterationCallback& on_iteration = nullptr);

}  // namespace terraid
