#include "terraid/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace terraid {

void PpoConfig::validate() const {
  if (total_steps < 0) throw std::invalid_argument("total_steps must be >= 0");
  if (rollout_steps < 1 || n_envs < 1) {
    throw std::invalid_argument("rollout_steps and n_envs must be positive");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must be in (0, 1]");
  }
  if (gae_lambda < 0.0 || gae_lambda > 1.0) {
    throw std::invalid_argument("gae_lambda must be in [0, 1]");
  }
  if (!(clip_eps > 0.0)) throw std::invalid_argument("clip_eps must be > 0");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1 || (advantage_normalization && batch_size < 2)) {
    throw std::invalid_argument(
        "batch_size must be >= 2 when normalizing advantages");
  }
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be > 0");
  }
  if (!(initial_action_std > 0.0)) {
    throw std::invalid_argument("initial_action_std must be > 0");
  }
}

double lr_at(long step, long total_steps, double lr0) {
  if (total_steps <= 0) return lr0;
  const double frac =
      1.0 - static_cast<double>(step) / static_cast<double>(total_steps);
  return lr0 * std::max(0.0, frac);
}

GaeResult gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
              const Eigen::VectorXd& dones, double final_value, double gamma,
              double lambda) {
  const Eigen::Index n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw std::invalid_argument("gae: sequence lengths differ");
  }
  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double last_advantage = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double not_done = 1.0 - dones[t];
    const double next_value = t + 1 < n ? values[t + 1] : final_value;
    const double delta =
        rewards[t] + gamma * next_value * not_done - values[t];
    last_advantage = delta + gamma * lambda * not_done * last_advantage;
    out.advantages[t] = last_advantage;
    out.returns[t] = last_advantage + values[t];
  }
  return out;
}

GaeResult RolloutBuffer::compute_gae(double gamma, double lambda) const {
  GaeResult out;
  out.advantages.resize(rows());
  out.returns.resize(rows());
  Eigen::VectorXd r(horizon), v(horizon), d(horizon);
  for (int e = 0; e < n_envs; ++e) {
    for (int t = 0; t < horizon; ++t) {
      const Eigen::Index row = static_cast<Eigen::Index>(t) * n_envs + e;
      r[t] = rewards[row];
      v[t] = values[row];
      d[t] = dones[row];
    }
    const GaeResult env_gae = gae(r, v, d, final_values[e], gamma, lambda);
    for (int t = 0; t < horizon; ++t) {
      const Eigen::Index row = static_cast<Eigen::Index>(t) * n_envs + e;
      out.advantages[row] = env_gae.advantages[t];
      out.returns[row] = env_gae.returns[t];
    }
  }
  return out;
}

Adam::Adam(int n, double beta1, double beta2, double eps)
    : m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)),
      beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw std::invalid_argument("adam: size mismatch");
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_.array().matrix() +
       (1.0 - beta2_) * grad.array().square().matrix();
  const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr * (m_.array() / bias1) /
                    ((v_.array() / bias2).sqrt() + eps_);
}

namespace {

Eigen::VectorXd policy_to_vector(const PolicyNet& net) {
  Eigen::VectorXd v(net.parameter_count());
  net.write_flat(v.data());
  return v;
}

Eigen::VectorXd value_to_vector(const ValueNet& net) {
  Eigen::VectorXd v(net.parameter_count());
  net.write_flat(v.data());
  return v;
}

void shuffle_indices(std::vector<Eigen::Index>& idx, Rng& rng) {
  for (size_t i = idx.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(
        rng.uniform_int(0, static_cast<int>(i) - 1));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

UpdateStats ppo_update(PolicyNet& policy, ValueNet& value, Adam& policy_opt,
                       Adam& value_opt, const RolloutBuffer& buffer,
                       const PpoConfig& config, double lr, Rng& shuffle_rng) {
  const Eigen::Index n = buffer.rows();
  if (n == 0) throw std::invalid_argument("empty rollout buffer");

  const GaeResult gae_out =
      buffer.compute_gae(config.gamma, config.gae_lambda);

  std::vector<Eigen::Index> indices(static_cast<size_t>(n));
  std::iota(indices.begin(), indices.end(), 0);

  Eigen::VectorXd policy_params = policy_to_vector(policy);
  Eigen::VectorXd value_params = value_to_vector(value);

  PolicyNet policy_grad = policy;  // shape template; zeroed before use
  ValueNet value_grad = value;

  LossSettings settings{config.clip_eps, config.value_coef,
                        config.entropy_coef};

  UpdateStats stats;
  long batches = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_indices(indices, shuffle_rng);
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index size =
          std::min<Eigen::Index>(config.batch_size, n - start);
      if (size < 2 && config.advantage_normalization) continue;

      LossBatch batch;
      batch.observations.resize(size, buffer.observations.cols());
      batch.actions.resize(size, buffer.actions.cols());
      batch.old_log_probs.resize(size);
      batch.advantages.resize(size);
      batch.returns.resize(size);
      for (Eigen::Index i = 0; i < size; ++i) {
        const Eigen::Index row = indices[static_cast<size_t>(start + i)];
        batch.observations.row(i) = buffer.observations.row(row);
        batch.actions.row(i) = buffer.actions.row(row);
        batch.old_log_probs[i] = buffer.log_probs[row];
        batch.advantages[i] = gae_out.advantages[row];
        batch.returns[i] = gae_out.returns[row];
      }
      if (config.advantage_normalization) {
        const double mean = batch.advantages.mean();
        const double var =
            (batch.advantages.array() - mean).square().mean();
        batch.advantages =
            (batch.advantages.array() - mean) / (std::sqrt(var) + 1e-8);
      }

      policy_grad.set_zero();
      value_grad.set_zero();
      const LossStats loss = ppo_loss(policy, value, batch, settings,
                                      &policy_grad, &value_grad);

      policy_opt.step(policy_params, policy_to_vector(policy_grad), lr);
      value_opt.step(value_params, value_to_vector(value_grad), lr);
      policy.read_flat(policy_params.data());
      value.read_flat(value_params.data());

      stats.policy_loss += loss.policy_loss;
      stats.value_loss += loss.value_loss;
      stats.entropy += loss.entropy;
      stats.clip_fraction += loss.clip_fraction;
      ++batches;
    }
  }
  if (batches > 0) {
    stats.policy_loss /= batches;
    stats.value_loss /= batches;
    stats.entropy /= batches;
    stats.clip_fraction /= batches;
  }
  return stats;
}

TrainResult train(const PpoConfig& config, const EnvFactory& env_factory,
                  std::uint64_t seed, const Checkpoint* initial,
                  std::ostream* progress,
                  const IterationCallback& on_iteration) {
  config.validate();

  Rng init_rng(derive_seed(seed, "net-init"));
  Rng action_rng(derive_seed(seed, "actions"));
  Rng shuffle_rng(derive_seed(seed, "shuffle"));

  TrainResult result;
  if (initial != nullptr) {
    result.policy = initial->policy;
    result.value = initial->value;
  } else {
    result.policy = PolicyNet::create(init_rng, kObsDim, kActDim, {64, 64},
                                      config.initial_action_std);
    result.value = ValueNet::create(init_rng);
  }
  if (config.total_steps == 0) return result;

  std::vector<TargetReachEnv> envs = env_factory(config.n_envs);
  if (static_cast<int>(envs.size()) != config.n_envs) {
    throw std::runtime_error("environment factory returned wrong count");
  }
  const int obs_dim = result.policy.mean_net.input_dim();
  const int act_dim = result.policy.mean_net.output_dim();

  Adam policy_opt(result.policy.parameter_count());
  Adam value_opt(result.value.parameter_count());

  Eigen::MatrixXd obs(config.n_envs, obs_dim);
  for (int e = 0; e < config.n_envs; ++e) {
    const auto o = envs[e].observation();
    for (int i = 0; i < obs_dim; ++i) obs(e, i) = o[i];
  }

  long env_steps = 0;
  int iteration = 0;
  while (env_steps < config.total_steps) {
    const long remaining = config.total_steps - env_steps;
    const int horizon = static_cast<int>(std::min<long>(
        config.rollout_steps,
        (remaining + config.n_envs - 1) / config.n_envs));

    RolloutBuffer buffer;
    buffer.n_envs = config.n_envs;
    buffer.horizon = horizon;
    buffer.observations.resize(buffer.rows(), obs_dim);
    buffer.actions.resize(buffer.rows(), act_dim);
    buffer.log_probs.resize(buffer.rows());
    buffer.rewards.resize(buffer.rows());
    buffer.values.resize(buffer.rows());
    buffer.dones.resize(buffer.rows());
    buffer.final_values.resize(config.n_envs);

    for (int t = 0; t < horizon; ++t) {
      const Eigen::MatrixXd means = result.policy.mean_net.forward(obs);
      const Eigen::VectorXd values = result.value.net.forward(obs);
      for (int e = 0; e < config.n_envs; ++e) {
        const Eigen::Index row = static_cast<Eigen::Index>(t) * config.n_envs + e;
        Eigen::RowVectorXd action(act_dim);
        for (int i = 0; i < act_dim; ++i) {
          action[i] = means(e, i) +
                      std::exp(result.policy.log_std[i]) * action_rng.normal();
        }
        const double logp =
            gaussian_log_prob(result.policy, means.row(e), action);

        buffer.observations.row(row) = obs.row(e);
        buffer.actions.row(row) = action;
        buffer.log_probs[row] = logp;
        buffer.values[row] = values[e];

        const auto out = envs[e].step(action[0], action[1]);
        buffer.rewards[row] = out.reward;
        buffer.dones[row] = out.done ? 1.0 : 0.0;
        for (int i = 0; i < obs_dim; ++i) obs(e, i) = out.observation[i];
      }
    }
    const Eigen::VectorXd last_values = result.value.net.forward(obs);
    buffer.final_values = last_values;

    const double lr = config.linear_lr_decay
                          ? lr_at(env_steps, config.total_steps,
                                  config.learning_rate)
                          : config.learning_rate;
    const UpdateStats update = ppo_update(result.policy, result.value,
                                          policy_opt, value_opt, buffer,
                                          config, lr, shuffle_rng);

    env_steps += static_cast<long>(horizon) * config.n_envs;
    ++iteration;

    long completed = 0;
    long reached = 0;
    double reward_sum = 0.0;
    for (auto& env : envs) {
      for (const auto& ep : env.completed_episodes()) {
        ++completed;
        reward_sum += ep.total_reward;
        if (ep.status == EpisodeStatus::kReached) ++reached;
        result.episodes.push_back(ep);
      }
      env.clear_completed_episodes();
    }

    IterationLog row;
    row.iteration = iteration;
    row.env_steps = env_steps;
    row.mean_reward = completed > 0 ? reward_sum / completed : 0.0;
    row.success_rate =
        completed > 0 ? static_cast<double>(reached) / completed : 0.0;
    row.clip_fraction = update.clip_fraction;
    row.entropy = update.entropy;
    row.learning_rate = lr;
    result.log.push_back(row);

    if (progress != nullptr) {
      (*progress) << "iter " << iteration << " steps " << env_steps
                  << " mean_reward " << row.mean_reward << " success "
                  << row.success_rate << " clip " << row.clip_fraction
                  << "\n";
    }
    if (on_iteration) on_iteration(iteration, result.policy, result.value);
  }
  return result;
}

}  // namespace terraid
