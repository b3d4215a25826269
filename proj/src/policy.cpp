#include "terraid/policy.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace terraid {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

}  // namespace

PolicyNet PolicyNet::create(Rng& rng, int obs_dim, int act_dim,
                            std::array<int, 2> hidden, double initial_std) {
  if (!(initial_std > 0.0)) {
    throw std::invalid_argument("initial_std must be > 0");
  }
  PolicyNet net;
  net.mean_net = Mlp({obs_dim, hidden[0], hidden[1], act_dim});
  // sqrt(2) hidden gain, small output layer so initial actions hover near 0.
  net.mean_net.init_orthogonal(rng, std::sqrt(2.0), 0.01);
  net.log_std =
      Eigen::VectorXd::Constant(act_dim, std::log(initial_std));
  return net;
}

void PolicyNet::write_flat(double* dst) const {
  mean_net.write_flat(dst);
  dst += mean_net.parameter_count();
  std::copy(log_std.data(), log_std.data() + log_std.size(), dst);
}

void PolicyNet::read_flat(const double* src) {
  mean_net.read_flat(src);
  src += mean_net.parameter_count();
  std::copy(src, src + log_std.size(), log_std.data());
}

void PolicyNet::set_zero() {
  mean_net.set_zero();
  log_std.setZero();
}

ValueNet ValueNet::create(Rng& rng, int obs_dim, std::array<int, 2> hidden) {
  ValueNet net;
  net.net = Mlp({obs_dim, hidden[0], hidden[1], 1});
  net.net.init_orthogonal(rng, std::sqrt(2.0), 1.0);
  return net;
}

double gaussian_log_prob(const PolicyNet& policy,
                         const Eigen::RowVectorXd& mean,
                         const Eigen::RowVectorXd& action) {
  double logp = -0.5 * static_cast<double>(mean.size()) * kLog2Pi;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double sigma = std::exp(policy.log_std[i]);
    const double z = (action[i] - mean[i]) / sigma;
    logp += -0.5 * z * z - policy.log_std[i];
  }
  return logp;
}

ActionSample act(const PolicyNet& policy, std::span<const double> obs,
                 Rng& rng) {
  if (obs.size() != static_cast<size_t>(policy.mean_net.input_dim())) {
    throw std::invalid_argument("observation size mismatch");
  }
  Eigen::RowVectorXd x(obs.size());
  for (size_t i = 0; i < obs.size(); ++i) {
    if (!std::isfinite(obs[i])) {
      throw std::invalid_argument("non-finite observation component");
    }
    x[static_cast<Eigen::Index>(i)] = obs[i];
  }
  const Eigen::RowVectorXd mean = policy.mean_net.forward(x);
  Eigen::RowVectorXd action(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    action[i] = mean[i] + std::exp(policy.log_std[i]) * rng.normal();
  }
  ActionSample sample;
  sample.action = {action[0], action[1]};
  sample.log_prob = gaussian_log_prob(policy, mean, action);
  return sample;
}

std::array<double, kActDim> act_deterministic(const PolicyNet& policy,
                                              std::span<const double> obs) {
  Eigen::RowVectorXd x(obs.size());
  for (size_t i = 0; i < obs.size(); ++i) {
    x[static_cast<Eigen::Index>(i)] = obs[i];
  }
  const Eigen::RowVectorXd mean = policy.mean_net.forward(x);
  return {mean[0], mean[1]};
}

double policy_entropy(const PolicyNet& policy) {
  return policy.log_std.sum() +
         0.5 * static_cast<double>(policy.log_std.size()) * (1.0 + kLog2Pi);
}

LossStats ppo_loss(const PolicyNet& policy, const ValueNet& value,
                   const LossBatch& batch, const LossSettings& settings,
                   PolicyNet* policy_grad, ValueNet* value_grad) {
  const Eigen::Index n = batch.observations.rows();
  if (n == 0) throw std::invalid_argument("empty batch");
  const Eigen::Index act_dim = batch.actions.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  Mlp::Cache mean_cache;
  const Eigen::MatrixXd means =
      policy.mean_net.forward(batch.observations, mean_cache);

  const Eigen::ArrayXd sigma = policy.log_std.array().exp();
  // z(b,i) = (a - mu) / sigma
  Eigen::MatrixXd z = batch.actions - means;
  for (Eigen::Index i = 0; i < act_dim; ++i) z.col(i) /= sigma[i];

  Eigen::VectorXd log_probs(n);
  const double log_norm =
      -0.5 * static_cast<double>(act_dim) * kLog2Pi - policy.log_std.sum();
  for (Eigen::Index b = 0; b < n; ++b) {
    log_probs[b] = log_norm - 0.5 * z.row(b).squaredNorm();
  }

  const Eigen::ArrayXd ratios =
      (log_probs - batch.old_log_probs).array().exp();
  const Eigen::ArrayXd& adv = batch.advantages.array();
  const Eigen::ArrayXd unclipped = ratios * adv;
  const Eigen::ArrayXd clipped =
      ratios.min(1.0 + settings.clip_eps).max(1.0 - settings.clip_eps) * adv;

  LossStats stats;
  stats.policy_loss = -unclipped.min(clipped).mean();
  stats.clip_fraction =
      ((ratios - 1.0).abs() > settings.clip_eps).cast<double>().mean();
  stats.entropy = policy_entropy(policy);

  Mlp::Cache value_cache;
  const Eigen::VectorXd values =
      value.net.forward(batch.observations, value_cache);
  const Eigen::VectorXd value_err = values - batch.returns;
  stats.value_loss = value_err.squaredNorm() * inv_n;
  stats.total = stats.policy_loss + settings.value_coef * stats.value_loss -
                settings.entropy_coef * stats.entropy;

  if (policy_grad == nullptr && value_grad == nullptr) {
    if (!std::isfinite(stats.total)) {
      throw std::runtime_error("non-finite loss");
    }
    return stats;
  }

  // dL/dlogp_b: gradient flows only where the unclipped branch is selected.
  Eigen::ArrayXd dlogp(n);
  for (Eigen::Index b = 0; b < n; ++b) {
    const bool unclipped_active = unclipped[b] <= clipped[b];
    dlogp[b] = unclipped_active ? -inv_n * adv[b] * ratios[b] : 0.0;
  }

  if (policy_grad != nullptr) {
    // dlogp/dmean_i = z_i / sigma_i; dlogp/dlog_std_i = z_i^2 - 1.
    Eigen::MatrixXd mean_grad(n, act_dim);
    for (Eigen::Index i = 0; i < act_dim; ++i) {
      mean_grad.col(i) = dlogp * z.col(i).array() / sigma[i];
    }
    policy.mean_net.backward(mean_cache, mean_grad, policy_grad->mean_net);
    for (Eigen::Index i = 0; i < act_dim; ++i) {
      policy_grad->log_std[i] +=
          (dlogp * (z.col(i).array().square() - 1.0)).sum() -
          settings.entropy_coef;
    }
  }

  if (value_grad != nullptr) {
    const Eigen::MatrixXd dvalue =
        (2.0 * settings.value_coef * inv_n) * value_err;
    value.net.backward(value_cache, dvalue, value_grad->net);
  }

  if (!std::isfinite(stats.total)) {
    throw std::runtime_error("non-finite loss");
  }
  return stats;
}

void save_checkpoint(const std::string& path, const PolicyNet& policy,
                     const ValueNet& value) {
  const auto& sizes = policy.mean_net.layer_sizes();
  nlohmann::json header{
      {"format", "terraid-checkpoint"},
      {"version", 1},
      {"obs_dim", sizes.front()},
      {"act_dim", sizes.back()},
      {"hidden", {sizes[1], sizes[2]}},
      {"activation", "tanh"},
      {"policy_params", policy.parameter_count()},
      {"value_params", value.parameter_count()},
  };
  std::vector<double> blob(policy.parameter_count() + value.parameter_count());
  policy.write_flat(blob.data());
  value.write_flat(blob.data() + policy.parameter_count());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(blob.data()),
            static_cast<std::streamsize>(blob.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("missing checkpoint header: " + path);
  }
  const nlohmann::json header = nlohmann::json::parse(line);
  if (header.at("format").get<std::string>() != "terraid-checkpoint") {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  const int obs_dim = header.at("obs_dim").get<int>();
  const int act_dim = header.at("act_dim").get<int>();
  const auto hidden = header.at("hidden").get<std::array<int, 2>>();

  Checkpoint ckpt;
  ckpt.policy.mean_net = Mlp({obs_dim, hidden[0], hidden[1], act_dim});
  ckpt.policy.log_std = Eigen::VectorXd::Zero(act_dim);
  ckpt.value.net = Mlp({obs_dim, hidden[0], hidden[1], 1});

  const int policy_params = header.at("policy_params").get<int>();
  const int value_params = header.at("value_params").get<int>();
  if (policy_params != ckpt.policy.parameter_count() ||
      value_params != ckpt.value.parameter_count()) {
    throw std::runtime_error("checkpoint parameter count mismatch: " + path);
  }
  std::vector<double> blob(static_cast<size_t>(policy_params) + value_params);
  in.read(reinterpret_cast<char*>(blob.data()),
          static_cast<std::streamsize>(blob.size() * sizeof(double)));
  if (in.gcount() !=
      static_cast<std::streamsize>(blob.size() * sizeof(double))) {
    throw std::runtime_error("truncated checkpoint body: " + path);
  }
  ckpt.policy.read_flat(blob.data());
  ckpt.value.read_flat(blob.data() + policy_params);
  return ckpt;
}

}  // namespace terraid
