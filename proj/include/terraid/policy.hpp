#pragma once

#include <array>
#include <span>
#include <string>

#include "terraid/mlp.hpp"
#include "terraid/rng.hpp"

namespace terraid {

inline constexpr int kObsDim = 10;
inline constexpr int kActDim = 2;

/// Diagonal-Gaussian policy: an MLP maps the observation to the action mean;
/// the log standard deviations are state-independent parameters.
struct PolicyNet {
  Mlp mean_net;
  Eigen::VectorXd log_std;

  static PolicyNet create(Rng& rng, int obs_dim = kObsDim,
                          int act_dim = kActDim,
                          std::array<int, 2> hidden = {64, 64},
                          double initial_std = 1.0);

  int parameter_count() const {
    return mean_net.parameter_count() + static_cast<int>(log_std.size());
  }
  void write_flat(double* dst) const;
  void read_flat(const double* src);
  void set_zero();
};

struct ValueNet {
  Mlp net;

  static ValueNet create(Rng& rng, int obs_dim = kObsDim,
                         std::array<int, 2> hidden = {64, 64});

  int parameter_count() const { return net.parameter_count(); }
  void write_flat(double* dst) const { net.write_flat(dst); }
  void read_flat(const double* src) { net.read_flat(src); }
  void set_zero() { net.set_zero(); }
};

struct ActionSample {
  std::array<double, kActDim> action;
  double log_prob = 0.0;
};

/// Samples from N(mean(obs), exp(log_std)^2). The log density is of the raw
/// (pre-clamp) sample; clamping to the actuator range happens in the
/// environment. Throws std::invalid_argument on non-finite observations.
ActionSample act(const PolicyNet& policy, std::span<const double> obs,
                 Rng& rng);

/// Mean action, no sampling (evaluation mode).
std::array<double, kActDim> act_deterministic(const PolicyNet& policy,
                                              std::span<const double> obs);

/// Log density of `action` under the policy at `mean`.
double gaussian_log_prob(const PolicyNet& policy,
                         const Eigen::RowVectorXd& mean,
                         const Eigen::RowVectorXd& action);

/// Differential entropy of the action distribution:
/// sum(log_std) + act_dim/2 * (1 + log(2 pi)).
double policy_entropy(const PolicyNet& policy);

/// Minibatch for the clipped-surrogate loss. Advantages are used as given;
/// normalize before filling the batch if desired.
struct LossBatch {
  Eigen::MatrixXd observations;  // B x obs_dim
  Eigen::MatrixXd actions;       // B x act_dim
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

struct LossSettings {
  double clip_eps = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 5e-4;
};

struct LossStats {
  double total = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

/// Evaluates
///   L = -mean(min(r A, clip(r, 1-eps, 1+eps) A))
///       + value_coef * mean((V - R)^2) - entropy_coef * H
/// and, when the grad outputs are non-null, accumulates the exact analytic
/// gradients with respect to every parameter.
LossStats ppo_loss(const PolicyNet& policy, const ValueNet& value,
                   const LossBatch& batch, const LossSettings& settings,
                   PolicyNet* policy_grad = nullptr,
                   ValueNet* value_grad = nullptr);

/// Versioned checkpoint: one JSON header line plus the flat parameter
/// arrays as little-endian float64. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const PolicyNet& policy,
                     const ValueNet& value);

struct Checkpoint {
  PolicyNet policy;
  ValueNet value;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace terraid
