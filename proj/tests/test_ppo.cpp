#include <doctest.h>

#include <cmath>
#include <vector>

#include "terraid/ppo.hpp"

using namespace terraid;

namespace {

Heightfield tiny_flat_field() {
  HeightfieldParams p;
  p.flat_rect = AreaRect{-2.5, 0.5, -1.0, 0.5};
  p.rough_rect = AreaRect{10.0, 11.0, 10.0, 11.0};
  p.cell_size = 0.05;
  p.extent_pad = 0.5;
  p.roughness_scale = 0.0;
  return Heightfield::generate(p, 0);
}

/// Reference recursion written independently of the library loop: computes
/// A_t by expanding the definition forward from t.
Eigen::VectorXd gae_oracle(const Eigen::VectorXd& r, const Eigen::VectorXd& v,
                           const Eigen::VectorXd& dones, double final_value,
                           double gamma, double lambda) {
  const Eigen::Index n = r.size();
  Eigen::VectorXd delta(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double next_v = t + 1 < n ? v[t + 1] : final_value;
    delta[t] = r[t] + gamma * next_v * (1.0 - dones[t]) - v[t];
  }
  Eigen::VectorXd adv(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double acc = 0.0;
    double scale = 1.0;
    for (Eigen::Index s = t; s < n; ++s) {
      acc += scale * delta[s];
      if (dones[s] > 0.5) break;
      scale *= gamma * lambda;
    }
    adv[t] = acc;
  }
  return adv;
}

}  // namespace

TEST_SUITE("ppo") {

TEST_CASE("lr schedule is linear") {
  CHECK(lr_at(0, 1000, 3e-4) == doctest::Approx(3e-4));
  CHECK(lr_at(1000, 1000, 3e-4) == doctest::Approx(0.0));
  CHECK(lr_at(500, 1000, 3e-4) == doctest::Approx(1.5e-4));
}

TEST_CASE("gae three-step hand example") {
  Eigen::VectorXd r(3), v(3), d(3);
  r << 1.0, 0.0, 1.0;
  v << 0.5, 0.5, 0.5;
  d << 0.0, 0.0, 0.0;
  const GaeResult out = gae(r, v, d, 0.0, 0.99, 0.95);
  CHECK(out.advantages[2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out.advantages[1] == doctest::Approx(0.46525).epsilon(1e-12));
  CHECK(out.advantages[0] == doctest::Approx(1.432567625).epsilon(1e-12));
  CHECK(out.returns[0] == doctest::Approx(1.932567625).epsilon(1e-12));
  const Eigen::VectorXd oracle = gae_oracle(r, v, d, 0.0, 0.99, 0.95);
  for (int t = 0; t < 3; ++t) {
    CHECK(out.advantages[t] == doctest::Approx(oracle[t]).epsilon(1e-12));
  }
}

TEST_CASE("lambda zero reduces to one-step TD advantages") {
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 20;
    Eigen::VectorXd r(n), v(n), d(n);
    for (int t = 0; t < n; ++t) {
      r[t] = rng.normal();
      v[t] = rng.normal();
      d[t] = rng.uniform() < 0.15 ? 1.0 : 0.0;
    }
    const double final_value = rng.normal();
    const GaeResult out = gae(r, v, d, final_value, 0.99, 0.0);
    for (int t = 0; t < n; ++t) {
      const double next_v = t + 1 < n ? v[t + 1] : final_value;
      const double delta = r[t] + 0.99 * next_v * (1.0 - d[t]) - v[t];
      CHECK(out.advantages[t] == doctest::Approx(delta).epsilon(1e-12));
    }
  }
}

TEST_CASE("lambda one with gamma one and zero values sums future rewards") {
  Eigen::VectorXd r(5), v(5), d(5);
  r << 1.0, 2.0, 3.0, 4.0, 5.0;
  v.setZero();
  d << 0.0, 0.0, 1.0, 0.0, 0.0;  // episode break after t = 2
  const GaeResult out = gae(r, v, d, 0.0, 1.0, 1.0);
  CHECK(out.advantages[0] == doctest::Approx(6.0));
  CHECK(out.advantages[1] == doctest::Approx(5.0));
  CHECK(out.advantages[2] == doctest::Approx(3.0));
  CHECK(out.advantages[3] == doctest::Approx(9.0));
  CHECK(out.advantages[4] == doctest::Approx(5.0));
}

TEST_CASE("gae matches the expansion oracle on random sequences") {
  Rng rng(23);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 25;
    Eigen::VectorXd r(n), v(n), d(n);
    for (int t = 0; t < n; ++t) {
      r[t] = rng.normal();
      v[t] = rng.normal();
      d[t] = rng.uniform() < 0.2 ? 1.0 : 0.0;
    }
    const double final_value = rng.normal();
    const GaeResult out = gae(r, v, d, final_value, 0.97, 0.9);
    const Eigen::VectorXd oracle = gae_oracle(r, v, d, final_value, 0.97, 0.9);
    for (int t = 0; t < n; ++t) {
      CHECK(out.advantages[t] == doctest::Approx(oracle[t]).epsilon(1e-10));
    }
  }
}

TEST_CASE("gae rejects mismatched lengths") {
  Eigen::VectorXd r(3), v(2), d(3);
  r.setZero();
  v.setZero();
  d.setZero();
  CHECK_THROWS_AS(gae(r, v, d, 0.0, 0.99, 0.95), std::invalid_argument);
}

TEST_CASE("identical old and new parameters give unit ratios") {
  Rng init(3);
  PolicyNet policy = PolicyNet::create(init);
  ValueNet value = ValueNet::create(init);
  Rng rng(4);
  const int n = 16;
  LossBatch batch;
  batch.observations.resize(n, kObsDim);
  batch.actions.resize(n, kActDim);
  batch.old_log_probs.resize(n);
  batch.advantages.resize(n);
  batch.returns.resize(n);
  for (int b = 0; b < n; ++b) {
    for (int i = 0; i < kObsDim; ++i) batch.observations(b, i) = rng.normal();
  }
  const Eigen::MatrixXd means = policy.mean_net.forward(batch.observations);
  for (int b = 0; b < n; ++b) {
    for (int i = 0; i < kActDim; ++i) {
      batch.actions(b, i) =
          means(b, i) + std::exp(policy.log_std[i]) * rng.normal();
    }
    batch.old_log_probs[b] =
        gaussian_log_prob(policy, means.row(b), batch.actions.row(b));
    batch.advantages[b] = rng.normal();
    batch.returns[b] = rng.normal();
  }
  const LossStats stats = ppo_loss(policy, value, batch, LossSettings{});
  CHECK(stats.clip_fraction == 0.0);
  // With r = 1 the surrogate is exactly -mean(A).
  CHECK(stats.policy_loss ==
        doctest::Approx(-batch.advantages.mean()).epsilon(1e-9));
}

TEST_CASE("clipped sample contributes zero policy gradient") {
  Rng init(5);
  PolicyNet policy = PolicyNet::create(init);
  ValueNet value = ValueNet::create(init);
  Rng rng(6);
  const double eps = 0.2;
  LossBatch batch;
  batch.observations.resize(1, kObsDim);
  batch.actions.resize(1, kActDim);
  batch.old_log_probs.resize(1);
  batch.advantages.resize(1);
  batch.returns.resize(1);
  for (int i = 0; i < kObsDim; ++i) batch.observations(0, i) = rng.normal();
  const Eigen::MatrixXd mean = policy.mean_net.forward(batch.observations);
  for (int i = 0; i < kActDim; ++i) {
    batch.actions(0, i) = mean(0, i) + 0.5;
  }
  const double logp =
      gaussian_log_prob(policy, mean.row(0), batch.actions.row(0));
  // ratio = 1 + 2 eps, advantage positive -> clipped branch, no gradient.
  batch.old_log_probs[0] = logp - std::log(1.0 + 2.0 * eps);
  batch.advantages[0] = 1.7;
  batch.returns[0] = 0.0;

  LossSettings settings;
  settings.clip_eps = eps;
  settings.entropy_coef = 0.0;  // isolate the surrogate term
  settings.value_coef = 0.0;
  PolicyNet grad = policy;
  grad.set_zero();
  ppo_loss(policy, value, batch, settings, &grad, nullptr);
  Eigen::VectorXd g(grad.parameter_count());
  grad.write_flat(g.data());
  CHECK(g.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("advantage normalization maps a 2-sample batch to +-1") {
  // Normalization happens inside ppo_update; check the arithmetic directly.
  Eigen::VectorXd adv(2);
  adv << 3.0, 7.0;
  const double mean = adv.mean();
  const double std = std::sqrt((adv.array() - mean).square().mean());
  Eigen::VectorXd norm = (adv.array() - mean) / (std + 1e-8);
  CHECK(norm[0] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(norm[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("total_steps zero returns the initial parameters unchanged") {
  const Heightfield field = tiny_flat_field();
  PpoConfig config;
  config.total_steps = 0;
  config.n_envs = 2;
  const RobotParams robot;
  const TaskConstants task;
  const auto factory = [&](int n) {
    std::vector<TargetReachEnv> envs;
    for (int e = 0; e < n; ++e) {
      envs.emplace_back(&field, field.params().flat_rect, robot, task, 10 + e);
    }
    return envs;
  };
  const TrainResult a = train(config, factory, 123);
  const TrainResult b = train(config, factory, 123);
  Eigen::VectorXd pa(a.policy.parameter_count()), pb(b.policy.parameter_count());
  a.policy.write_flat(pa.data());
  b.policy.write_flat(pb.data());
  CHECK(pa == pb);
  CHECK(a.log.empty());
}

TEST_CASE("short training run is deterministic for a fixed seed") {
  const Heightfield field = tiny_flat_field();
  PpoConfig config;
  config.total_steps = 1200;
  config.rollout_steps = 200;
  config.n_envs = 3;
  const RobotParams robot;
  const TaskConstants task;
  const auto factory = [&](int n) {
    std::vector<TargetReachEnv> envs;
    for (int e = 0; e < n; ++e) {
      envs.emplace_back(&field, field.params().flat_rect, robot, task,
                        derive_seed(900, "env-" + std::to_string(e)));
    }
    return envs;
  };
  const TrainResult a = train(config, factory, 777);
  const TrainResult b = train(config, factory, 777);
  REQUIRE(a.log.size() == b.log.size());
  for (size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].mean_reward == b.log[i].mean_reward);
    CHECK(a.log[i].clip_fraction == b.log[i].clip_fraction);
    CHECK(a.log[i].entropy == b.log[i].entropy);
  }
  Eigen::VectorXd pa(a.policy.parameter_count()), pb(b.policy.parameter_count());
  a.policy.write_flat(pa.data());
  b.policy.write_flat(pb.data());
  CHECK(pa == pb);
}

TEST_CASE("config validation rejects bad hyperparameters") {
  PpoConfig config;
  config.gamma = 1.5;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = PpoConfig{};
  config.batch_size = 1;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = PpoConfig{};
  config.gae_lambda = -0.1;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

}  // TEST_SUITE
