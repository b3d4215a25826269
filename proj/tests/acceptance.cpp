// Acceptance suite: one self-contained check per criterion, each printing a
// PASS/FAIL line. Run with no arguments for the full suite, or pass
// criterion numbers to run a subset (criteria 4 and 8 reuse artifacts from
// criterion 3's pipeline run).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "terraid/evaluation.hpp"
#include "terraid/io.hpp"
#include "terraid/pipeline.hpp"

using namespace terraid;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int number;
  std::string name;
  std::function<bool(std::ostream&)> run;
};

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

bool check(std::ostream& out, bool ok, const std::string& what) {
  if (!ok) out << "    FAILED: " << what << "\n";
  return ok;
}

const fs::path kWorkDir = fs::temp_directory_path() / "terraid_acceptance";

// ---------------------------------------------------------------------------
// 1. Reward-formula exactness.
bool criterion_reward_formulas(std::ostream& out) {
  bool ok = true;
  ok &= check(out, max_episode_steps(0.1) == 320, "MES(0.1) == 320");
  ok &= check(out, max_episode_steps(0.5) == 400, "MES(0.5) == 400");
  ok &= check(out, std::abs(penalty_distance(0.3, 2) - 0.3) <= 1e-9,
              "PED(0.3, 2) == 0.3");
  ok &= check(out, std::abs(penalty_distance(0.3, 0) - 0.5) <= 1e-9,
              "PED(0.3, 0) == 0.5");
  ok &= check(out, std::abs(base_reward(0.1) - 240.0) <= 1e-9,
              "BR(0.1) == 240");
  ok &= check(out, std::abs(base_reward(0.5) - 100.0) <= 1e-9,
              "BR(0.5) == 100");
  ok &= check(out, std::abs(base_reward(0.3) - 190.0) <= 1e-9,
              "BR(0.3) == 190");

  EpisodeState ep;
  ep.initial_distance = 0.1;
  ep.max_steps = max_episode_steps(0.1);
  ep.step_count = 160;
  ep.mo_sum = 160.0;
  ep.status = EpisodeStatus::kReached;
  ok &= check(out, std::abs(final_reward(ep, TaskConstants{}) - 289.5) <= 1e-9,
              "final_reward(MO=1, ID=0.1, steps=160) == 289.5");

  ok &= check(out, std::abs(truncate_tenth(0.37) - 0.3) <= 1e-9,
              "PD truncation: 0.37 -> 0.3");
  return ok;
}

// ---------------------------------------------------------------------------
// 2. EM correctness: monotone log-likelihood and parameter recovery.
bool criterion_em(std::ostream& out) {
  bool ok = true;

  struct Dataset {
    double mu0, s0, mu1, s1;
    int n0, n1;
    std::uint64_t seed;
  };
  const Dataset datasets[] = {
      {0.0, 1.0, 5.0, 1.0, 800, 800, 11},
      {0.05, 0.01, 0.11, 0.03, 1000, 1000, 12},
      {0.0, 1.0, 1.5, 2.5, 1200, 400, 13},
  };
  for (const auto& ds : datasets) {
    Rng data_rng(ds.seed);
    std::vector<double> data;
    for (int i = 0; i < ds.n0; ++i) data.push_back(data_rng.normal(ds.mu0, ds.s0));
    for (int i = 0; i < ds.n1; ++i) data.push_back(data_rng.normal(ds.mu1, ds.s1));
    double lo = data[0], hi = data[0];
    for (double x : data) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    Rng init_rng(ds.seed + 1000);
    for (int rep = 0; rep < 100 && ok; ++rep) {
      GmmInit init;
      init.mean = {init_rng.uniform(lo, hi), init_rng.uniform(lo, hi)};
      init.stddev = {init_rng.uniform(0.2, 2.0) * (ds.s0 + ds.s1),
                     init_rng.uniform(0.2, 2.0) * (ds.s0 + ds.s1)};
      const double w = init_rng.uniform(0.1, 0.9);
      init.weight = {w, 1.0 - w};
      const EmResult fit = em_fit(data, init, EmOptions{});
      for (size_t i = 1; i < fit.log_likelihood_trace.size(); ++i) {
        if (fit.log_likelihood_trace[i] <
            fit.log_likelihood_trace[i - 1] - 1e-9) {
          ok = check(out, false, "log-likelihood decreased at init " +
                                     std::to_string(rep));
          break;
        }
      }
    }
    if (!ok) break;
  }

  // Parameter recovery on the window-70 style mixture.
  Rng rng(42);
  std::vector<double> data;
  std::vector<Area> truth;
  for (int i = 0; i < 2000; ++i) {
    data.push_back(rng.normal(0.05, 0.01));
    truth.push_back(Area::kFlat);
  }
  for (int i = 0; i < 2000; ++i) {
    data.push_back(rng.normal(0.11, 0.03));
    truth.push_back(Area::kRough);
  }
  const EmResult fit = fit_gmm(data, EmOptions{}, 4242);
  const int lo_c = fit.model.flat_component;
  ok &= check(out, std::abs(fit.model.mean[lo_c] - 0.05) <= 0.01,
              "recovered flat mean within 0.01");
  ok &= check(out, std::abs(fit.model.mean[1 - lo_c] - 0.11) <= 0.01,
              "recovered rough mean within 0.01");

  const auto predicted = classify(fit.model, data);
  const double acc = evaluate(predicted, truth).accuracy();
  GmmModel bayes;
  bayes.weight = {0.5, 0.5};
  bayes.mean = {0.05, 0.11};
  bayes.stddev = {0.01, 0.03};
  bayes.flat_component = 0;
  const double bayes_acc = evaluate(classify(bayes, data), truth).accuracy();
  out << "    gmm accuracy " << format_double(acc) << ", bayes "
      << format_double(bayes_acc) << "\n";
  ok &= check(out, std::abs(acc - bayes_acc) <= 0.03,
              "accuracy within 3 points of the Bayes rule");
  return ok;
}

// ---------------------------------------------------------------------------
// 3. Desk-scale pipeline: accuracy trend and calibrated pitch band.
bool criterion_pipeline_trend(std::ostream& out) {
  RunConfig config;
  config.seed = 7;
  config.out_dir = (kWorkDir / "pipeline").string();
  fs::remove_all(config.out_dir);

  std::ostringstream log;
  run_pipeline(config, Stage::kAll, log);

  const ArtifactPaths paths(config.out_dir);
  const std::string report = read_text_file(paths.sweep_report());
  out << "    sweep report:\n";
  std::istringstream lines(report);
  std::string line;
  std::vector<double> accuracies;
  bool header = true;
  while (std::getline(lines, line)) {
    if (!line.empty()) out << "      " << line << "\n";
    if (header) {
      header = false;
      continue;
    }
    const auto fields = split_line(line);
    if (fields.size() == 6) accuracies.push_back(parse_double(fields[5]));
  }

  bool ok = check(out, accuracies.size() == 4, "four sweep rows");
  for (size_t i = 1; i < accuracies.size(); ++i) {
    ok &= check(out, accuracies[i] >= accuracies[i - 1] - 1e-12,
                "accuracy non-decreasing in window size");
  }
  if (!accuracies.empty()) {
    ok &= check(out, accuracies.back() >= 0.90, "window-70 accuracy >= 90%");
  }

  // Calibration: rough-area rolling std (window 70) mean within [0.05, 0.2].
  const Trajectory rough =
      read_trajectory_csv(paths.trajectory(Area::kRough));
  const FeatureSeries features = pitch_std_features(rough, 70);
  double mean = 0.0;
  for (double v : features.values) mean += v;
  mean /= static_cast<double>(features.values.size());
  out << "    rough window-70 rolling-std mean: " << format_double(mean)
      << "\n";
  ok &= check(out, mean >= 0.05 && mean <= 0.20,
              "rough pitch-std mean in [0.05, 0.20]");
  return ok;
}

// ---------------------------------------------------------------------------
// 4. PPO learning signal vs a random baseline, plus the cross-eval table.
bool criterion_learning(std::ostream& out) {
  const std::uint64_t seeds[3] = {7, 8, 9};
  double trained_sum = 0.0;
  double random_sum = 0.0;

  for (std::uint64_t seed : seeds) {
    RunConfig config;
    config.seed = seed;
    const Heightfield field = Heightfield::generate(
        config.terrain, derive_seed(config.seed, "terrain"));
    const AreaRect flat = config.terrain.flat_rect;

    const std::uint64_t train_seed = derive_seed(seed, "train-initial");
    const auto factory = [&](int n) {
      std::vector<TargetReachEnv> envs;
      for (int e = 0; e < n; ++e) {
        envs.emplace_back(&field, flat, config.robot, config.task,
                          derive_seed(train_seed, "env-" + std::to_string(e)));
      }
      return envs;
    };
    const TrainResult result = train(config.ppo_initial, factory, train_seed);

    const EvalStats trained = evaluate_policy(
        &result.policy, ActionMode::kStochastic, field, flat, config.robot,
        config.task, 50, derive_seed(seed, "accept-eval"));
    const EvalStats random = evaluate_policy(
        nullptr, ActionMode::kUniformRandom, field, flat, config.robot,
        config.task, 50, derive_seed(seed, "accept-eval"));
    out << "    seed " << seed << ": trained "
        << format_double(trained.success_pct()) << "%, random "
        << format_double(random.success_pct()) << "%\n";
    trained_sum += trained.success_rate;
    random_sum += random.success_rate;
  }

  const double trained_avg = trained_sum / 3.0;
  const double random_avg = random_sum / 3.0;
  out << "    3-seed average: trained " << format_double(100 * trained_avg)
      << "%, random " << format_double(100 * random_avg) << "%\n";
  bool ok = check(out, trained_avg >= 0.70, "trained success >= 70%");
  ok &= check(out, random_avg <= 0.20, "random success <= 20%");

  // Cross-evaluation harness over criterion 3's artifacts: the emitted table
  // must carry the model x area structure (success % and time stats).
  RunConfig config;
  config.seed = 7;
  config.out_dir = (kWorkDir / "pipeline").string();
  const ArtifactPaths paths(config.out_dir);
  std::ostringstream log;
  stage_cross_eval(config, paths, log);
  const std::string table = read_text_file(paths.cross_eval());
  std::istringstream lines(table);
  std::string line;
  std::getline(lines, line);
  ok &= check(
      out,
      line ==
          "model,area,episodes,reached,success_rate_pct,mean_time_s,std_time_s",
      "cross-eval header");
  std::set<std::string> cells;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() == 7) cells.insert(fields[0] + "|" + fields[1]);
  }
  ok &= check(out, cells.size() == 4, "cross-eval covers 2 models x 2 areas");
  out << "    cross-eval table at " << paths.cross_eval() << "\n";
  return ok;
}

// ---------------------------------------------------------------------------
// 5. Gradient fidelity against central finite differences.
bool criterion_gradients(std::ostream& out) {
  const double h = 1e-5;
  Rng seed_rng(90210);
  double max_rel = 0.0;

  for (int rep = 0; rep < 20; ++rep) {
    Rng init(seed_rng.next_u64());
    PolicyNet policy = PolicyNet::create(init);
    ValueNet value = ValueNet::create(init);
    Rng rng(seed_rng.next_u64());

    LossBatch batch;
    const int n = 10;
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
      const double logp =
          gaussian_log_prob(policy, means.row(b), batch.actions.row(b));
      // Ratios kept clear of the clip boundary and the min-branch tie.
      double offset = rng.uniform(0.04, 0.1);
      if (rng.uniform() < 0.5) offset = -offset;
      batch.old_log_probs[b] = logp - offset;
      double adv = rng.normal();
      if (std::abs(adv) < 0.2) adv += adv < 0 ? -0.2 : 0.2;
      batch.advantages[b] = adv;
      batch.returns[b] = rng.normal();
    }

    const LossSettings settings;
    PolicyNet pg = policy;
    ValueNet vg = value;
    pg.set_zero();
    vg.set_zero();
    ppo_loss(policy, value, batch, settings, &pg, &vg);

    const int np = policy.parameter_count();
    const int nv = value.parameter_count();
    Eigen::VectorXd p_params(np), p_grad(np), v_params(nv), v_grad(nv);
    policy.write_flat(p_params.data());
    pg.write_flat(p_grad.data());
    value.write_flat(v_params.data());
    vg.write_flat(v_grad.data());

    auto fd_check = [&](bool is_policy, int idx) {
      Eigen::VectorXd& params = is_policy ? p_params : v_params;
      const double analytic = is_policy ? p_grad[idx] : v_grad[idx];
      const double saved = params[idx];
      auto reload = [&]() {
        if (is_policy) policy.read_flat(params.data());
        else value.read_flat(params.data());
      };
      params[idx] = saved + h;
      reload();
      const double up = ppo_loss(policy, value, batch, settings).total;
      params[idx] = saved - h;
      reload();
      const double down = ppo_loss(policy, value, batch, settings).total;
      params[idx] = saved;
      reload();
      const double fd = (up - down) / (2.0 * h);
      const double rel = std::abs(analytic - fd) /
                         std::max({std::abs(analytic), std::abs(fd), 1e-6});
      max_rel = std::max(max_rel, rel);
    };

    for (int i = 0; i < 20; ++i) {
      fd_check(true, rng.uniform_int(0, np - 1));
      fd_check(false, rng.uniform_int(0, nv - 1));
    }
    fd_check(true, np - 1);  // log_std entries
    fd_check(true, np - 2);
  }
  out << "    max relative error: " << format_double(max_rel) << "\n";
  return check(out, max_rel < 1e-4, "max relative error < 1e-4");
}

// ---------------------------------------------------------------------------
// 6. Streaming rolling std vs the naive two-pass oracle.
bool criterion_rolling_std(std::ostream& out) {
  Rng rng(616);
  double max_err = 0.0;
  long windows_checked = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const int len = rng.uniform_int(4, 160);
    const int window = rng.uniform_int(2, std::min(len, 100));
    // Magnitudes span the pitch-feature domain (|sin theta| <= 1) plus a
    // constant offset case that stresses cancellation.
    std::vector<double> series(len);
    switch (rep % 5) {
      case 0:
        for (auto& v : series) v = rng.uniform(-1.0, 1.0);
        break;
      case 1:
        for (auto& v : series) v = rng.normal(0.0, 0.05);
        break;
      case 2: {
        const double c = rng.uniform(-2.0, 2.0);
        for (auto& v : series) v = c;  // constant
        break;
      }
      case 3:
        for (int i = 0; i < len; ++i) {
          series[i] = i % 2 == 0 ? 1.0 : -1.0;  // alternating
        }
        break;
      default:
        for (auto& v : series) v = 0.6 + rng.normal(0.0, 0.01);
        break;
    }
    const auto fast = rolling_std(series, window);

    // Two-pass oracle, recomputed per window.
    for (size_t start = 0; start + window <= series.size(); ++start) {
      double mean = 0.0;
      for (int i = 0; i < window; ++i) mean += series[start + i];
      mean /= window;
      double var = 0.0;
      for (int i = 0; i < window; ++i) {
        const double d = series[start + i] - mean;
        var += d * d;
      }
      const double oracle = std::sqrt(var / window);
      max_err = std::max(max_err, std::abs(fast[start] - oracle));
      ++windows_checked;
    }
  }
  out << "    " << windows_checked << " windows, max abs deviation "
      << format_double(max_err) << "\n";
  return check(out, max_err <= 1e-12, "agreement to 1e-12");
}

// ---------------------------------------------------------------------------
// 7. Pipeline determinism: byte-identical report CSVs for a fixed seed.
bool criterion_determinism(std::ostream& out) {
  RunConfig config;
  config.seed = 31;
  config.ppo_initial.total_steps = 4608;
  config.ppo_initial.rollout_steps = 256;
  config.ppo_general.total_steps = 4096;
  config.ppo_general.rollout_steps = 256;

  std::string dirs[2];
  for (int run = 0; run < 2; ++run) {
    config.out_dir = (kWorkDir / ("det" + std::to_string(run))).string();
    fs::remove_all(config.out_dir);
    std::ostringstream log;
    run_pipeline(config, Stage::kAll, log);
    dirs[run] = config.out_dir;
  }

  bool ok = true;
  const ArtifactPaths a(dirs[0]), b(dirs[1]);
  std::vector<std::pair<std::string, std::string>> pairs = {
      {a.sweep_report(), b.sweep_report()},
      {a.report_table(), b.report_table()},
      {a.trajectory(Area::kFlat), b.trajectory(Area::kFlat)},
      {a.trajectory(Area::kRough), b.trajectory(Area::kRough)},
      {a.train_log("initial_flat"), b.train_log("initial_flat")},
      {a.train_log("general"), b.train_log("general")},
      {a.report_timeseries(Area::kFlat), b.report_timeseries(Area::kFlat)},
      {a.report_timeseries(Area::kRough), b.report_timeseries(Area::kRough)},
  };
  for (int w : RunConfig{}.windows) {
    pairs.emplace_back(a.report_histogram(w), b.report_histogram(w));
    pairs.emplace_back(a.report_confusion(w), b.report_confusion(w));
  }
  int compared = 0;
  for (const auto& [fa, fb] : pairs) {
    const bool same = read_text_file(fa) == read_text_file(fb);
    ok &= check(out, same,
                "byte-identical: " + fs::path(fa).filename().string());
    ++compared;
  }
  out << "    " << compared << " artifact pairs compared\n";
  return ok;
}

// ---------------------------------------------------------------------------
// 8. Flat-terrain null signal: retained rows are exactly level.
bool criterion_flat_null(std::ostream& out) {
  const std::string flat_csv =
      (kWorkDir / "pipeline" / "telemetry" / "flat.csv").string();
  if (!fs::exists(flat_csv)) {
    return check(out, false, "missing " + flat_csv + " (run criterion 3 first)");
  }
  const Trajectory flat = read_trajectory_csv(flat_csv);
  bool ok = check(out, flat.rows.size() == 400, "400 retained rows");
  for (const auto& row : flat.rows) {
    if (row.sin_pitch != 0.0 || row.sin_roll != 0.0) {
      ok = check(out, false, "nonzero sin(pitch)/sin(roll) at step " +
                                 std::to_string(row.step));
      break;
    }
    if (row.area != Area::kFlat) {
      ok = check(out, false, "row outside the flat rect at step " +
                                 std::to_string(row.step));
      break;
    }
  }
  if (ok) {
    out << "    " << flat.rows.size()
        << " rows, all sin(pitch) == 0 and sin(roll) == 0 exactly\n";
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "reward-formula exactness", criterion_reward_formulas},
      {2, "EM correctness and parameter recovery", criterion_em},
      {3, "pipeline accuracy trend (windows 10/20/40/70)",
       criterion_pipeline_trend},
      {4, "PPO learning signal vs random baseline", criterion_learning},
      {5, "gradient fidelity (central finite differences)",
       criterion_gradients},
      {6, "rolling-std oracle equivalence", criterion_rolling_std},
      {7, "pipeline determinism (byte-identical reports)",
       criterion_determinism},
      {8, "flat-terrain null signal", criterion_flat_null},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  fs::create_directories(kWorkDir);
  int failures = 0;
  for (const auto& criterion : criteria) {
    if (!selected.empty() && !selected.count(criterion.number)) continue;
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::ostringstream detail;
    try {
      ok = criterion.run(detail);
    } catch (const std::exception& e) {
      detail << "    exception: " << e.what() << "\n";
    }
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << criterion.number << ". "
              << criterion.name << " (" << format_double(elapsed_s(start))
              << " s)\n"
              << detail.str();
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
