#include "terraid/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "terraid/evaluation.hpp"
#include "terraid/io.hpp"

namespace terraid {

namespace fs = std::filesystem;

namespace {

void require_artifact(const std::string& path, const std::string& producer) {
  if (!fs::exists(path)) {
    throw std::runtime_error("missing artifact " + path + "; run " + producer +
                             " first");
  }
}

void ensure_dir(const std::string& path) { fs::create_directories(path); }

void write_train_log_csv(const std::string& path,
                         const std::vector<IterationLog>& log) {
  std::string out =
      "iteration,env_steps,mean_reward,success_rate,clip_fraction,entropy,lr\n";
  for (const auto& row : log) {
    out += csv_row({std::to_string(row.iteration),
                    std::to_string(row.env_steps),
                    format_double(row.mean_reward),
                    format_double(row.success_rate),
                    format_double(row.clip_fraction),
                    format_double(row.entropy),
                    format_double(row.learning_rate)});
  }
  write_text_file(path, out);
}

void write_episode_log_csv(const std::string& path,
                           const std::vector<EpisodeSummary>& episodes) {
  std::string out = "episode,initial_distance,steps,status,total_reward,mo\n";
  for (const auto& ep : episodes) {
    out += csv_row({std::to_string(ep.episode_id),
                    format_double(ep.initial_distance),
                    std::to_string(ep.steps), to_string(ep.status),
                    format_double(ep.total_reward),
                    format_double(ep.mean_orientation)});
  }
  write_text_file(path, out);
}

EnvFactory make_env_factory(const Heightfield& field, const RunConfig& config,
                            bool mixed_areas, std::uint64_t seed) {
  const AreaRect flat = config.terrain.flat_rect;
  const AreaRect rough = config.terrain.rough_rect;
  const RobotParams robot = config.robot;
  const TaskConstants task = config.task;
  const Heightfield* field_ptr = &field;
  return [=](int n_envs) {
    std::vector<TargetReachEnv> envs;
    envs.reserve(n_envs);
    for (int e = 0; e < n_envs; ++e) {
      const bool rough_env = mixed_areas && e % 2 == 1;
      envs.emplace_back(field_ptr, rough_env ? rough : flat, robot, task,
                        derive_seed(seed, "env-" + std::to_string(e)));
    }
    return envs;
  };
}

}  // namespace

Stage stage_from_string(const std::string& name) {
  if (name == "all") return Stage::kAll;
  if (name == "terrain") return Stage::kTerrain;
  if (name == "train-initial") return Stage::kTrainInitial;
  if (name == "train-general") return Stage::kTrainGeneral;
  if (name == "collect-flat") return Stage::kCollectFlat;
  if (name == "collect-rough") return Stage::kCollectRough;
  if (name == "sweep") return Stage::kSweep;
  if (name == "report") return Stage::kReport;
  if (name == "cross-eval") return Stage::kCrossEval;
  throw std::invalid_argument("unknown stage: " + name);
}

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::kAll: return "all";
    case Stage::kTerrain: return "terrain";
    case Stage::kTrainInitial: return "train-initial";
    case Stage::kTrainGeneral: return "train-general";
    case Stage::kCollectFlat: return "collect-flat";
    case Stage::kCollectRough: return "collect-rough";
    case Stage::kSweep: return "sweep";
    case Stage::kReport: return "report";
    default: return "cross-eval";
  }
}

Heightfield pipeline_terrain(const RunConfig& config,
                             const ArtifactPaths& paths) {
  if (fs::exists(paths.terrain())) return Heightfield::load(paths.terrain());
  return Heightfield::generate(config.terrain,
                               derive_seed(config.seed, "terrain"));
}

void stage_gen_terrain(const RunConfig& config, const ArtifactPaths& paths,
                       std::ostream& log) {
  ensure_dir(paths.root);
  const Heightfield field = Heightfield::generate(
      config.terrain, derive_seed(config.seed, "terrain"));
  field.save(paths.terrain());
  log << "[terrain] " << field.nx() << "x" << field.nz() << " grid -> "
      << paths.terrain() << "\n";
}

void stage_train_initial(const RunConfig& config, const ArtifactPaths& paths,
                         std::ostream& log) {
  const Heightfield field = pipeline_terrain(config, paths);
  ensure_dir(paths.checkpoint_dir());
  ensure_dir(paths.log_dir());

  const std::uint64_t seed = derive_seed(config.seed, "train-initial");
  log << "[train-initial] " << config.ppo_initial.total_steps
      << " steps on flat terrain\n";
  const TrainResult result = train(
      config.ppo_initial, make_env_factory(field, config, false, seed), seed,
      nullptr, &log);
  save_checkpoint(paths.checkpoint_initial(), result.policy, result.value);
  write_train_log_csv(paths.train_log("initial_flat"), result.log);
  write_episode_log_csv(paths.episode_log("initial_flat"), result.episodes);
}

void stage_train_general(const RunConfig& config, const ArtifactPaths& paths,
                         std::ostream& log) {
  PpoConfig ppo = config.ppo_general;
  std::string init_path = ppo.pretrain_checkpoint.empty()
                              ? paths.checkpoint_initial()
                              : ppo.pretrain_checkpoint;
  require_artifact(init_path, "train --stage initial-flat");
  const Checkpoint initial = load_checkpoint(init_path);

  const Heightfield field = pipeline_terrain(config, paths);
  ensure_dir(paths.checkpoint_dir());
  ensure_dir(paths.log_dir());

  const std::uint64_t seed = derive_seed(config.seed, "train-general");
  log << "[train-general] " << ppo.total_steps
      << " steps on flat+rough terrain (pretrained)\n";
  const TrainResult result =
      train(ppo, make_env_factory(field, config, true, seed), seed, &initial,
            &log);
  save_checkpoint(paths.checkpoint_general(), result.policy, result.value);
  write_train_log_csv(paths.train_log("general"), result.log);
  write_episode_log_csv(paths.episode_log("general"), result.episodes);
}

void stage_collect(const RunConfig& config, const ArtifactPaths& paths,
                   Area area, std::ostream& log) {
  require_artifact(paths.checkpoint_general(), "train --stage general");
  const Checkpoint ckpt = load_checkpoint(paths.checkpoint_general());
  const Heightfield field = pipeline_terrain(config, paths);
  ensure_dir(paths.telemetry_dir());

  const AreaRect& rect = area == Area::kFlat ? config.terrain.flat_rect
                                             : config.terrain.rough_rect;
  long respawns = 0;
  const Trajectory trajectory = collect(
      ckpt.policy, field, rect, config.robot, config.task, config.telemetry,
      derive_seed(config.seed, std::string("collect-") + to_string(area)),
      &respawns);
  write_trajectory_csv(paths.trajectory(area), trajectory);
  log << "[collect-" << to_string(area) << "] " << trajectory.rows.size()
      << " rows retained, " << respawns << " respawn(s) -> "
      << paths.trajectory(area) << "\n";
}

void stage_sweep(const RunConfig& config, const ArtifactPaths& paths,
                 std::ostream& log) {
  require_artifact(paths.trajectory(Area::kFlat), "collect --area flat");
  require_artifact(paths.trajectory(Area::kRough), "collect --area rough");
  const Trajectory flat = read_trajectory_csv(paths.trajectory(Area::kFlat));
  const Trajectory rough = read_trajectory_csv(paths.trajectory(Area::kRough));
  ensure_dir(paths.sweep_dir());

  const std::vector<SweepRow> rows = window_sweep(
      flat, rough, config.windows, config.gmm, derive_seed(config.seed, "sweep"));
  write_sweep_csv(paths.sweep_report(), rows);
  for (const auto& row : rows) {
    save_model_json(paths.model_json(row.window), row.model, row.window);
    write_confusion_csv(paths.sweep_confusion(row.window), row.confusion);
    write_features_csv(paths.features(Area::kFlat, row.window),
                       pitch_std_features(flat, row.window, config.feature_stride));
    write_features_csv(paths.features(Area::kRough, row.window),
                       pitch_std_features(rough, row.window, config.feature_stride));
    log << "[sweep] window " << row.window << " accuracy "
        << format_double(100.0 * row.accuracy()) << "%\n";
  }
}

namespace {

void write_timeseries_csv(const std::string& path, const Trajectory& t) {
  std::string out = "step,time_s,sin_theta_x,sin_theta_z\n";
  for (const auto& r : t.rows) {
    out += csv_row({std::to_string(r.step), format_double(r.time_s),
                    format_double(r.sin_pitch), format_double(r.sin_roll)});
  }
  write_text_file(path, out);
}

void write_histogram_csv(const std::string& path,
                         const FeatureSeries& flat_features,
                         const FeatureSeries& rough_features) {
  constexpr int kBins = 50;
  constexpr double kLo = 0.0;
  constexpr double kHi = 0.5;
  constexpr double kWidth = (kHi - kLo) / kBins;
  long flat_counts[kBins] = {};
  long rough_counts[kBins] = {};
  auto bin_of = [&](double v) {
    int b = static_cast<int>((v - kLo) / kWidth);
    return std::clamp(b, 0, kBins - 1);
  };
  for (double v : flat_features.values) ++flat_counts[bin_of(v)];
  for (double v : rough_features.values) ++rough_counts[bin_of(v)];
  std::string out = "bin_lo,bin_hi,count_flat,count_rough\n";
  for (int b = 0; b < kBins; ++b) {
    out += csv_row({format_double(kLo + b * kWidth),
                    format_double(kLo + (b + 1) * kWidth),
                    std::to_string(flat_counts[b]),
                    std::to_string(rough_counts[b])});
  }
  write_text_file(path, out);
}

}  // namespace

void stage_report(const RunConfig& config, const ArtifactPaths& paths,
                  std::ostream& log) {
  require_artifact(paths.trajectory(Area::kFlat), "collect --area flat");
  require_artifact(paths.trajectory(Area::kRough), "collect --area rough");
  require_artifact(paths.sweep_report(), "sweep");

  const Trajectory flat = read_trajectory_csv(paths.trajectory(Area::kFlat));
  const Trajectory rough = read_trajectory_csv(paths.trajectory(Area::kRough));
  if (flat.rows.empty()) {
    throw std::runtime_error("flat trajectory is empty; rerun collect");
  }
  if (rough.rows.empty()) {
    throw std::runtime_error("rough trajectory is empty; rerun collect");
  }
  ensure_dir(paths.report_dir());

  write_timeseries_csv(paths.report_timeseries(Area::kFlat), flat);
  write_timeseries_csv(paths.report_timeseries(Area::kRough), rough);
  for (int window : config.windows) {
    write_histogram_csv(paths.report_histogram(window),
                        pitch_std_features(flat, window),
                        pitch_std_features(rough, window));
    require_artifact(paths.sweep_confusion(window), "sweep");
    write_text_file(paths.report_confusion(window),
                    read_text_file(paths.sweep_confusion(window)));
  }
  write_text_file(paths.report_table(), read_text_file(paths.sweep_report()));
  log << "[report] wrote plot data into " << paths.report_dir() << "\n";
}

void stage_cross_eval(const RunConfig& config, const ArtifactPaths& paths,
                      std::ostream& log) {
  require_artifact(paths.checkpoint_initial(), "train --stage initial-flat");
  require_artifact(paths.checkpoint_general(), "train --stage general");
  const Checkpoint initial = load_checkpoint(paths.checkpoint_initial());
  const Checkpoint general = load_checkpoint(paths.checkpoint_general());
  const Heightfield field = pipeline_terrain(config, paths);
  ensure_dir(paths.report_dir());

  struct Entry {
    const char* model;
    const PolicyNet* policy;
    Area area;
  };
  const Entry entries[] = {
      {"initial_flat", &initial.policy, Area::kFlat},
      {"initial_flat", &initial.policy, Area::kRough},
      {"general", &general.policy, Area::kFlat},
      {"general", &general.policy, Area::kRough},
  };

  std::string out =
      "model,area,episodes,reached,success_rate_pct,mean_time_s,std_time_s\n";
  for (const auto& entry : entries) {
    const AreaRect& rect = entry.area == Area::kFlat
                               ? config.terrain.flat_rect
                               : config.terrain.rough_rect;
    const EvalStats stats = evaluate_policy(
        entry.policy, ActionMode::kDeterministic, field, rect, config.robot,
        config.task, config.eval_episodes,
        derive_seed(config.seed, std::string("cross-eval-") + entry.model +
                                     "-" + to_string(entry.area)));
    out += csv_row({entry.model, to_string(entry.area),
                    std::to_string(stats.episodes),
                    std::to_string(stats.reached),
                    format_double(stats.success_pct()),
                    format_double(stats.mean_time_s),
                    format_double(stats.std_time_s)});
    log << "[cross-eval] " << entry.model << " on " << to_string(entry.area)
        << ": " << format_double(stats.success_pct()) << "% in "
        << format_double(stats.mean_time_s) << " s\n";
  }
  write_text_file(paths.cross_eval(), out);
}

void run_pipeline(const RunConfig& config, Stage stage, std::ostream& log) {
  config.validate();
  const ArtifactPaths paths(config.out_dir);
  ensure_dir(paths.root);
  save_config_file(paths.effective_config(), config);

  switch (stage) {
    case Stage::kTerrain:
      stage_gen_terrain(config, paths, log);
      return;
    case Stage::kTrainInitial:
      stage_train_initial(config, paths, log);
      return;
    case Stage::kTrainGeneral:
      stage_train_general(config, paths, log);
      return;
    case Stage::kCollectFlat:
      stage_collect(config, paths, Area::kFlat, log);
      return;
    case Stage::kCollectRough:
      stage_collect(config, paths, Area::kRough, log);
      return;
    case Stage::kSweep:
      stage_sweep(config, paths, log);
      return;
    case Stage::kReport:
      stage_report(config, paths, log);
      return;
    case Stage::kCrossEval:
      stage_cross_eval(config, paths, log);
      return;
    case Stage::kAll:
      stage_gen_terrain(config, paths, log);
      stage_train_initial(config, paths, log);
      stage_train_general(config, paths, log);
      stage_collect(config, paths, Area::kFlat, log);
      stage_collect(config, paths, Area::kRough, log);
      stage_sweep(config, paths, log);
      stage_report(config, paths, log);
      return;
  }
}

}  // namespace terraid
