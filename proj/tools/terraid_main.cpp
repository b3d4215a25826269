#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "terraid/evaluation.hpp"
#include "terraid/io.hpp"
#include "terraid/pipeline.hpp"

using namespace terraid;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  bool has_seed = false;
  std::uint64_t seed = 0;
};

RunConfig effective_config(const GlobalOptions& options) {
  RunConfig config =
      options.config_path.empty() ? RunConfig{} : load_config_file(options.config_path);
  if (options.has_seed) config.seed = options.seed;
  if (!options.out_dir.empty()) config.out_dir = options.out_dir;
  return config;
}

void add_global_flags(CLI::App* cmd, GlobalOptions& options) {
  cmd->add_option("--config", options.config_path,
                  "JSON config file; flags override its values");
  cmd->add_option("--out", options.out_dir, "output directory");
  cmd->add_option("--seed", options.seed, "master seed")
      ->each([&options](const std::string&) { options.has_seed = true; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"terraid: differential-drive terrain simulator, PPO trainer "
               "and unsupervised terrain identification"};
  app.require_subcommand(1);

  GlobalOptions options;

  // gen-terrain
  auto* gen = app.add_subcommand("gen-terrain", "generate the heightfield");
  add_global_flags(gen, options);
  double roughness = -1.0, amplitude = -1.0;
  gen->add_option("--roughness", roughness, "roughness scale in [0,1]");
  gen->add_option("--amplitude", amplitude, "noise amplitude in meters");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a policy stage");
  add_global_flags(train_cmd, options);
  std::string train_stage = "initial-flat";
  long steps_override = -1;
  std::string init_checkpoint;
  train_cmd->add_option("--stage", train_stage, "initial-flat or general")
      ->check(CLI::IsMember({"initial-flat", "general"}));
  train_cmd->add_option("--steps", steps_override,
                        "override total environment steps");
  train_cmd->add_option("--init-checkpoint", init_checkpoint,
                        "checkpoint to fine-tune from (general stage)");

  // collect
  auto* collect_cmd =
      app.add_subcommand("collect", "run the policy and record telemetry");
  add_global_flags(collect_cmd, options);
  std::string collect_area = "flat";
  int collect_steps = -1, collect_discard = -1;
  std::string model_path;
  collect_cmd->add_option("--area", collect_area, "flat or rough")
      ->check(CLI::IsMember({"flat", "rough"}));
  collect_cmd->add_option("--model", model_path,
                          "checkpoint to drive with (default: general)");
  collect_cmd->add_option("--steps", collect_steps, "steps to record");
  collect_cmd->add_option("--discard", collect_discard,
                          "leading steps to drop");

  // sweep
  auto* sweep_cmd =
      app.add_subcommand("sweep", "fit mixtures over the window sizes");
  add_global_flags(sweep_cmd, options);

  // report
  auto* report_cmd =
      app.add_subcommand("report", "emit plot data and summary tables");
  add_global_flags(report_cmd, options);

  // cross-eval
  auto* cross_cmd = app.add_subcommand(
      "cross-eval", "success rate and reaching time per model and area");
  add_global_flags(cross_cmd, options);
  int episodes_override = -1;
  cross_cmd->add_option("--episodes", episodes_override,
                        "evaluation episodes per cell");

  // pipeline
  auto* pipe_cmd =
      app.add_subcommand("pipeline", "run every stage in order");
  add_global_flags(pipe_cmd, options);
  std::string pipe_stage = "all";
  long pipe_steps = -1;
  pipe_cmd->add_option("--stage", pipe_stage,
                       "single stage to (re)run, or 'all'");
  pipe_cmd->add_option("--steps", pipe_steps,
                       "override total steps of both training stages");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config = effective_config(options);

    if (gen->parsed()) {
      if (roughness >= 0.0) config.terrain.roughness_scale = roughness;
      if (amplitude > 0.0) config.terrain.amplitude = amplitude;
      config.validate();
      const ArtifactPaths paths(config.out_dir);
      stage_gen_terrain(config, paths, std::cout);
    } else if (train_cmd->parsed()) {
      if (steps_override >= 0) {
        config.ppo_initial.total_steps = steps_override;
        config.ppo_general.total_steps = steps_override;
      }
      if (!init_checkpoint.empty()) {
        config.ppo_general.pretrain_checkpoint = init_checkpoint;
      }
      run_pipeline(config,
                   train_stage == "general" ? Stage::kTrainGeneral
                                            : Stage::kTrainInitial,
                   std::cout);
    } else if (collect_cmd->parsed()) {
      if (collect_steps >= 0) config.telemetry.n_steps = collect_steps;
      if (collect_discard >= 0) config.telemetry.discard = collect_discard;
      if (!model_path.empty()) {
        // Point the general-checkpoint slot at the requested model.
        const ArtifactPaths paths(config.out_dir);
        config.validate();
        const Checkpoint ckpt = load_checkpoint(model_path);
        const Heightfield field = pipeline_terrain(config, paths);
        const Area area = area_from_string(collect_area);
        const AreaRect& rect = area == Area::kFlat
                                   ? config.terrain.flat_rect
                                   : config.terrain.rough_rect;
        std::filesystem::create_directories(paths.telemetry_dir());
        long respawns = 0;
        const Trajectory t = collect(
            ckpt.policy, field, rect, config.robot, config.task,
            config.telemetry,
            derive_seed(config.seed, std::string("collect-") + to_string(area)),
            &respawns);
        write_trajectory_csv(paths.trajectory(area), t);
        std::cout << "[collect-" << to_string(area) << "] "
                  << t.rows.size() << " rows, " << respawns
                  << " respawn(s) -> " << paths.trajectory(area) << "\n";
      } else {
        run_pipeline(config,
                     collect_area == "rough" ? Stage::kCollectRough
                                             : Stage::kCollectFlat,
                     std::cout);
      }
    } else if (sweep_cmd->parsed()) {
      run_pipeline(config, Stage::kSweep, std::cout);
    } else if (report_cmd->parsed()) {
      run_pipeline(config, Stage::kReport, std::cout);
    } else if (cross_cmd->parsed()) {
      if (episodes_override > 0) config.eval_episodes = episodes_override;
      run_pipeline(config, Stage::kCrossEval, std::cout);
    } else if (pipe_cmd->parsed()) {
      if (pipe_steps >= 0) {
        config.ppo_initial.total_steps = pipe_steps;
        config.ppo_general.total_steps = pipe_steps;
      }
      run_pipeline(config, stage_from_string(pipe_stage), std::cout);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
