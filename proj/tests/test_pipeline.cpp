#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "terraid/io.hpp"
#include "terraid/pipeline.hpp"

using namespace terraid;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("terraid_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

/// Small, fast config for integration tests.
RunConfig tiny_config(const std::string& out_dir) {
  RunConfig c;
  c.out_dir = out_dir;
  c.ppo_initial.total_steps = 540;
  c.ppo_initial.rollout_steps = 20;
  c.ppo_initial.n_envs = 9;
  c.ppo_general.total_steps = 480;
  c.ppo_general.rollout_steps = 20;
  c.ppo_general.n_envs = 8;
  c.telemetry.n_steps = 160;
  c.telemetry.discard = 60;
  c.windows = {10, 20};
  c.eval_episodes = 2;
  return c;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config json round-trips and rejects invalid values") {
  RunConfig c;
  c.seed = 123;
  c.terrain.amplitude = 0.07;
  c.ppo_initial.total_steps = 1234;
  const std::string text = config_to_json_text(c);
  const RunConfig parsed = config_from_json_text(text);
  CHECK(parsed.seed == c.seed);
  CHECK(parsed.terrain.amplitude == c.terrain.amplitude);
  CHECK(parsed.ppo_initial.total_steps == 1234);
  CHECK(parsed.ppo_general.n_envs == 8);

  CHECK_THROWS_AS(config_from_json_text("{\"task\": {\"delta\": -1}}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      config_from_json_text("{\"task\": {\"progress_metric\": \"bogus\"}}"),
      std::invalid_argument);
}

TEST_CASE("partial config overrides defaults only where given") {
  const RunConfig parsed = config_from_json_text(
      "{\"seed\": 9, \"ppo_initial\": {\"total_steps\": 77}}");
  CHECK(parsed.seed == 9);
  CHECK(parsed.ppo_initial.total_steps == 77);
  CHECK(parsed.ppo_initial.batch_size == 64);  // untouched default
  CHECK(parsed.ppo_general.total_steps == 50000);
}

TEST_CASE("stage names round-trip") {
  for (const char* name :
       {"all", "terrain", "train-initial", "train-general", "collect-flat",
        "collect-rough", "sweep", "report", "cross-eval"}) {
    CHECK(std::string(to_string(stage_from_string(name))) == name);
  }
  CHECK_THROWS_AS(stage_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("stages demand their prerequisites") {
  TempDir tmp;
  RunConfig c = tiny_config(tmp.path.string());
  std::ostringstream log;
  CHECK_THROWS_WITH_AS(run_pipeline(c, Stage::kCollectFlat, log),
                       doctest::Contains("run train"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(run_pipeline(c, Stage::kSweep, log),
                       doctest::Contains("run collect"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(run_pipeline(c, Stage::kTrainGeneral, log),
                       doctest::Contains("run train --stage initial-flat"),
                       std::runtime_error);
}

TEST_CASE("tiny pipeline produces the full artifact tree") {
  TempDir tmp;
  RunConfig c = tiny_config(tmp.path.string());
  std::ostringstream log;
  run_pipeline(c, Stage::kAll, log);

  const ArtifactPaths paths(c.out_dir);
  for (const std::string& p :
       {paths.effective_config(), paths.terrain(), paths.checkpoint_initial(),
        paths.checkpoint_general(), paths.train_log("initial_flat"),
        paths.train_log("general"), paths.episode_log("initial_flat"),
        paths.trajectory(Area::kFlat), paths.trajectory(Area::kRough),
        paths.sweep_report(), paths.model_json(10), paths.sweep_confusion(20),
        paths.report_timeseries(Area::kFlat), paths.report_histogram(10),
        paths.report_table()}) {
    INFO("expected artifact: " << p);
    CHECK(fs::exists(p));
  }

  // Rerunning only the sweep stage must not disturb its inputs and must
  // regenerate identical outputs from the persisted artifacts.
  const std::string before = read_text_file(paths.sweep_report());
  std::ostringstream log2;
  run_pipeline(c, Stage::kSweep, log2);
  CHECK(read_text_file(paths.sweep_report()) == before);
}

TEST_CASE("pipeline reports are byte-identical across reruns") {
  TempDir tmp_a, tmp_b;
  RunConfig a = tiny_config(tmp_a.path.string());
  RunConfig b = tiny_config(tmp_b.path.string());
  std::ostringstream log;
  run_pipeline(a, Stage::kAll, log);
  run_pipeline(b, Stage::kAll, log);

  const ArtifactPaths pa(a.out_dir), pb(b.out_dir);
  for (const auto& [fa, fb] :
       {std::pair{pa.sweep_report(), pb.sweep_report()},
        std::pair{pa.report_table(), pb.report_table()},
        std::pair{pa.report_timeseries(Area::kRough),
                  pb.report_timeseries(Area::kRough)},
        std::pair{pa.report_histogram(10), pb.report_histogram(10)},
        std::pair{pa.trajectory(Area::kFlat), pb.trajectory(Area::kFlat)}}) {
    CHECK(read_text_file(fa) == read_text_file(fb));
  }
}

TEST_CASE("cross-eval emits the model-by-area table") {
  TempDir tmp;
  RunConfig c = tiny_config(tmp.path.string());
  std::ostringstream log;
  run_pipeline(c, Stage::kAll, log);
  run_pipeline(c, Stage::kCrossEval, log);

  const ArtifactPaths paths(c.out_dir);
  REQUIRE(fs::exists(paths.cross_eval()));
  std::ifstream in(paths.cross_eval());
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "model,area,episodes,reached,success_rate_pct,mean_time_s,std_time_s");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 4);  // {initial_flat, general} x {flat, rough}
}

}  // TEST_SUITE
