#pragma once

#include <ostream>
#include <string>

#include "terraid/config.hpp"

namespace terraid {

/// Locations of every artifact under a run's output directory.
struct ArtifactPaths {
  std::string root;

  explicit ArtifactPaths(std::string out_dir) : root(std::move(out_dir)) {}

  std::string effective_config() const { return root + "/effective_config.json"; }
  std::string terrain() const { return root + "/terrain.thf"; }
  std::string checkpoint_dir() const { return root + "/checkpoints"; }
  std::string checkpoint_initial() const {
    return checkpoint_dir() + "/initial_flat.ckpt";
  }
  std::string checkpoint_general() const {
    return checkpoint_dir() + "/general.ckpt";
  }
  std::string log_dir() const { return root + "/logs"; }
  std::string train_log(const std::string& stage) const {
    return log_dir() + "/train_" + stage + ".csv";
  }
  std::string episode_log(const std::string& stage) const {
    return log_dir() + "/episodes_" + stage + ".csv";
  }
  std::string telemetry_dir() const { return root + "/telemetry"; }
  std::string trajectory(Area area) const {
    return telemetry_dir() + "/" + to_string(area) + ".csv";
  }
  std::string sweep_dir() const { return root + "/sweep"; }
  std::string features(Area area, int window) const {
    return sweep_dir() + "/features_" + to_string(area) + "_w" +
           std::to_string(window) + ".csv";
  }
  std::string sweep_report() const { return sweep_dir() + "/sweep_report.csv"; }
  std::string model_json(int window) const {
    return sweep_dir() + "/model_w" + std::to_string(window) + ".json";
  }
  std::string sweep_confusion(int window) const {
    return sweep_dir() + "/confusion_w" + std::to_string(window) + ".csv";
  }
  std::string report_dir() const { return root + "/report"; }
  std::string report_timeseries(Area area) const {
    return report_dir() + "/timeseries_" + to_string(area) + ".csv";
  }
  std::string report_histogram(int window) const {
    return report_dir() + "/hist_w" + std::to_string(window) + ".csv";
  }
  std::string report_table() const { return report_dir() + "/table3.csv"; }
  std::string report_confusion(int window) const {
    return report_dir() + "/confusion_w" + std::to_string(window) + ".csv";
  }
  std::string cross_eval() const { return report_dir() + "/cross_eval.csv"; }
};

enum class Stage {
  kAll,
  kTerrain,
  kTrainInitial,
  kTrainGeneral,
  kCollectFlat,
  kCollectRough,
  kSweep,
  kReport,
  kCrossEval,
};

Stage stage_from_string(const std::string& name);
const char* to_string(Stage stage);

/// Deterministic terrain for this run; loads the artifact when present,
/// otherwise regenerates it from the config (identical either way).
Heightfield pipeline_terrain(const RunConfig& config,
                             const ArtifactPaths& paths);

void stage_gen_terrain(const RunConfig& config, const ArtifactPaths& paths,
                       std::ostream& log);
void stage_train_initial(const RunConfig& config, const ArtifactPaths& paths,
                         std::ostream& log);
void stage_train_general(const RunConfig& config, const ArtifactPaths& paths,
                         std::ostream& log);
void stage_collect(const RunConfig& config, const ArtifactPaths& paths,
                   Area area, std::ostream& log);
void stage_sweep(const RunConfig& config, const ArtifactPaths& paths,
                 std::ostream& log);
void stage_report(const RunConfig& config, const ArtifactPaths& paths,
                  std::ostream& log);
void stage_cross_eval(const RunConfig& config, const ArtifactPaths& paths,
                      std::ostream& log);

/// Runs one stage, or every stage in order for Stage::kAll (cross-eval is a
/// separate harness and not part of the default pipeline). Writes the
/// effective config into the output directory first.
void run_pipeline(const RunConfig& config, Stage stage, std::ostream& log);

}  // namespace terraid
