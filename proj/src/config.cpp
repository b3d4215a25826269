#include "terraid/config.hpp"

#include <stdexcept>

#include <json.hpp>

#include "terraid/io.hpp"

namespace terraid {

using nlohmann::json;

RunConfig::RunConfig() {
  ppo_initial.n_envs = 9;
  ppo_general.n_envs = 8;
}

void RunConfig::validate() const {
  terrain.validate();
  robot.validate();
  if (!(task.delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  ppo_initial.validate();
  ppo_general.validate();
  telemetry.validate();
  if (feature_stride < 1) {
    throw std::invalid_argument("feature_stride must be >= 1");
  }
  if (windows.empty()) throw std::invalid_argument("windows must be nonempty");
  for (int w : windows) {
    if (w < 2) throw std::invalid_argument("window sizes must be >= 2");
  }
  if (gmm.max_iter < 1 || !(gmm.tol > 0.0) || !(gmm.sigma_floor > 0.0) ||
      gmm.restarts < 1) {
    throw std::invalid_argument("invalid gmm options");
  }
  if (eval_episodes < 1) {
    throw std::invalid_argument("eval_episodes must be >= 1");
  }
}

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json rect_json(const AreaRect& r) {
  return json{{"x_min", r.x_min},
              {"x_max", r.x_max},
              {"z_min", r.z_min},
              {"z_max", r.z_max}};
}

void rect_from(const json& j, AreaRect& r) {
  get_if(j, "x_min", r.x_min);
  get_if(j, "x_max", r.x_max);
  get_if(j, "z_min", r.z_min);
  get_if(j, "z_max", r.z_max);
}

json terrain_json(const HeightfieldParams& p) {
  return json{{"flat_rect", rect_json(p.flat_rect)},
              {"rough_rect", rect_json(p.rough_rect)},
              {"cell_size", p.cell_size},
              {"roughness_scale", p.roughness_scale},
              {"amplitude", p.amplitude},
              {"base_height", p.base_height},
              {"flat_margin", p.flat_margin},
              {"extent_pad", p.extent_pad},
              {"base_wavelength", p.base_wavelength},
              {"octaves", p.octaves},
              {"persistence", p.persistence}};
}

void terrain_from(const json& j, HeightfieldParams& p) {
  if (j.contains("flat_rect")) rect_from(j.at("flat_rect"), p.flat_rect);
  if (j.contains("rough_rect")) rect_from(j.at("rough_rect"), p.rough_rect);
  get_if(j, "cell_size", p.cell_size);
  get_if(j, "roughness_scale", p.roughness_scale);
  get_if(j, "amplitude", p.amplitude);
  get_if(j, "base_height", p.base_height);
  get_if(j, "flat_margin", p.flat_margin);
  get_if(j, "extent_pad", p.extent_pad);
  get_if(j, "base_wavelength", p.base_wavelength);
  get_if(j, "octaves", p.octaves);
  get_if(j, "persistence", p.persistence);
}

json robot_json(const RobotParams& p) {
  return json{{"wheel_radius", p.wheel_radius},
              {"track_width", p.track_width},
              {"body_length", p.body_length},
              {"max_wheel_rate", p.max_wheel_rate},
              {"speed_per_unit", p.speed_per_unit},
              {"dt", p.dt}};
}

void robot_from(const json& j, RobotParams& p) {
  get_if(j, "wheel_radius", p.wheel_radius);
  get_if(j, "track_width", p.track_width);
  get_if(j, "body_length", p.body_length);
  get_if(j, "max_wheel_rate", p.max_wheel_rate);
  get_if(j, "speed_per_unit", p.speed_per_unit);
  get_if(j, "dt", p.dt);
}

json task_json(const TaskConstants& t) {
  return json{{"delta", t.delta},
              {"progress_metric",
               t.progress_metric == ProgressMetric::kFromStart
                   ? "from_start"
                   : "toward_target"},
              {"target_retry_limit", t.target_retry_limit},
              {"respawn_retry_limit", t.respawn_retry_limit}};
}

void task_from(const json& j, TaskConstants& t) {
  get_if(j, "delta", t.delta);
  if (j.contains("progress_metric")) {
    const auto s = j.at("progress_metric").get<std::string>();
    if (s == "from_start") {
      t.progress_metric = ProgressMetric::kFromStart;
    } else if (s == "toward_target") {
      t.progress_metric = ProgressMetric::kTowardTarget;
    } else {
      throw std::invalid_argument("unknown progress_metric: " + s);
    }
  }
  get_if(j, "target_retry_limit", t.target_retry_limit);
  get_if(j, "respawn_retry_limit", t.respawn_retry_limit);
}

json ppo_json(const PpoConfig& p) {
  return json{{"total_steps", p.total_steps},
              {"rollout_steps", p.rollout_steps},
              {"batch_size", p.batch_size},
              {"epochs", p.epochs},
              {"learning_rate", p.learning_rate},
              {"clip_eps", p.clip_eps},
              {"gamma", p.gamma},
              {"entropy_coef", p.entropy_coef},
              {"gae_lambda", p.gae_lambda},
              {"advantage_normalization", p.advantage_normalization},
              {"linear_lr_decay", p.linear_lr_decay},
              {"n_envs", p.n_envs},
              {"value_coef", p.value_coef},
              {"initial_action_std", p.initial_action_std},
              {"pretrain_checkpoint", p.pretrain_checkpoint}};
}

void ppo_from(const json& j, PpoConfig& p) {
  get_if(j, "total_steps", p.total_steps);
  get_if(j, "rollout_steps", p.rollout_steps);
  get_if(j, "batch_size", p.batch_size);
  get_if(j, "epochs", p.epochs);
  get_if(j, "learning_rate", p.learning_rate);
  get_if(j, "clip_eps", p.clip_eps);
  get_if(j, "gamma", p.gamma);
  get_if(j, "entropy_coef", p.entropy_coef);
  get_if(j, "gae_lambda", p.gae_lambda);
  get_if(j, "advantage_normalization", p.advantage_normalization);
  get_if(j, "linear_lr_decay", p.linear_lr_decay);
  get_if(j, "n_envs", p.n_envs);
  get_if(j, "value_coef", p.value_coef);
  get_if(j, "initial_action_std", p.initial_action_std);
  get_if(j, "pretrain_checkpoint", p.pretrain_checkpoint);
}

json gmm_json(const EmOptions& g) {
  return json{{"max_iter", g.max_iter},
              {"tol", g.tol},
              {"sigma_floor", g.sigma_floor},
              {"restarts", g.restarts}};
}

void gmm_from(const json& j, EmOptions& g) {
  get_if(j, "max_iter", g.max_iter);
  get_if(j, "tol", g.tol);
  get_if(j, "sigma_floor", g.sigma_floor);
  get_if(j, "restarts", g.restarts);
}

}  // namespace

RunConfig config_from_json_text(const std::string& text) {
  const json j = json::parse(text);
  RunConfig c;
  get_if(j, "seed", c.seed);
  get_if(j, "out_dir", c.out_dir);
  if (j.contains("terrain")) terrain_from(j.at("terrain"), c.terrain);
  if (j.contains("robot")) robot_from(j.at("robot"), c.robot);
  if (j.contains("task")) task_from(j.at("task"), c.task);
  if (j.contains("ppo_initial")) ppo_from(j.at("ppo_initial"), c.ppo_initial);
  if (j.contains("ppo_general")) ppo_from(j.at("ppo_general"), c.ppo_general);
  if (j.contains("telemetry")) {
    get_if(j.at("telemetry"), "n_steps", c.telemetry.n_steps);
    get_if(j.at("telemetry"), "discard", c.telemetry.discard);
  }
  get_if(j, "feature_stride", c.feature_stride);
  get_if(j, "windows", c.windows);
  if (j.contains("gmm")) gmm_from(j.at("gmm"), c.gmm);
  get_if(j, "eval_episodes", c.eval_episodes);
  c.validate();
  return c;
}

std::string config_to_json_text(const RunConfig& c) {
  const json j{
      {"seed", c.seed},
      {"out_dir", c.out_dir},
      {"terrain", terrain_json(c.terrain)},
      {"robot", robot_json(c.robot)},
      {"task", task_json(c.task)},
      {"ppo_initial", ppo_json(c.ppo_initial)},
      {"ppo_general", ppo_json(c.ppo_general)},
      {"telemetry",
       json{{"n_steps", c.telemetry.n_steps}, {"discard", c.telemetry.discard}}},
      {"feature_stride", c.feature_stride},
      {"windows", c.windows},
      {"gmm", gmm_json(c.gmm)},
      {"eval_episodes", c.eval_episodes},
  };
  return j.dump(2) + "\n";
}

RunConfig load_config_file(const std::string& path) {
  return config_from_json_text(read_text_file(path));
}

void save_config_file(const std::string& path, const RunConfig& config) {
  write_text_file(path, config_to_json_text(config));
}

}  // namespace terraid
