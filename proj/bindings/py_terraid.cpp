#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "terraid/config.hpp"
#include "terraid/evaluation.hpp"
#include "terraid/pipeline.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace terraid;

namespace {

std::vector<double> to_vector(const py::array_t<double>& array) {
  const auto buf = array.request();
  if (buf.ndim != 1) throw std::invalid_argument("expected a 1-D array");
  const auto* data = static_cast<const double*>(buf.ptr);
  return std::vector<double>(data, data + buf.shape[0]);
}

py::array_t<double> to_array(const std::vector<double>& values) {
  return py::array_t<double>(static_cast<py::ssize_t>(values.size()),
                             values.data());
}

std::vector<Area> labels_from_strings(const std::vector<std::string>& names) {
  std::vector<Area> labels;
  labels.reserve(names.size());
  for (const auto& name : names) labels.push_back(area_from_string(name));
  return labels;
}

/// Owns a heightfield plus one target-reach environment; the convenience
/// entry point for driving the simulator from Python.
class PyEnv {
 public:
  PyEnv(std::uint64_t seed, const std::string& area, double amplitude,
        double roughness_scale)
      : config_() {
    if (amplitude > 0.0) config_.terrain.amplitude = amplitude;
    config_.terrain.roughness_scale = roughness_scale;
    field_ = std::make_unique<Heightfield>(Heightfield::generate(
        config_.terrain, derive_seed(seed, "terrain")));
    const Area a = area_from_string(area);
    const AreaRect& rect = a == Area::kFlat ? config_.terrain.flat_rect
                                            : config_.terrain.rough_rect;
    env_ = std::make_unique<TargetReachEnv>(field_.get(), rect, config_.robot,
                                            config_.task, seed);
  }

  py::array_t<double> reset() {
    const auto obs = env_->reset();
    return to_array({obs.begin(), obs.end()});
  }

  py::tuple step(double action_left, double action_right) {
    const auto out = env_->step(action_left, action_right);
    return py::make_tuple(to_array({out.observation.begin(),
                                    out.observation.end()}),
                          out.reward, out.done, to_string(out.status));
  }

  py::dict robot_state() const {
    const RobotState& r = env_->robot();
    py::dict d;
    d["x"] = r.x;
    d["y"] = r.y;
    d["z"] = r.z;
    d["pitch"] = r.pitch;
    d["yaw"] = r.yaw;
    d["roll"] = r.roll;
    return d;
  }

 private:
  RunConfig config_;
  std::unique_ptr<Heightfield> field_;
  std::unique_ptr<TargetReachEnv> env_;
};

}  // namespace

PYBIND11_MODULE(_terraid, m) {
  m.doc() = "Differential-drive terrain simulator, PPO trainer and "
            "unsupervised terrain identification";

  py::class_<AreaRect>(m, "AreaRect")
      .def(py::init<>())
      .def(py::init([](double x_min, double x_max, double z_min,
                       double z_max) {
             return AreaRect{x_min, x_max, z_min, z_max};
           }),
           "x_min"_a, "x_max"_a, "z_min"_a, "z_max"_a)
      .def_readwrite("x_min", &AreaRect::x_min)
      .def_readwrite("x_max", &AreaRect::x_max)
      .def_readwrite("z_min", &AreaRect::z_min)
      .def_readwrite("z_max", &AreaRect::z_max)
      .def("contains", &AreaRect::contains, "x"_a, "z"_a);

  py::class_<HeightfieldParams>(m, "HeightfieldParams")
      .def(py::init<>())
      .def_readwrite("flat_rect", &HeightfieldParams::flat_rect)
      .def_readwrite("rough_rect", &HeightfieldParams::rough_rect)
      .def_readwrite("cell_size", &HeightfieldParams::cell_size)
      .def_readwrite("roughness_scale", &HeightfieldParams::roughness_scale)
      .def_readwrite("amplitude", &HeightfieldParams::amplitude)
      .def_readwrite("base_height", &HeightfieldParams::base_height)
      .def_readwrite("flat_margin", &HeightfieldParams::flat_margin);

  py::class_<Heightfield>(m, "Heightfield")
      .def_static(
          "generate",
          [](const HeightfieldParams& params, std::uint64_t seed) {
            return Heightfield::generate(params, seed);
          },
          "params"_a, "seed"_a)
      .def("height_at", &Heightfield::height_at, "x"_a, "z"_a)
      .def("in_extent", &Heightfield::in_extent, "x"_a, "z"_a)
      .def("area_at",
           [](const Heightfield& hf, double x, double z) {
             return std::string(to_string(hf.area_at(x, z)));
           },
           "x"_a, "z"_a)
      .def("save", &Heightfield::save, "path"_a)
      .def_static("load", &Heightfield::load, "path"_a)
      .def_property_readonly("nx", &Heightfield::nx)
      .def_property_readonly("nz", &Heightfield::nz)
      .def_property_readonly("cell_size", &Heightfield::cell_size)
      .def_property_readonly("seed", &Heightfield::seed)
      .def("heights", [](const Heightfield& hf) {
        return py::array_t<double>({hf.nz(), hf.nx()}, hf.heights().data());
      });

  py::class_<RobotParams>(m, "RobotParams")
      .def(py::init<>())
      .def_readwrite("wheel_radius", &RobotParams::wheel_radius)
      .def_readwrite("track_width", &RobotParams::track_width)
      .def_readwrite("body_length", &RobotParams::body_length)
      .def_readwrite("max_wheel_rate", &RobotParams::max_wheel_rate)
      .def_readwrite("speed_per_unit", &RobotParams::speed_per_unit)
      .def_readwrite("dt", &RobotParams::dt);

  m.def(
      "settle",
      [](double x, double z, double yaw, const Heightfield& field,
         const RobotParams& params) {
        const SettledPose pose = settle(x, z, yaw, field, params);
        return py::make_tuple(pose.y, pose.pitch, pose.roll);
      },
      "x"_a, "z"_a, "yaw"_a, "field"_a, "params"_a = RobotParams{},
      "Terrain-settled (y, pitch, roll) at a pose.");

  // Reward and episode-rule primitives.
  m.def("max_episode_steps", &max_episode_steps, "initial_distance"_a);
  m.def("penalty_distance", &penalty_distance, "initial_distance"_a, "k"_a,
        "delta"_a = 0.1);
  m.def("base_reward", &base_reward, "initial_distance"_a, "delta"_a = 0.1);
  m.def("truncate_tenth", &truncate_tenth, "value"_a);
  m.def("approach_count", &approach_count, "initial_distance"_a,
        "min_distance"_a, "delta"_a);

  m.def(
      "rolling_std",
      [](const py::array_t<double>& series, int window) {
        return to_array(rolling_std(to_vector(series), window));
      },
      "series"_a, "window"_a,
      "Rolling population standard deviation with stride 1.");

  py::class_<GmmModel>(m, "GmmModel")
      .def_property_readonly(
          "weights", [](const GmmModel& g) { return g.weight; })
      .def_property_readonly("means",
                             [](const GmmModel& g) { return g.mean; })
      .def_property_readonly("stds",
                             [](const GmmModel& g) { return g.stddev; })
      .def_readonly("flat_component", &GmmModel::flat_component)
      .def_readonly("log_likelihood", &GmmModel::log_likelihood)
      .def_readonly("iterations", &GmmModel::iterations)
      .def("responsibilities", &GmmModel::responsibilities, "x"_a)
      .def("classify_value", [](const GmmModel& g, double x) {
        return std::string(to_string(g.classify_value(x)));
      });

  m.def(
      "fit_gmm",
      [](const py::array_t<double>& data, std::uint64_t seed, int max_iter,
         double tol, int restarts) {
        EmOptions options;
        options.max_iter = max_iter;
        options.tol = tol;
        options.restarts = restarts;
        const EmResult result = fit_gmm(to_vector(data), options, seed);
        return py::make_tuple(result.model,
                              to_array(result.log_likelihood_trace));
      },
      "data"_a, "seed"_a = 0, "max_iter"_a = 500, "tol"_a = 1e-8,
      "restarts"_a = 5,
      "Fits the two-component mixture; returns (model, loglik_trace).");

  m.def(
      "classify",
      [](const GmmModel& model, const py::array_t<double>& values) {
        std::vector<std::string> out;
        for (Area a : classify(model, to_vector(values))) {
          out.emplace_back(to_string(a));
        }
        return out;
      },
      "model"_a, "values"_a);

  m.def(
      "evaluate_labels",
      [](const std::vector<std::string>& predicted,
         const std::vector<std::string>& truth) {
        const ConfusionMatrix cm = evaluate(labels_from_strings(predicted),
                                            labels_from_strings(truth));
        const long flat[4] = {cm.counts[0][0], cm.counts[0][1],
                              cm.counts[1][0], cm.counts[1][1]};
        return py::make_tuple(py::array_t<long>({2, 2}, flat),
                              cm.accuracy());
      },
      "predicted"_a, "truth"_a,
      "Confusion matrix (rows truth, cols prediction; flat, rough) and "
      "accuracy.");

  py::class_<PyEnv>(m, "TargetReachEnv")
      .def(py::init<std::uint64_t, const std::string&, double, double>(),
           "seed"_a = 0, "area"_a = "flat", "amplitude"_a = -1.0,
           "roughness_scale"_a = 0.8)
      .def("reset", &PyEnv::reset)
      .def("step", &PyEnv::step, "action_left"_a, "action_right"_a,
           "Returns (observation, reward, done, status).")
      .def("robot_state", &PyEnv::robot_state);

  m.attr("__version__") = "0.1.0";
}
