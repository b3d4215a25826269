#include "terraid/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "terraid/io.hpp"
#include "terraid/rng.hpp"

namespace terraid {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_normal_pdf(double x, double mean, double stddev) {
  const double z = (x - mean) / stddev;
  return -0.5 * z * z - std::log(stddev) - 0.5 * kLog2Pi;
}

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Linear-interpolation quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

void check_data(std::span<const double> data) {
  if (data.size() < 4) {
    throw std::invalid_argument("gmm needs at least 4 data points");
  }
  const double first = data[0];
  bool all_same = true;
  for (double x : data) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("gmm data must be finite");
    }
    if (x != first) all_same = false;
  }
  if (all_same) {
    throw std::invalid_argument("gmm data is degenerate (all identical)");
  }
}

}  // namespace

std::array<double, 2> GmmModel::responsibilities(double x) const {
  const double l0 = std::log(weight[0]) + log_normal_pdf(x, mean[0], stddev[0]);
  const double l1 = std::log(weight[1]) + log_normal_pdf(x, mean[1], stddev[1]);
  const double norm = log_sum_exp(l0, l1);
  return {std::exp(l0 - norm), std::exp(l1 - norm)};
}

Area GmmModel::classify_value(double x) const {
  const auto gamma = responsibilities(x);
  const double flat_gamma = gamma[flat_component];
  const double rough_gamma = gamma[1 - flat_component];
  return flat_gamma >= rough_gamma ? Area::kFlat : Area::kRough;
}

EmResult em_fit(std::span<const double> data, const GmmInit& init,
                const EmOptions& options) {
  check_data(data);
  const double nd = static_cast<double>(data.size());

  GmmModel model;
  model.weight = init.weight;
  model.mean = init.mean;
  for (int c = 0; c < 2; ++c) {
    model.stddev[c] = std::max(init.stddev[c], options.sigma_floor);
  }

  EmResult result;
  std::vector<double> gamma1(data.size());  // responsibility of component 1
  double prev_ll = -std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < options.max_iter; ++iter) {
    // E-step in the log domain.
    const double lw0 = std::log(model.weight[0]);
    const double lw1 = std::log(model.weight[1]);
    double ll = 0.0;
    for (size_t i = 0; i < data.size(); ++i) {
      const double l0 =
          lw0 + log_normal_pdf(data[i], model.mean[0], model.stddev[0]);
      const double l1 =
          lw1 + log_normal_pdf(data[i], model.mean[1], model.stddev[1]);
      const double norm = log_sum_exp(l0, l1);
      gamma1[i] = std::exp(l1 - norm);
      ll += norm;
    }
    result.log_likelihood_trace.push_back(ll);
    model.log_likelihood = ll;
    model.iterations = iter + 1;
    if (std::abs(ll - prev_ll) < options.tol) break;
    prev_ll = ll;

    // M-step: weighted means and standard deviations.
    double n1 = 0.0;
    for (double g : gamma1) n1 += g;
    const double n0 = nd - n1;
    double mu0 = 0.0, mu1 = 0.0;
    for (size_t i = 0; i < data.size(); ++i) {
      mu0 += (1.0 - gamma1[i]) * data[i];
      mu1 += gamma1[i] * data[i];
    }
    mu0 = n0 > 0.0 ? mu0 / n0 : model.mean[0];
    mu1 = n1 > 0.0 ? mu1 / n1 : model.mean[1];
    double var0 = 0.0, var1 = 0.0;
    for (size_t i = 0; i < data.size(); ++i) {
      const double d0 = data[i] - mu0;
      const double d1 = data[i] - mu1;
      var0 += (1.0 - gamma1[i]) * d0 * d0;
      var1 += gamma1[i] * d1 * d1;
    }
    var0 = n0 > 0.0 ? var0 / n0 : 0.0;
    var1 = n1 > 0.0 ? var1 / n1 : 0.0;

    model.weight = {n0 / nd, n1 / nd};
    model.mean = {mu0, mu1};
    model.stddev = {std::max(std::sqrt(var0), options.sigma_floor),
                    std::max(std::sqrt(var1), options.sigma_floor)};
  }

  // Alignment: the lower-mean component is flat.
  if (model.mean[0] < model.mean[1]) {
    model.flat_component = 0;
  } else if (model.mean[1] < model.mean[0]) {
    model.flat_component = 1;
  } else {
    model.flat_component = model.stddev[0] <= model.stddev[1] ? 0 : 1;
  }
  result.model = model;
  return result;
}

EmResult fit_gmm(std::span<const double> data, const EmOptions& options,
                 std::uint64_t seed) {
  check_data(data);
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  double mean = 0.0;
  for (double x : sorted) mean += x;
  mean /= static_cast<double>(sorted.size());
  double var = 0.0;
  for (double x : sorted) var += (x - mean) * (x - mean);
  var /= static_cast<double>(sorted.size());
  const double pooled_std = std::sqrt(var);

  GmmInit init;
  init.mean = {quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.75)};
  if (!(init.mean[0] < init.mean[1])) init.mean = {lo, hi};
  init.stddev = {0.5 * pooled_std, 0.5 * pooled_std};

  EmResult best = em_fit(data, init, options);

  Rng rng(derive_seed(seed, "gmm-restarts"));
  for (int r = 1; r < options.restarts; ++r) {
    GmmInit candidate;
    candidate.mean = {rng.uniform(lo, hi), rng.uniform(lo, hi)};
    if (candidate.mean[0] > candidate.mean[1]) {
      std::swap(candidate.mean[0], candidate.mean[1]);
    }
    candidate.stddev = {pooled_std * rng.uniform(0.25, 1.0),
                        pooled_std * rng.uniform(0.25, 1.0)};
    const double w = rng.uniform(0.3, 0.7);
    candidate.weight = {w, 1.0 - w};
    EmResult trial = em_fit(data, candidate, options);
    if (trial.model.log_likelihood > best.model.log_likelihood) {
      best = std::move(trial);
    }
  }
  return best;
}

std::vector<Area> classify(const GmmModel& model,
                           std::span<const double> values) {
  std::vector<Area> labels;
  labels.reserve(values.size());
  for (double x : values) labels.push_back(model.classify_value(x));
  return labels;
}

long ConfusionMatrix::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

double ConfusionMatrix::accuracy() const {
  const long t = total();
  return t > 0 ? static_cast<double>(counts[0][0] + counts[1][1]) / t
               : std::numeric_limits<double>::quiet_NaN();
}

double ConfusionMatrix::recall(Area area) const {
  const int row = area == Area::kFlat ? 0 : 1;
  const long n = counts[row][0] + counts[row][1];
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(counts[row][row]) / n;
}

ConfusionMatrix evaluate(std::span<const Area> predicted,
                         std::span<const Area> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("prediction/truth length mismatch");
  }
  ConfusionMatrix cm;
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == Area::kNeither || predicted[i] == Area::kNeither) {
      throw std::invalid_argument("labels must be flat or rough");
    }
    const int r = truth[i] == Area::kFlat ? 0 : 1;
    const int c = predicted[i] == Area::kFlat ? 0 : 1;
    ++cm.counts[r][c];
  }
  return cm;
}

std::vector<SweepRow> window_sweep(const Trajectory& flat,
                                   const Trajectory& rough,
                                   std::span<const int> windows,
                                   const EmOptions& options,
                                   std::uint64_t seed) {
  std::vector<SweepRow> rows;
  for (int window : windows) {
    const FeatureSeries flat_features = pitch_std_features(flat, window);
    const FeatureSeries rough_features = pitch_std_features(rough, window);

    std::vector<double> pooled = flat_features.values;
    pooled.insert(pooled.end(), rough_features.values.begin(),
                  rough_features.values.end());
    std::vector<Area> truth(flat_features.values.size(), Area::kFlat);
    truth.insert(truth.end(), rough_features.values.size(), Area::kRough);

    const EmResult fit =
        fit_gmm(pooled, options, derive_seed(seed, "sweep-" +
                                                       std::to_string(window)));
    const std::vector<Area> predicted = classify(fit.model, pooled);

    SweepRow row;
    row.window = window;
    row.model = fit.model;
    row.confusion = evaluate(predicted, truth);
    row.n_flat_windows = static_cast<long>(flat_features.values.size());
    row.n_rough_windows = static_cast<long>(rough_features.values.size());
    rows.push_back(row);
  }
  return rows;
}

std::string model_to_json(const GmmModel& model, int window) {
  nlohmann::json j{
      {"window", window},
      {"weights", {model.weight[0], model.weight[1]}},
      {"means", {model.mean[0], model.mean[1]}},
      {"stds", {model.stddev[0], model.stddev[1]}},
      {"alignment",
       {{"flat", model.flat_component}, {"rough", 1 - model.flat_component}}},
      {"log_likelihood", model.log_likelihood},
      {"iterations", model.iterations},
  };
  return j.dump(2) + "\n";
}

void save_model_json(const std::string& path, const GmmModel& model,
                     int window) {
  write_text_file(path, model_to_json(model, window));
}

GmmModel load_model_json(const std::string& path) {
  const nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  GmmModel model;
  model.weight = j.at("weights").get<std::array<double, 2>>();
  model.mean = j.at("means").get<std::array<double, 2>>();
  model.stddev = j.at("stds").get<std::array<double, 2>>();
  model.flat_component = j.at("alignment").at("flat").get<int>();
  model.log_likelihood = j.at("log_likelihood").get<double>();
  model.iterations = j.at("iterations").get<int>();
  return model;
}

void write_sweep_csv(const std::string& path, std::span<const SweepRow> rows) {
  std::string out = "window,mean_flat,std_flat,mean_rough,std_rough,accuracy\n";
  for (const auto& row : rows) {
    out += csv_row({std::to_string(row.window), format_double(row.mean_flat()),
                    format_double(row.std_flat()),
                    format_double(row.mean_rough()),
                    format_double(row.std_rough()),
                    format_double(row.accuracy())});
  }
  write_text_file(path, out);
}

void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm) {
  std::string out = "truth,predicted_flat,predicted_rough\n";
  out += csv_row({"flat", std::to_string(cm.counts[0][0]),
                  std::to_string(cm.counts[0][1])});
  out += csv_row({"rough", std::to_string(cm.counts[1][0]),
                  std::to_string(cm.counts[1][1])});
  write_text_file(path, out);
}

}  // namespace terraid
