#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "terraid/telemetry.hpp"

namespace terraid {

/// Two-component 1-D Gaussian mixture. The component with the lower mean is
/// aligned to flat terrain (rough windows carry the larger pitch spread).
struct GmmModel {
  std::array<double, 2> weight{0.5, 0.5};
  std::array<double, 2> mean{0.0, 1.0};
  std::array<double, 2> stddev{1.0, 1.0};
  int flat_component = 0;
  double log_likelihood = 0.0;
  int iterations = 0;

  /// Posterior responsibilities, normalized to sum to 1.
  std::array<double, 2> responsibilities(double x) const;

  /// Argmax responsibility mapped through the alignment; ties break to flat.
  Area classify_value(double x) const;
};

struct GmmInit {
  std::array<double, 2> weight{0.5, 0.5};
  std::array<double, 2> mean{0.0, 1.0};
  std::array<double, 2> stddev{1.0, 1.0};
};

struct EmOptions {
  int max_iter = 500;
  double tol = 1e-8;       // absolute log-likelihood change
  double sigma_floor = 1e-6;
  int restarts = 5;        // used by fit_gmm
};

struct EmResult {
  GmmModel model;
  std::vector<double> log_likelihood_trace;  // one entry per iteration
};

/// EM from an explicit initialization. Standard deviations are floored at
/// sigma_floor to survive near-constant clusters. Densities are evaluated in
/// the log domain. Throws std::invalid_argument for fewer than 4 points,
/// non-finite data, or all-identical data.
EmResult em_fit(std::span<const double> data, const GmmInit& init,
                const EmOptions& options);

/// Deterministic percentile initialization (means at the 25th/75th
/// percentiles) plus seeded random restarts; returns the best fit by final
/// log-likelihood.
EmResult fit_gmm(std::span<const double> data, const EmOptions& options,
                 std::uint64_t seed);

std::vector<Area> classify(const GmmModel& model,
                           std::span<const double> values);

/// Rows are truth, columns prediction, order (flat, rough).
struct ConfusionMatrix {
  long counts[2][2] = {{0, 0}, {0, 0}};

  long total() const;
  double accuracy() const;
  double recall(Area area) const;  // NaN when the class is absent
};

ConfusionMatrix evaluate(std::span<const Area> predicted,
                         std::span<const Area> truth);

struct SweepRow {
  int window = 0;
  GmmModel model;
  ConfusionMatrix confusion;
  long n_flat_windows = 0;
  long n_rough_windows = 0;

  double accuracy() const { return confusion.accuracy(); }
  double mean_flat() const { return model.mean[model.flat_component]; }
  double std_flat() const { return model.stddev[model.flat_component]; }
  double mean_rough() const { return model.mean[1 - model.flat_component]; }
  double std_rough() const { return model.stddev[1 - model.flat_component]; }
};

/// For each window size: pool the flat and rough pitch-std features with
/// labels withheld, fit a fresh mixture, classify every window and score
/// against the withheld ground truth.
std::vector<SweepRow> window_sweep(const Trajectory& flat,
                                   const Trajectory& rough,
                                   std::span<const int> windows,
                                   const EmOptions& options,
                                   std::uint64_t seed);

std::string model_to_json(const GmmModel& model, int window);
void save_model_json(const std::string& path, const GmmModel& model,
                     int window);
GmmModel load_model_json(const std::string& path);

void write_sweep_csv(const std::string& path,
                     std::span<const SweepRow> rows);
void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm);

}  // namespace terraid
