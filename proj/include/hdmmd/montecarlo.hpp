#pragma once

#include "hdmmd/datagen.hpp"
#include "hdmmd/kernels.hpp"
#include "hdmmd/theory.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hdmmd {

enum class ExperimentMode { NullCalibration, PowerCurve, KernelImpact };

struct KernelEntry {
  std::string label;
  KernelSpec kernel;  // bandwidth field is ignored; the policy decides
  BandwidthPolicy bandwidth;
};

struct GridPoint {
  long n = 0;
  long m = 0;
  long p = 0;
};

// Fixed default so runs are reproducible unless a seed is chosen explicitly.
inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct ExperimentConfig {
  std::string name = "experiment";
  ExperimentMode mode = ExperimentMode::NullCalibration;
  ModelSpec model_x;
  ModelSpec model_y;
  std::vector<KernelEntry> kernels;
  std::vector<GridPoint> grid;
  std::vector<double> alphas{0.05};
  long replicates = 1000;
  std::uint64_t seed = kDefaultSeed;
  int threads = 0;  // 0: default_thread_count()
  PowerOptions theory;  // seed and threads are filled in by the engine

  // ConfigError naming the offending field.
  void validate() const;
};

// One (grid point, kernel, replicate) outcome. Replicates share their (X, Y)
// draw across kernels.
struct ReplicateRecord {
  long grid_index = 0;
  long kernel_index = 0;
  long replicate = 0;
  double bandwidth = 0.0;
  double statistic = 0.0;
  double var_hat = 0.0;
  double z_score = 0.0;
  double p_value = 1.0;
  std::vector<bool> reject;  // per alpha, same order as config.alphas
  bool failed = false;
  std::string error;
};

struct PointSummary {
  long grid_index = 0;
  GridPoint point;
  long kernel_index = 0;
  std::string kernel_label;
  double bandwidth = 0.0;  // resolved; mean over replicates for the median heuristic
  long completed = 0;
  long failed = 0;
  std::vector<double> rejection_rate;                  // per alpha
  std::vector<std::pair<double, double>> rate_ci99;    // Wilson interval per alpha
  std::optional<double> ks_distance;                   // needs >= 100 completed replicates
  double z_mean = 0.0;
  double z_variance = 0.0;
  double stat_mean = 0.0;
  double stat_std_error = 0.0;
  std::vector<std::pair<double, double>> z_quantiles;  // (probability, empirical quantile)
  std::vector<PowerPrediction> theory;                 // per alpha; PowerCurve and KernelImpact
  std::optional<double> h1;                            // KernelImpact
  std::optional<double> h2;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<PointSummary> points;      // grid-major, then kernel
  std::vector<ReplicateRecord> records;  // grid-major, then replicate, then kernel
};

// Bit-reproducible for a fixed config regardless of the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config);

// sup_x |F_n(x) - Phi(x)|. TooFewValues below 100 values.
double ks_distance(std::vector<double> z_scores);

// Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(long successes, long trials, double confidence = 0.99);

std::string mode_name(ExperimentMode mode);

}  // namespace hdmmd
