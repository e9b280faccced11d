#include "hdmmd/montecarlo.hpp"

#include "hdmmd/error.hpp"
#include "hdmmd/mmd.hpp"
#include "hdmmd/normal.hpp"
#include "hdmmd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace hdmmd {

namespace {

constexpr std::uint64_t kTheorySeedSalt = 0x9e3779b97f4a7c15ULL;
constexpr double kQuantileProbs[] = {0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99};

void config_fail(const std::string& field, const std::string& what) {
  fail(ErrorCode::ConfigError, field + ": " + what);
}

KernelSpec resolve_fixed(const KernelEntry& entry, long p) {
  return entry.kernel.with_bandwidth(resolve_bandwidth(entry.bandwidth, p));
}

// Bandwidth fed to the theory layer. The median heuristic is data dependent;
// in high dimension pooled squared distances concentrate at their mean, which
// with balanced samples is p (tau1 + tau2 + 2 tau3) / 4.
KernelSpec theory_kernel(const KernelEntry& entry, const ReducedSummary& s) {
  if (!entry.bandwidth.needs_data()) return resolve_fixed(entry, s.p);
  const TauParams t = tau_params(s);
  return entry.kernel.with_bandwidth(static_cast<double>(s.p) * (t.tau1 + t.tau2 + 2.0 * t.tau3) / 4.0);
}

double empirical_quantile(const std::vector<double>& sorted, double prob) {
  // Type-7 interpolation.
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string mode_name(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::NullCalibration: return "null_calibration";
    case ExperimentMode::PowerCurve: return "power_curve";
    case ExperimentMode::KernelImpact: return "kernel_impact";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (replicates < 100) config_fail("replicates", "must be >= 100");
  if (grid.empty()) config_fail("grid", "must not be empty");
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const std::string field = "grid[" + std::to_string(g) + "]";
    if (grid[g].n < 4 || grid[g].m < 4) config_fail(field, "n and m must be >= 4");
    if (grid[g].p < 1) config_fail(field, "p must be >= 1");
  }
  if (alphas.empty()) config_fail("alphas", "must not be empty");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) config_fail("alphas", "every level must lie in (0, 1)");
  }
  if (kernels.empty()) config_fail("kernels", "must not be empty");
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    const std::string field = "kernels[" + std::to_string(k) + "]";
    try {
      kernels[k].kernel.with_bandwidth(1.0).validate();
      kernels[k].bandwidth.validate();
    } catch (const Error& e) {
      config_fail(field, e.what());
    }
  }
  if (threads < 0) config_fail("threads", "must be >= 0");
  for (const auto& [name, model] : {std::pair{"model_x", &model_x}, std::pair{"model_y", &model_y}}) {
    for (const GridPoint& gp : grid) {
      try {
        model->with_dimension(gp.p).validate();
      } catch (const Error& e) {
        config_fail(name, e.what());
      }
    }
  }
  if (mode != ExperimentMode::NullCalibration) {
    if (model_x.transform != Transform::LinearMap || model_y.transform != Transform::LinearMap) {
      config_fail("mode", "power predictions need linear-map models");
    }
  }
}

double ks_distance(std::vector<double> z_scores) {
  if (z_scores.size() < 100) fail(ErrorCode::TooFewValues, "ks_distance needs at least 100 values");
  std::sort(z_scores.begin(), z_scores.end());
  const double n = static_cast<double>(z_scores.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z_scores.size(); ++i) {
    const double cdf = normal_cdf(z_scores[i]);
    d = std::max(d, static_cast<double>(i + 1) / n - cdf);
    d = std::max(d, cdf - static_cast<double>(i) / n);
  }
  return d;
}

std::pair<double, double> wilson_interval(long successes, long trials, double confidence) {
  if (trials <= 0) return {0.0, 1.0};
  const double z = normal_quantile(0.5 + 0.5 * confidence);
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (phat + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const int threads = config.threads > 0 ? config.threads : default_thread_count();
  const long grid_count = static_cast<long>(config.grid.size());
  const long kernel_count = static_cast<long>(config.kernels.size());
  const long reps = config.replicates;
  const std::size_t alpha_count = config.alphas.size();

  std::vector<double> thresholds;
  for (double a : config.alphas) thresholds.push_back(normal_quantile(1.0 - a));

  std::vector<ModelSampler> sx;
  std::vector<ModelSampler> sy;
  for (const GridPoint& gp : config.grid) {
    sx.emplace_back(config.model_x.with_dimension(gp.p));
    sy.emplace_back(config.model_y.with_dimension(gp.p));
  }

  ExperimentResult result;
  result.config = config;
  result.records.resize(static_cast<std::size_t>(grid_count * reps * kernel_count));

  // Every replicate is one task; each draws its own (X, Y) from streams keyed
  // by (seed, grid, replicate) and writes into its own slots.
  parallel_for(static_cast<std::size_t>(grid_count * reps), threads, [&](std::size_t task) {
    const long g = static_cast<long>(task) / reps;
    const long r = static_cast<long>(task) % reps;
    const GridPoint& gp = config.grid[g];
    Rng rx(config.seed, static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(r), StreamRole::X);
    Rng ry(config.seed, static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(r), StreamRole::Y);
    const SampleMatrix x = sx[g].draw(gp.n, rx);
    const SampleMatrix y = sy[g].draw(gp.m, ry);
    const PooledGram gram(x, y);

    for (long k = 0; k < kernel_count; ++k) {
      ReplicateRecord& rec = result.records[static_cast<std::size_t>(task * kernel_count + k)];
      rec.grid_index = g;
      rec.kernel_index = k;
      rec.replicate = r;
      rec.reject.assign(alpha_count, false);
      try {
        const KernelEntry& entry = config.kernels[k];
        const double gamma =
            entry.bandwidth.needs_data() ? gram.median_sqdist() : resolve_bandwidth(entry.bandwidth, gp.p);
        rec.bandwidth = gamma;
        const TestResult t = gram.test(entry.kernel.with_bandwidth(gamma), config.alphas.front());
        rec.statistic = t.mmd_stat;
        rec.var_hat = t.var_hat;
        rec.z_score = t.z_score;
        rec.p_value = t.p_value;
        for (std::size_t a = 0; a < alpha_count; ++a) rec.reject[a] = t.z_score > thresholds[a];
      } catch (const Error& e) {
        rec.failed = true;
        rec.error = e.what();
      }
    }
  });

  // Monte Carlo theory pieces that depend only on (p, kernel) are shared
  // across grid points.
  std::map<std::pair<long, long>, PowerOptions> theory_cache;

  for (long g = 0; g < grid_count; ++g) {
    const GridPoint& gp = config.grid[g];
    for (long k = 0; k < kernel_count; ++k) {
      PointSummary ps;
      ps.grid_index = g;
      ps.point = gp;
      ps.kernel_index = k;
      ps.kernel_label = config.kernels[k].label;

      std::vector<long> rejects(alpha_count, 0);
      std::vector<double> z;
      double stat_sum = 0.0;
      double stat_sq = 0.0;
      double bw_sum = 0.0;
      for (long r = 0; r < reps; ++r) {
        const ReplicateRecord& rec = result.records[static_cast<std::size_t>((g * reps + r) * kernel_count + k)];
        if (rec.failed) {
          ++ps.failed;
          continue;
        }
        ++ps.completed;
        for (std::size_t a = 0; a < alpha_count; ++a) rejects[a] += rec.reject[a] ? 1 : 0;
        z.push_back(rec.z_score);
        stat_sum += rec.statistic;
        stat_sq += rec.statistic * rec.statistic;
        bw_sum += rec.bandwidth;
      }

      const double done = static_cast<double>(ps.completed);
      for (std::size_t a = 0; a < alpha_count; ++a) {
        ps.rejection_rate.push_back(ps.completed > 0 ? static_cast<double>(rejects[a]) / done : 0.0);
        ps.rate_ci99.push_back(wilson_interval(rejects[a], ps.completed, 0.99));
      }
      if (ps.completed > 0) {
        ps.bandwidth = bw_sum / done;
        ps.stat_mean = stat_sum / done;
        double z_sum = 0.0;
        for (double v : z) z_sum += v;
        ps.z_mean = z_sum / done;
      }
      if (ps.completed > 1) {
        const double var = std::max(0.0, (stat_sq - done * ps.stat_mean * ps.stat_mean) / (done - 1.0));
        ps.stat_std_error = std::sqrt(var / done);
        double ss = 0.0;
        for (double v : z) ss += (v - ps.z_mean) * (v - ps.z_mean);
        ps.z_variance = ss / (done - 1.0);
      }
      if (z.size() >= 100) ps.ks_distance = ks_distance(z);
      if (!z.empty()) {
        std::sort(z.begin(), z.end());
        for (double prob : kQuantileProbs) ps.z_quantiles.emplace_back(prob, empirical_quantile(z, prob));
      }

      if (config.mode != ExperimentMode::NullCalibration) {
        const ModelSpec mx = config.model_x.with_dimension(gp.p);
        const ModelSpec my = config.model_y.with_dimension(gp.p);
        const ReducedSummary summary = TheoryInput::from_models(mx, my).reduce();
        const KernelSpec kernel = theory_kernel(config.kernels[k], summary);

        PowerOptions& options = theory_cache.try_emplace({gp.p, k}, config.theory).first->second;
        options.seed = config.seed ^ kTheorySeedSalt;
        options.threads = threads;
        for (double alpha : config.alphas) {
          const PowerPrediction pred = predict_power(mx, my, kernel, gp.n, gp.m, alpha, options);
          if (pred.regime == PowerRegime::HigherOrderS2) {
            options.population_mmd = MonteCarloEstimate{pred.mmd_pop, pred.mmd_pop_std_error};
          } else if (pred.t1_std_error > 0.0) {
            options.t1_estimate = MonteCarloEstimate{pred.t1, pred.t1_std_error};
          }
          ps.theory.push_back(pred);
        }
        if (config.mode == ExperimentMode::KernelImpact) {
          const double tau_arg = tau_params(summary).tau1 * static_cast<double>(gp.p) / kernel.bandwidth;
          ps.h1 = h1(kernel, tau_arg);
          ps.h2 = h2(kernel, kernel.bandwidth, summary.tr1);
        }
      }
      result.points.push_back(std::move(ps));
    }
  }
  return result;
}

}  // namespace hdmmd
