// hd-mmd: command-line front end for the hdmmd library.

#include "hdmmd/datagen.hpp"
#include "hdmmd/error.hpp"
#include "hdmmd/io.hpp"
#include "hdmmd/kernels.hpp"
#include "hdmmd/mmd.hpp"
#include "hdmmd/montecarlo.hpp"
#include "hdmmd/parallel.hpp"
#include "hdmmd/parse.hpp"
#include "hdmmd/theory.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>

using namespace hdmmd;

namespace {

std::uint64_t parse_seed(const std::string& text) {
  if (text == "random") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  const long long v = parse_int(text, "--seed");
  if (v < 0) fail(ErrorCode::InvalidArgument, "--seed must be >= 0 or 'random'");
  return static_cast<std::uint64_t>(v);
}

KernelSpec kernel_flag(const std::string& text) {
  try {
    return parse_kernel(text);
  } catch (const Error& e) {
    fail(ErrorCode::InvalidArgument, std::string("--kernel: ") + e.what());
  }
}

BandwidthPolicy bandwidth_flag(const std::string& text) {
  try {
    return parse_bandwidth(text);
  } catch (const Error& e) {
    fail(ErrorCode::InvalidArgument, std::string("--bandwidth: ") + e.what());
  }
}

int cmd_test(const std::string& x_path, const std::string& y_path, const std::string& kernel_text,
             const std::string& bandwidth_text, double alpha, bool json) {
  const KernelSpec family = kernel_flag(kernel_text);
  const BandwidthPolicy policy = bandwidth_flag(bandwidth_text);
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "--alpha must lie in (0, 1)");
  const SampleMatrix x = read_csv_matrix(x_path);
  const SampleMatrix y = read_csv_matrix(y_path);
  if (x.cols() != y.cols()) {
    fail(ErrorCode::InvalidArgument, "--x has " + std::to_string(x.cols()) + " columns but --y has " +
                                         std::to_string(y.cols()));
  }
  if (x.rows() < 4 || y.rows() < 4) fail(ErrorCode::InvalidArgument, "--x and --y need at least 4 rows each");
  const PooledGram gram(x, y, default_thread_count());
  const double gamma = policy.needs_data() ? gram.median_sqdist() : resolve_bandwidth(policy, x.cols());
  const TestResult r = gram.test(family.with_bandwidth(gamma), alpha);
  if (json) {
    std::cout << to_json(r).dump(2) << '\n';
  } else {
    std::cout << "kernel      " << r.kernel << " (bandwidth " << format_number(r.bandwidth) << ")\n"
              << "n, m, p     " << r.n << ", " << r.m << ", " << r.p << "\n"
              << "mmd         " << format_number(r.mmd_stat) << "\n"
              << "var_hat     " << format_number(r.var_hat) << "\n"
              << "z           " << format_number(r.z_score) << "\n"
              << "p-value     " << format_number(r.p_value) << "\n"
              << "reject      " << (r.reject ? "yes" : "no") << " at alpha " << format_number(r.alpha) << "\n";
  }
  return 0;
}

int cmd_sample(const std::string& model_path, long n, long p, const std::string& seed_text, const std::string& out) {
  ModelSpec model = model_from_json(read_json_file(model_path), "model");
  if (p > 0) model = model.with_dimension(p);
  if (n < 1) fail(ErrorCode::InvalidArgument, "--n must be >= 1");
  const SampleMatrix x = sample(model, n, parse_seed(seed_text));
  if (out.empty() || out == "-") {
    write_csv_matrix(std::cout, x);
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) fail(ErrorCode::InvalidArgument, "--out: cannot open " + out);
    write_csv_matrix(f, x);
  }
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  const ExperimentConfig config = config_from_json(read_json_file(config_path));
  const ExperimentResult result = run_experiment(config);
  write_experiment_outputs(result, out_dir);
  for (const PointSummary& ps : result.points) {
    std::cout << ps.kernel_label << " n=" << ps.point.n << " m=" << ps.point.m << " p=" << ps.point.p;
    for (std::size_t a = 0; a < ps.rejection_rate.size(); ++a) {
      std::cout << " rate@" << format_number(config.alphas[a]) << '=' << format_number(ps.rejection_rate[a]);
      if (a < ps.theory.size()) std::cout << " (theory " << format_number(ps.theory[a].predicted_power) << ')';
    }
    if (ps.failed) std::cout << " failed=" << ps.failed;
    std::cout << '\n';
  }
  std::cout << "wrote " << out_dir << "/summary.json, replicates.csv, qq.csv\n";
  return 0;
}

int cmd_predict_power(const std::string& config_path) {
  const Json j = read_json_file(config_path);
  if (!j.is_object()) fail(ErrorCode::ConfigError, "config: expected an object");
  auto need = [&](const char* key) -> const Json& {
    if (!j.contains(key)) fail(ErrorCode::ConfigError, std::string("config.") + key + ": is required");
    return j[key];
  };
  auto integer = [&](const char* key) {
    const Json& v = need(key);
    if (!v.is_number_integer()) fail(ErrorCode::ConfigError, std::string(key) + ": expected an integer");
    return v.get<long>();
  };
  const long n = integer("n");
  const long m = j.contains("m") ? integer("m") : n;
  const double alpha = j.contains("alpha") && j["alpha"].is_number() ? j["alpha"].get<double>() : 0.05;
  if (j.contains("alpha") && !j["alpha"].is_number()) fail(ErrorCode::ConfigError, "alpha: expected a number");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::ConfigError, "alpha: must lie in (0, 1)");
  if (!need("kernel").is_string()) fail(ErrorCode::ConfigError, "kernel: expected a string");
  KernelSpec kernel;
  BandwidthPolicy policy = BandwidthPolicy::scaled(2.0);
  try {
    kernel = parse_kernel(j["kernel"].get<std::string>());
    if (j.contains("bandwidth")) {
      if (!j["bandwidth"].is_string()) fail(ErrorCode::ConfigError, "bandwidth: expected a string");
      policy = parse_bandwidth(j["bandwidth"].get<std::string>());
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(ErrorCode::ConfigError, std::string("kernel/bandwidth: ") + e.what());
  }
  if (policy.needs_data()) fail(ErrorCode::ConfigError, "bandwidth: predictions need a fixed or scaled bandwidth");
  const bool full_var = j.contains("include_v12_v13") && j["include_v12_v13"].is_boolean() &&
                        j["include_v12_v13"].get<bool>();

  PowerPrediction pred;
  if (j.contains("summary")) {
    const ReducedSummary s = summary_from_json(j["summary"], "summary");
    try {
      pred = predict_power(s, kernel.with_bandwidth(resolve_bandwidth(policy, s.p)), n, m, alpha, full_var);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MissingSummary) throw;
      fail(ErrorCode::ConfigError, std::string("summary: ") + e.what());
    }
  } else {
    ModelSpec mx = model_from_json(need("model_x"), "model_x");
    ModelSpec my = j.contains("model_y") ? model_from_json(j["model_y"], "model_y") : mx;
    if (j.contains("p")) {
      const long p = integer("p");
      mx = mx.with_dimension(p);
      my = my.with_dimension(p);
    }
    PowerOptions options;
    options.include_v12_v13 = full_var;
    options.threads = default_thread_count();
    if (j.contains("seed")) options.seed = parse_seed(j["seed"].is_string() ? j["seed"].get<std::string>()
                                                                             : std::to_string(j["seed"].get<long long>()));
    if (j.contains("mmd_draws")) options.mmd_draws = integer("mmd_draws");
    if (j.contains("t1_reps")) options.t1_reps = integer("t1_reps");
    pred = predict_power(mx, my, kernel.with_bandwidth(resolve_bandwidth(policy, mx.p)), n, m, alpha, options);
  }
  Json out = to_json(pred);
  out["n"] = n;
  out["m"] = m;
  out["alpha"] = json_number(alpha);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_kernel_impact(double tau, double gamma, double trace, double rq_alpha) {
  if (!(tau > 0.0)) fail(ErrorCode::InvalidArgument, "--tau must be > 0");
  const bool with_h2 = gamma > 0.0 && trace > 0.0;
  const KernelSpec kernels[] = {KernelSpec::gaussian(1.0), KernelSpec::laplace(1.0),
                                KernelSpec::rational_quadratic(rq_alpha, 1.0), KernelSpec::energy(1.0)};
  std::cout << "kernel,tau,h1";
  if (with_h2) std::cout << ",gamma,trace,h2";
  std::cout << '\n';
  for (const KernelSpec& k : kernels) {
    std::cout << kernel_name(k) << ',' << format_number(tau) << ',' << format_number(h1(k, tau));
    if (with_h2) {
      std::cout << ',' << format_number(gamma) << ',' << format_number(trace) << ','
                << format_number(h2(k, gamma, trace));
    }
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-dimensional kernel two-sample testing (MMD / energy distance)", "hd-mmd"};
  app.require_subcommand(1, 1);
  app.footer("Environment: HD_MMD_THREADS caps the worker count.\n"
             "Exit status: 0 success, 1 numeric failure, 2 usage or config error.");

  std::string x_path, y_path, kernel = "gaussian", bandwidth = "scaled:2";
  double alpha = 0.05;
  bool json = false;
  auto* test = app.add_subcommand("test", "Studentized MMD two-sample test on two CSV samples");
  test->add_option("--x", x_path, "CSV file with the first sample (rows = observations)")->required();
  test->add_option("--y", y_path, "CSV file with the second sample")->required();
  test->add_option("--kernel", kernel, "gaussian | laplace | rq:<alpha> | energy")->capture_default_str();
  test->add_option("--bandwidth", bandwidth, "fixed:<gamma> | scaled:<c> (gamma = c p) | median")
      ->capture_default_str();
  test->add_option("--alpha", alpha, "significance level")->capture_default_str();
  test->add_flag("--json", json, "print the result as JSON");

  std::string model_path, out_path, seed = std::to_string(kDefaultSeed);
  long n = 0, p = 0;
  auto* samp = app.add_subcommand("sample", "Draw a sample from a model spec and write CSV");
  samp->add_option("--model", model_path, "JSON model spec")->required();
  samp->add_option("--n", n, "number of rows")->required();
  samp->add_option("--p", p, "dimension (overrides the spec)");
  samp->add_option("--seed", seed, "integer seed or 'random'")->capture_default_str();
  samp->add_option("--out", out_path, "output CSV (default stdout)");

  std::string config_path, out_dir = "results";
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo experiment from a JSON config");
  sim->add_option("--config", config_path, "experiment config (JSON)")->required();
  sim->add_option("--out", out_dir, "output directory")->capture_default_str();

  std::string predict_path;
  auto* pred = app.add_subcommand("predict-power", "Asymptotic power prediction from a JSON config");
  pred->add_option("--config", predict_path, "prediction config (JSON)")->required();

  double tau = 2.0, gamma = 0.0, trace = 0.0, rq_alpha = 0.5;
  auto* impact = app.add_subcommand("kernel-impact", "h1 (and h2) kernel-impact ratios as CSV");
  impact->add_option("--tau", tau, "kernel argument tau")->capture_default_str();
  impact->add_option("--gamma", gamma, "bandwidth for h2");
  impact->add_option("--trace", trace, "tr(Sigma1) for h2");
  impact->add_option("--rq-alpha", rq_alpha, "rational-quadratic exponent")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*test) return cmd_test(x_path, y_path, kernel, bandwidth, alpha, json);
    if (*samp) return cmd_sample(model_path, n, p, seed, out_path);
    if (*sim) return cmd_simulate(config_path, out_dir);
    if (*pred) return cmd_predict_power(predict_path);
    if (*impact) return cmd_kernel_impact(tau, gamma, trace, rq_alpha);
  } catch (const Error& e) {
    std::cerr << "hd-mmd: " << e.what() << '\n';
    return e.is_usage_error() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "hd-mmd: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
