#pragma once

#include "hdmmd/datagen.hpp"
#include "hdmmd/kernels.hpp"

#include <cstdint>
#include <optional>

namespace hdmmd {

// Scalar summaries of (mu1, Sigma1, mu2, Sigma2) that the asymptotic formulas
// consume. Second-order traces are optional so that a caller who only knows
// the first-order quantities can still get tau and Delta_0; formulas needing
// a missing entry throw MissingSummary.
struct ReducedSummary {
  long p = 0;
  double tr1 = 0.0;       // tr Sigma1
  double tr2 = 0.0;       // tr Sigma2
  double delta_sq = 0.0;  // |mu1 - mu2|^2
  std::optional<double> tr1_sq;        // tr Sigma1^2
  std::optional<double> tr2_sq;        // tr Sigma2^2
  std::optional<double> tr12;          // tr Sigma1 Sigma2
  std::optional<double> frob_diff_sq;  // |Sigma1 - Sigma2|_F^2
  std::optional<double> delta_s1_delta;  // (mu1 - mu2)' Sigma1 (mu1 - mu2)
  std::optional<double> delta_s2_delta;
  // sum_k kappa s_kk^2 with s = diag(Gamma' Gamma) and kappa = E U(k)^4 - 3.
  // Zero is the Gaussian convention.
  double kurtosis_term1 = 0.0;
  double kurtosis_term2 = 0.0;
  // Entries known to be Gaussian (X - mu is exactly N(0, Sigma)).
  bool gaussian = false;

  void validate() const;
};

// Full population description. Sigma matrices must be symmetric PSD
// (smallest eigenvalue >= -1e-8); NotPositiveSemiDefinite otherwise.
struct TheoryInput {
  Eigen::VectorXd mu1;
  Eigen::VectorXd mu2;
  Eigen::MatrixXd sigma1;
  Eigen::MatrixXd sigma2;
  // diag(Gamma_i' Gamma_i); only read when the kurtosis is nonzero.
  Eigen::VectorXd gram_diag1;
  Eigen::VectorXd gram_diag2;
  double kurtosis_excess1 = 0.0;
  double kurtosis_excess2 = 0.0;
  bool gaussian = true;

  long p() const noexcept { return static_cast<long>(mu1.size()); }
  void validate() const;
  ReducedSummary reduce() const;

  // MissingSummary unless both models use the linear-map transform.
  static TheoryInput from_models(const ModelSpec& x_model, const ModelSpec& y_model);
};

struct TauParams {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double tau3 = 0.0;
};

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

struct VarianceComponents {
  double v11 = 0.0;
  double v12 = 0.0;
  double v13 = 0.0;
  double total() const noexcept { return v11 + v12 + v13; }
};

enum class PowerRegime { LocalS1, HigherOrderS2 };

struct PowerPrediction {
  PowerRegime regime = PowerRegime::LocalS1;
  double delta0 = 0.0;
  double t1 = 0.0;
  double t1_std_error = 0.0;  // nonzero when T1 came from Monte Carlo
  double mmd_pop = 0.0;       // HigherOrderS2 signal
  double mmd_pop_std_error = 0.0;
  VarianceComponents components;
  double var_delta1 = 0.0;  // variance actually used
  double signal = 0.0;      // Delta_0 + T1, or MMD^2
  double predicted_power = 0.0;
  // Power at signal -/+ 3 Monte Carlo standard errors of the signal.
  double power_lower = 0.0;
  double power_upper = 0.0;
};

// The formulas are written for bandwidth = p. A kernel with bandwidth gamma
// equals the bandwidth-p kernel with f replaced by f(. * p / gamma), so every
// function below evaluates f and its derivatives through that rescaling.

TauParams tau_params(const ReducedSummary& s);

// f(tau1) + f(tau2) - 2 f(tau3).
double delta0(const ReducedSummary& s, const KernelSpec& kernel);

// 2 p^-2 f''(tau) |Sigma1 - Sigma2|_F^2. HypothesisViolated unless the means
// and traces agree to 1e-8.
double t1_frobenius(const ReducedSummary& s, const KernelSpec& kernel);

// (2p^2)^-1 [f''(tau1) E(|X1-X2|^2 - p tau1)^2 + f''(tau2) E(|Y1-Y2|^2 - p tau2)^2
//            - 2 f''(tau3) E(|X1-Y1|^2 - p tau3)^2 ]
// with the expectations in closed form. Valid for Gaussian entries, or for
// any entries when mu1 == mu2 (kurtosis terms included). HypothesisViolated
// otherwise.
double t1_closed_form(const ReducedSummary& s, const KernelSpec& kernel);

// Monte Carlo estimate of the same expectation-form T1.
MonteCarloEstimate t1_general(const ModelSpec& gen1, const ModelSpec& gen2, const KernelSpec& kernel, long reps,
                              std::uint64_t seed, int threads = 1);

// Monte Carlo estimate of
//   (s! p^s)^-1 [f^(s)(tau1) E(|X1-X2|^2 - p tau1)^s + f^(s)(tau2) E(|Y1-Y2|^2 - p tau2)^s
//                - 2 f^(s)(tau3) E(|X1-Y1|^2 - p tau3)^s ],
// i.e. T_{s-1}. UnsupportedOrder unless 2 <= s <= 4. Both generators must be
// linear-map models so that tau is known exactly.
MonteCarloEstimate ts_monte_carlo(int s, const ModelSpec& gen1, const ModelSpec& gen2, const KernelSpec& kernel,
                                  long reps, std::uint64_t seed, int threads = 1);

// var(Delta_{1,1}), var(Delta_{1,2}), var(Delta_{1,3}) at sample sizes n, m.
VarianceComponents var_delta1_components(const ReducedSummary& s, const KernelSpec& kernel, long n, long m);

double power_local(double delta0, double t1, double var_d1, double alpha);
double power_higher_order(double mmd_pop, double var_d1, double alpha);

// E k(X,X') + E k(Y,Y') - 2 E k(X,Y) for X ~ N(mu1, Sigma1), Y ~ N(mu2, Sigma2)
// and the Gaussian kernel exp(-|x-y|^2 / gamma).
double population_mmd_gaussian(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& sigma1,
                               const Eigen::VectorXd& mu2, const Eigen::MatrixXd& sigma2, double gamma);

// Monte Carlo population MMD^2. The `draws` observations per generator are
// split into blocks of `block` rows; each block yields an unbiased two-sample
// U-statistic and the estimate is their mean, with standard error
// sd(blocks)/sqrt(#blocks).
MonteCarloEstimate population_mmd_monte_carlo(const ModelSpec& gen1, const ModelSpec& gen2, const KernelSpec& kernel,
                                              long draws, std::uint64_t seed, int threads = 1, long block = 2500);

// f''(tau) / |f'(tau)| (no bandwidth rescaling: tau is the kernel argument).
double h1(const KernelSpec& kernel, double tau);
// f''(C/gamma) / (|f'(C/gamma)| gamma) with C = 2 tr Sigma1, evaluated from
// the derivatives.
double h2(const KernelSpec& kernel, double gamma, double tr_sigma1);
// Closed forms of h2 per kernel family.
double h2_closed_form(const KernelSpec& kernel, double gamma, double tr_sigma1);

struct PowerOptions {
  bool include_v12_v13 = false;
  long t1_reps = 20000;          // Monte Carlo T1 when no closed form applies
  long mmd_draws = 100000;       // population MMD for HigherOrderS2
  long mmd_block = 2500;
  std::uint64_t seed = 0x5eed;
  int threads = 1;
  // Precomputed Monte Carlo pieces; neither depends on (n, m) or alpha.
  std::optional<MonteCarloEstimate> t1_estimate;
  std::optional<MonteCarloEstimate> population_mmd;
};

// Power prediction for a pair of linear-map generators at sizes (n, m).
// LocalS1 when the means or covariances differ (Delta_0 + T1 signal),
// HigherOrderS2 when they agree and only higher moments differ.
PowerPrediction predict_power(const ModelSpec& gen1, const ModelSpec& gen2, const KernelSpec& kernel, long n, long m,
                              double alpha, const PowerOptions& options = {});

// LocalS1 prediction from summaries alone; T1 from the closed form.
PowerPrediction predict_power(const ReducedSummary& s, const KernelSpec& kernel, long n, long m, double alpha,
                              bool include_v12_v13 = false);

std::string regime_name(PowerRegime regime);

}  // namespace hdmmd
