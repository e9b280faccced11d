#include "hdmmd/theory.hpp"

#include "hdmmd/error.hpp"
#include "hdmmd/mmd.hpp"
#include "hdmmd/normal.hpp"
#include "hdmmd/parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace hdmmd {

namespace {

constexpr double kHypothesisTol = 1e-8;
constexpr long kOracleChunk = 1000;

double scale_of(const KernelSpec& kernel, long p) {
  kernel.validate();
  return static_cast<double>(p) / kernel.bandwidth;
}

double ft(const KernelSpec& kernel, int order, double tau, double scale) {
  return scaled_f_deriv(kernel, order, tau, scale);
}

double need(const std::optional<double>& v, const char* name) {
  if (!v) fail(ErrorCode::MissingSummary, std::string("summary field ") + name + " is required");
  return *v;
}

void check_psd(const Eigen::MatrixXd& m, const char* name) {
  if (!m.isApprox(m.transpose(), 1e-10) && (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    fail(ErrorCode::InvalidArgument, std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-8) {
    fail(ErrorCode::NotPositiveSemiDefinite, std::string(name) + " has a negative eigenvalue");
  }
}

double factorial(int s) {
  double r = 1.0;
  for (int k = 2; k <= s; ++k) r *= k;
  return r;
}

// log det(A) and x' A^-1 x for symmetric positive definite A.
void spd_logdet_quad(const Eigen::MatrixXd& a, const Eigen::VectorXd& x, double& logdet, double& quad) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) fail(ErrorCode::SingularMatrix, "matrix is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  logdet = 2.0 * l.diagonal().array().log().sum();
  quad = x.size() == 0 ? 0.0 : x.dot(llt.solve(x));
}

// E exp(-|Z|^2 / gamma) for Z ~ N(delta, S).
double gaussian_kernel_expectation(const Eigen::MatrixXd& s, const Eigen::VectorXd& delta, double gamma) {
  const long p = s.rows();
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(p, p) + (2.0 / gamma) * s;
  double logdet = 0.0;
  double quad = 0.0;
  spd_logdet_quad(a, delta, logdet, quad);
  return std::exp(-0.5 * logdet - quad / gamma);
}

}  // namespace

std::string regime_name(PowerRegime regime) {
  return regime == PowerRegime::LocalS1 ? "local_s1" : "higher_order_s2";
}

void ReducedSummary::validate() const {
  if (p < 1) fail(ErrorCode::InvalidArgument, "summary dimension p must be >= 1");
  if (!(tr1 > 0.0) || !(tr2 > 0.0)) fail(ErrorCode::InvalidArgument, "covariance traces must be > 0");
  if (delta_sq < 0.0) fail(ErrorCode::InvalidArgument, "squared mean difference must be >= 0");
}

void TheoryInput::validate() const {
  const long p = this->p();
  if (p < 1) fail(ErrorCode::InvalidArgument, "theory input needs p >= 1");
  if (mu2.size() != p || sigma1.rows() != p || sigma1.cols() != p || sigma2.rows() != p || sigma2.cols() != p) {
    fail(ErrorCode::DimensionMismatch, "theory input fields disagree on p");
  }
  if ((gram_diag1.size() != 0 && gram_diag1.size() != p) || (gram_diag2.size() != 0 && gram_diag2.size() != p)) {
    fail(ErrorCode::DimensionMismatch, "gram diagonal length must equal p");
  }
  check_psd(sigma1, "sigma1");
  check_psd(sigma2, "sigma2");
}

ReducedSummary TheoryInput::reduce() const {
  validate();
  ReducedSummary s;
  s.p = p();
  const Eigen::VectorXd delta = mu1 - mu2;
  s.tr1 = sigma1.trace();
  s.tr2 = sigma2.trace();
  s.delta_sq = delta.squaredNorm();
  s.tr1_sq = sigma1.squaredNorm();
  s.tr2_sq = sigma2.squaredNorm();
  s.tr12 = sigma1.cwiseProduct(sigma2).sum();
  s.frob_diff_sq = (sigma1 - sigma2).squaredNorm();
  s.delta_s1_delta = delta.dot(sigma1 * delta);
  s.delta_s2_delta = delta.dot(sigma2 * delta);
  auto kurt_term = [](double kappa, const Eigen::VectorXd& diag) {
    if (kappa == 0.0) return 0.0;
    if (diag.size() == 0) fail(ErrorCode::MissingSummary, "nonzero kurtosis needs diag(Gamma' Gamma)");
    return kappa * diag.squaredNorm();
  };
  s.kurtosis_term1 = kurt_term(kurtosis_excess1, gram_diag1);
  s.kurtosis_term2 = kurt_term(kurtosis_excess2, gram_diag2);
  s.gaussian = gaussian;
  return s;
}

TheoryInput TheoryInput::from_models(const ModelSpec& x_model, const ModelSpec& y_model) {
  if (x_model.p != y_model.p) fail(ErrorCode::DimensionMismatch, "models have different dimensions");
  const PopulationMoments a = population_moments(x_model);
  const PopulationMoments b = population_moments(y_model);
  TheoryInput ti;
  ti.mu1 = a.mean;
  ti.mu2 = b.mean;
  ti.sigma1 = a.sigma;
  ti.sigma2 = b.sigma;
  ti.gram_diag1 = a.gram_diag;
  ti.gram_diag2 = b.gram_diag;
  ti.kurtosis_excess1 = a.excess_kurtosis;
  ti.kurtosis_excess2 = b.excess_kurtosis;
  ti.gaussian = a.gaussian && b.gaussian;
  return ti;
}

TauParams tau_params(const ReducedSummary& s) {
  s.validate();
  const double p = static_cast<double>(s.p);
  return {2.0 * s.tr1 / p, 2.0 * s.tr2 / p, (s.tr1 + s.tr2 + s.delta_sq) / p};
}

double delta0(const ReducedSummary& s, const KernelSpec& kernel) {
  const TauParams t = tau_params(s);
  const double c = scale_of(kernel, s.p);
  return ft(kernel, 0, t.tau1, c) + ft(kernel, 0, t.tau2, c) - 2.0 * ft(kernel, 0, t.tau3, c);
}

double t1_frobenius(const ReducedSummary& s, const KernelSpec& kernel) {
  s.validate();
  const double scale_tol = kHypothesisTol * std::max(1.0, std::max(s.tr1, s.tr2));
  if (s.delta_sq > kHypothesisTol || std::fabs(s.tr1 - s.tr2) > scale_tol) {
    fail(ErrorCode::HypothesisViolated, "the Frobenius form of T1 needs equal means and equal traces");
  }
  const double frob = need(s.frob_diff_sq, "frob_diff_sq");
  const double p = static_cast<double>(s.p);
  const double tau = tau_params(s).tau1;
  return 2.0 / (p * p) * ft(kernel, 2, tau, scale_of(kernel, s.p)) * frob;
}

double t1_closed_form(const ReducedSummary& s, const KernelSpec& kernel) {
  const TauParams t = tau_params(s);
  const bool centered = s.delta_sq == 0.0;
  if (!s.gaussian && !centered) {
    fail(ErrorCode::HypothesisViolated, "closed-form T1 needs Gaussian entries or equal means");
  }
  const double a = need(s.tr1_sq, "tr1_sq");
  const double b = need(s.tr2_sq, "tr2_sq");
  const double c12 = need(s.tr12, "tr12");
  const double shift =
      centered ? 0.0 : need(s.delta_s1_delta, "delta_s1_delta") + need(s.delta_s2_delta, "delta_s2_delta");
  const double k1 = s.gaussian ? 0.0 : s.kurtosis_term1;
  const double k2 = s.gaussian ? 0.0 : s.kurtosis_term2;

  // var |X1 - X2|^2 = 8 tr S1^2 + 2 sum kappa s_kk^2; for X1 - Y1 the two
  // quadratic forms add up plus 4 tr S1 S2, and a mean shift adds 4 d'(S1+S2)d.
  const double exx = 8.0 * a + 2.0 * k1;
  const double eyy = 8.0 * b + 2.0 * k2;
  const double exy = 2.0 * a + k1 + 2.0 * b + k2 + 4.0 * c12 + 4.0 * shift;

  const double p = static_cast<double>(s.p);
  const double c = scale_of(kernel, s.p);
  return (ft(kernel, 2, t.tau1, c) * exx + ft(kernel, 2, t.tau2, c) * eyy - 2.0 * ft(kernel, 2, t.tau3, c) * exy) /
         (2.0 * p * p);
}

MonteCarloEstimate ts_monte_carlo(int s, const ModelSpec& gen1, const ModelSpec& gen2, const KernelSpec& kernel,
                                  long reps, std::uint64_t seed, int threads) {
  if (s < 2 || s > kMaxDerivativeOrder) fail(ErrorCode::UnsupportedOrder, "ts_monte_carlo needs 2 <= s <= 4");
  if (reps < 2) fail(ErrorCode::InvalidArgument, "need at least 2 replicates");
  if (gen1.p != gen2.p) fail(ErrorCode::DimensionMismatch, "generators have different dimensions");

  const ReducedSummary summary = TheoryInput::from_models(gen1, gen2).reduce();
  const TauParams t = tau_params(summary);
  const long p = summary.p;
  const double dp = static_cast<double>(p);
  const double c = scale_of(kernel, p);
  const double norm = factorial(s) * std::pow(dp, s);
  const double w1 = ft(kernel, s, t.tau1, c) / norm;
  const double w2 = ft(kernel, s, t.tau2, c) / norm;
  const double w3 = ft(kernel, s, t.tau3, c) / norm;
  const double c1 = dp * t.tau1;
  const double c2 = dp * t.tau2;
  const double c3 = dp * t.tau3;

  const ModelSampler sx(gen1);
  const ModelSampler sy(gen2);
  const long chunks = (reps + kOracleChunk - 1) / kOracleChunk;
  std::vector<double> sums(static_cast<std::size_t>(chunks), 0.0);
  std::vector<double> sq(static_cast<std::size_t>(chunks), 0.0);

  parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t ci) {
    const long count = std::min(kOracleChunk, reps - static_cast<long>(ci) * kOracleChunk);
    Rng rx(seed, static_cast<std::uint64_t>(s), ci, StreamRole::X);
    Rng ry(seed, static_cast<std::uint64_t>(s), ci, StreamRole::Y);
    const SampleMatrix x = sx.draw(2 * count, rx);
    const SampleMatrix y = sy.draw(2 * count, ry);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (long r = 0; r < count; ++r) {
      const auto x1 = x.row(2 * r);
      const auto x2 = x.row(2 * r + 1);
      const auto y1 = y.row(2 * r);
      const auto y2 = y.row(2 * r + 1);
      const double dxx = (x1 - x2).squaredNorm() - c1;
      const double dyy = (y1 - y2).squaredNorm() - c2;
      const double dxy = (x1 - y1).squaredNorm() - c3;
      const double v = w1 * std::pow(dxx, s) + w2 * std::pow(dyy, s) - 2.0 * w3 * std::pow(dxy, s);
      sum += v;
      sum_sq += v * v;
    }
    sums[ci] = sum;
    sq[ci] = sum_sq;
  });

  double total = 0.0;
  double total_sq = 0.0;
  for (long ci = 0; ci < chunks; ++ci) {
    total += sums[ci];
    total_sq += sq[ci];
  }
  const double r = static_cast<double>(reps);
  const double mean = total / r;
  const double var = std::max(0.0, (total_sq - r * mean * mean) / (r - 1.0));
  return {mean, std::sqrt(var / r)};
}

MonteCarloEstimate t1_general(const ModelSpec& gen1, const ModelSpec& gen2, const KernelSpec& kernel, long reps,
                              std::uint64_t seed, int threads) {
  return ts_monte_carlo(2, gen1, gen2, kernel, reps, seed, threads);
}

VarianceComponents var_delta1_components(const ReducedSummary& s, const KernelSpec& kernel, long n, long m) {
  if (n < 2 || m < 2) fail(ErrorCode::TooFewSamples, "variance components need n, m >= 2");
  const TauParams t = tau_params(s);
  const double a = need(s.tr1_sq, "tr1_sq");
  const double b = need(s.tr2_sq, "tr2_sq");
  const double c12 = need(s.tr12, "tr12");
  const double p = static_cast<double>(s.p);
  const double c = scale_of(kernel, s.p);
  const double d1 = ft(kernel, 1, t.tau1, c);
  const double d2 = ft(kernel, 1, t.tau2, c);
  const double d3 = ft(kernel, 1, t.tau3, c);
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);

  VarianceComponents v;
  v.v11 = 8.0 / (p * p) *
          (d1 * d1 * a / (dn * (dn - 1.0)) + d2 * d2 * b / (dm * (dm - 1.0)) + 2.0 * d3 * d3 * c12 / (dn * dm));
  if (s.delta_sq > 0.0) {
    v.v12 = 16.0 / (p * p) * d3 * d3 *
            (need(s.delta_s1_delta, "delta_s1_delta") / dn + need(s.delta_s2_delta, "delta_s2_delta") / dm);
  }
  // The Y part uses tr Sigma2^2 (var of V' Gamma2' Gamma2 V).
  v.v13 = 4.0 / (p * p) *
          ((d1 - d3) * (d1 - d3) / dn * (2.0 * a + s.kurtosis_term1) +
           (d2 - d3) * (d2 - d3) / dm * (2.0 * b + s.kurtosis_term2));
  return v;
}

double power_local(double delta0_value, double t1, double var_d1, double alpha) {
  return power_higher_order(delta0_value + t1, var_d1, alpha);
}

double power_higher_order(double mmd_pop, double var_d1, double alpha) {
  if (!(var_d1 > 0.0)) fail(ErrorCode::DomainError, "var(Delta_1) must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (mmd_pop == 0.0) return alpha;
  return normal_cdf(-normal_quantile(1.0 - alpha) + mmd_pop / std::sqrt(var_d1));
}

double population_mmd_gaussian(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& sigma1, const Eigen::VectorXd& mu2,
                               const Eigen::MatrixXd& sigma2, double gamma) {
  if (!(gamma > 0.0)) fail(ErrorCode::InvalidArgument, "gamma must be > 0");
  const long p = mu1.size();
  if (mu2.size() != p || sigma1.rows() != p || sigma2.rows() != p || sigma1.cols() != p || sigma2.cols() != p) {
    fail(ErrorCode::DimensionMismatch, "population_mmd_gaussian inputs disagree on p");
  }
  check_psd(sigma1, "sigma1");
  check_psd(sigma2, "sigma2");
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p);
  const double kxx = gaussian_kernel_expectation(2.0 * sigma1, zero, gamma);
  const double kyy = gaussian_kernel_expectation(2.0 * sigma2, zero, gamma);
  const double kxy = gaussian_kernel_expectation(sigma1 + sigma2, mu1 - mu2, gamma);
  return kxx + kyy - 2.0 * kxy;
}

MonteCarloEstimate population_mmd_monte_carlo(const ModelSpec& gen1, const ModelSpec& gen2, const KernelSpec& kernel,
                                              long draws, std::uint64_t seed, int threads, long block) {
  if (block < 2) fail(ErrorCode::InvalidArgument, "block size must be >= 2");
  const long blocks = draws / block;
  if (blocks < 2) fail(ErrorCode::InvalidArgument, "need at least two blocks of draws");
  if (gen1.p != gen2.p) fail(ErrorCode::DimensionMismatch, "generators have different dimensions");
  kernel.validate();

  const ModelSampler sx(gen1);
  const ModelSampler sy(gen2);
  std::vector<double> values(static_cast<std::size_t>(blocks), 0.0);
  parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t b) {
    Rng rx(seed, 0, b, StreamRole::X);
    Rng ry(seed, 0, b, StreamRole::Y);
    const SampleMatrix x = sx.draw(block, rx);
    const SampleMatrix y = sy.draw(block, ry);
    values[b] = mmd_unbiased(x, y, kernel);
  });

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(blocks);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(blocks - 1);
  return {mean, std::sqrt(var / static_cast<double>(blocks))};
}

double h1(const KernelSpec& kernel, double tau) {
  if (!(tau > 0.0)) fail(ErrorCode::DomainError, "h1 needs tau > 0");
  return f_deriv(kernel, 2, tau) / std::fabs(f_deriv(kernel, 1, tau));
}

double h2(const KernelSpec& kernel, double gamma, double tr_sigma1) {
  if (!(gamma > 0.0) || !(tr_sigma1 > 0.0)) fail(ErrorCode::DomainError, "h2 needs gamma > 0 and tr Sigma1 > 0");
  const double x = 2.0 * tr_sigma1 / gamma;
  return f_deriv(kernel, 2, x) / (std::fabs(f_deriv(kernel, 1, x)) * gamma);
}

double h2_closed_form(const KernelSpec& kernel, double gamma, double tr_sigma1) {
  if (!(gamma > 0.0) || !(tr_sigma1 > 0.0)) fail(ErrorCode::DomainError, "h2 needs gamma > 0 and tr Sigma1 > 0");
  const double big_c = 2.0 * tr_sigma1;
  switch (kernel.family) {
    case KernelFamily::Gaussian: return 1.0 / gamma;
    case KernelFamily::Laplace: return 0.5 * (1.0 / std::sqrt(big_c * gamma) + 1.0 / big_c);
    case KernelFamily::RationalQuadratic: return (kernel.rq_alpha + 1.0) / (gamma + big_c);
    case KernelFamily::Energy: return 1.0 / (2.0 * big_c);
  }
  fail(ErrorCode::InvalidArgument, "unknown kernel family");
}

PowerPrediction predict_power(const ReducedSummary& s, const KernelSpec& kernel, long n, long m, double alpha,
                              bool include_v12_v13) {
  PowerPrediction out;
  out.regime = PowerRegime::LocalS1;
  out.delta0 = delta0(s, kernel);
  out.t1 = t1_closed_form(s, kernel);
  out.components = var_delta1_components(s, kernel, n, m);
  out.var_delta1 = include_v12_v13 ? out.components.total() : out.components.v11;
  out.signal = out.delta0 + out.t1;
  out.predicted_power = power_local(out.delta0, out.t1, out.var_delta1, alpha);
  out.power_lower = out.predicted_power;
  out.power_upper = out.predicted_power;
  return out;
}

PowerPrediction predict_power(const ModelSpec& gen1, const ModelSpec& gen2, const KernelSpec& kernel, long n, long m,
                              double alpha, const PowerOptions& options) {
  const TheoryInput ti = TheoryInput::from_models(gen1, gen2);
  const ReducedSummary s = ti.reduce();
  const double scale = std::max(1.0, std::max(s.tr1, s.tr2));
  const bool first_two_differ = s.delta_sq > 1e-12 * scale || *s.frob_diff_sq > 1e-12 * scale * scale;

  PowerPrediction out;
  out.components = var_delta1_components(s, kernel, n, m);
  out.var_delta1 = options.include_v12_v13 ? out.components.total() : out.components.v11;
  double signal_se = 0.0;

  if (first_two_differ) {
    out.regime = PowerRegime::LocalS1;
    out.delta0 = delta0(s, kernel);
    if (s.gaussian || s.delta_sq == 0.0) {
      out.t1 = t1_closed_form(s, kernel);
    } else {
      const MonteCarloEstimate est =
          options.t1_estimate ? *options.t1_estimate
                              : t1_general(gen1, gen2, kernel, options.t1_reps, options.seed, options.threads);
      out.t1 = est.estimate;
      out.t1_std_error = est.std_error;
    }
    out.signal = out.delta0 + out.t1;
    signal_se = out.t1_std_error;
  } else {
    out.regime = PowerRegime::HigherOrderS2;
    const MonteCarloEstimate est =
        options.population_mmd ? *options.population_mmd
                               : population_mmd_monte_carlo(gen1, gen2, kernel, options.mmd_draws, options.seed,
                                                            options.threads, options.mmd_block);
    out.mmd_pop = est.estimate;
    out.mmd_pop_std_error = est.std_error;
    out.signal = out.mmd_pop;
    signal_se = est.std_error;
  }
  out.predicted_power = power_higher_order(out.signal, out.var_delta1, alpha);
  out.power_lower = power_higher_order(out.signal - 3.0 * signal_se, out.var_delta1, alpha);
  out.power_upper = power_higher_order(out.signal + 3.0 * signal_se, out.var_delta1, alpha);
  return out;
}

}  // namespace hdmmd
