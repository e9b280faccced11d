#pragma once

#include "hdmmd/kernels.hpp"
#include "hdmmd/sample_matrix.hpp"

#include <functional>
#include <string>

namespace hdmmd {

// Plug-in estimates of tau_1 = 2 tr(S1)/p, tau_2 = 2 tr(S2)/p and
// tau_3 = (tr S1 + tr S2 + |mu1 - mu2|^2)/p built from leave-one-out means.
struct TauHats {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double tau3 = 0.0;
};

// Leave-out trace estimators of tr(S1^2), tr(S2^2) and tr(S1 S2). Unbiased,
// hence occasionally negative at small n; consumers floor them at zero.
struct TraceHats {
  double tr_sigma1_sq = 0.0;
  double tr_sigma2_sq = 0.0;
  double tr_sigma1_sigma2 = 0.0;
};

struct TestResult {
  double mmd_stat = 0.0;
  double var_hat = 0.0;
  double z_score = 0.0;  // -inf when var_hat == 0 and mmd_stat <= 0
  double p_value = 1.0;  // one-sided, 1 - Phi(z)
  bool reject = false;
  double alpha = 0.05;
  TauHats tau_hats;
  TraceHats trace_hats;
  // Context carried along for serialization.
  std::string kernel;
  double bandwidth = 0.0;
  long n = 0;
  long m = 0;
  long p = 0;
};

// Entry (i, j) = |a_i - b_j|^2 via |a_i|^2 + |b_j|^2 - 2 a_i.b_j with tiled
// inner products; round-off negatives clamped to 0. DimensionMismatch if the
// column counts differ.
RowMatrix squared_distance_block(const SampleMatrix& a, const SampleMatrix& b, int threads = 1);

// Unbiased two-sample U-statistic
//   1/(n(n-1)) sum_{i!=i'} k(X_i, X_i') + 1/(m(m-1)) sum_{j!=j'} k(Y_j, Y_j')
//     - 2/(nm) sum_{i,j} k(X_i, Y_j).
// TooFewSamples unless n, m >= 2. The result is exactly symmetric in (X, Y)
// and does not depend on `threads`.
double mmd_unbiased(const SampleMatrix& x, const SampleMatrix& y, const KernelSpec& kernel, int threads = 1);

// Same statistic for an arbitrary isotropic function of the squared distance,
// k(x, y) = k_of_sqdist(|x - y|^2).
double mmd_unbiased(const SampleMatrix& x, const SampleMatrix& y,
                    const std::function<double(double)>& k_of_sqdist, int threads = 1);

TauHats tau_hats(const SampleMatrix& x, const SampleMatrix& y);
TraceHats trace_estimators(const SampleMatrix& x, const SampleMatrix& y);

// (8/p^2) [ f'(t1)^2 T1/(n(n-1)) + f'(t2)^2 T2/(m(m-1)) + 2 f'(t3)^2 T12/(nm) ]
// with the trace estimates floored at 0 and f' taken for the kernel's
// bandwidth (see scaled_f_deriv). DegenerateVariance when the result is 0.
double variance_estimate(const SampleMatrix& x, const SampleMatrix& y, const KernelSpec& kernel);

// Studentized one-sided test: reject when mmd / sqrt(var_hat) > z_{1-alpha}.
// A zero variance estimate with mmd <= 0 yields reject = false, p = 1; with
// mmd > 0 the z-score is undefined and DegenerateVariance is thrown.
TestResult two_sample_test(const SampleMatrix& x, const SampleMatrix& y, const KernelSpec& kernel, double alpha);

// Gram matrix of the pooled sample [X; Y], computed once and shared by every
// quantity the test needs. Replicate engines build one per (X, Y) draw and
// evaluate several kernels against it.
class PooledGram {
 public:
  PooledGram(const SampleMatrix& x, const SampleMatrix& y, int threads = 1);

  long n() const noexcept { return n_; }
  long m() const noexcept { return m_; }
  long p() const noexcept { return p_; }

  // Pooled indices: [0, n) are X rows, [n, n + m) are Y rows.
  double sqdist(long i, long j) const;

  double mmd(const KernelSpec& kernel) const;
  double mmd(const std::function<double(double)>& k_of_sqdist) const;

  TauHats tau_hats() const;
  TraceHats trace_hats() const;  // TooFewSamples unless n, m >= 4
  double variance(const KernelSpec& kernel) const;
  TestResult test(const KernelSpec& kernel, double alpha) const;

  // Median of pooled squared distances over pairs i < j.
  double median_sqdist() const;

 private:
  template <class F>
  double mmd_impl(F&& k_of_sqdist) const;

  long n_ = 0;
  long m_ = 0;
  long p_ = 0;
  int threads_ = 1;
  RowMatrix gram_;
};

}  // namespace hdmmd
