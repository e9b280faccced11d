#pragma once

#include "hdmmd/sample_matrix.hpp"

#include <string>
#include <string_view>

namespace hdmmd {

enum class KernelFamily { Gaussian, Laplace, RationalQuadratic, Energy };

// Isotropic kernel k(x, y) = f(|x - y|^2 / bandwidth).
//
//   Gaussian           f(x) = exp(-x)
//   Laplace            f(x) = exp(-sqrt(x))
//   RationalQuadratic  f(x) = (1 + x)^(-alpha)
//   Energy             f(x) = -sqrt(x)   (energy distance up to scale; not p.d.)
//
// Every family is strictly decreasing and strictly convex on [0, inf).
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double bandwidth = 1.0;
  double rq_alpha = 1.0;  // only read for RationalQuadratic

  static KernelSpec gaussian(double bandwidth);
  static KernelSpec laplace(double bandwidth);
  static KernelSpec rational_quadratic(double alpha, double bandwidth);
  static KernelSpec energy(double bandwidth);

  // Throws InvalidArgument unless bandwidth > 0 (and alpha > 0 for RQ).
  void validate() const;

  KernelSpec with_bandwidth(double gamma) const;
};

inline constexpr int kMaxDerivativeOrder = 4;

// d^order f / dx^order at x, for the family's f (bandwidth not applied).
// DomainError for x < 0, or x == 0 where the derivative is singular
// (Laplace and Energy with order >= 1). UnsupportedOrder for order > 4.
double f_deriv(const KernelSpec& kernel, int order, double x);

// f(sqdist / bandwidth).
double kernel_value(const KernelSpec& kernel, double sqdist);

// Derivatives of x -> f(scale * x), i.e. scale^order * f^(order)(scale * x).
// The asymptotic formulas are written for a bandwidth equal to the dimension
// p; a kernel with bandwidth gamma is the same as the p-bandwidth kernel with
// f replaced by f(. * p / gamma), so the theory layer and the variance
// estimator evaluate derivatives through this.
double scaled_f_deriv(const KernelSpec& kernel, int order, double x, double scale);

enum class BandwidthMode { Fixed, ScaledDimension, MedianHeuristic };

struct BandwidthPolicy {
  BandwidthMode mode = BandwidthMode::ScaledDimension;
  double value = 2.0;  // gamma for Fixed, c for ScaledDimension (gamma = c * p)

  static BandwidthPolicy fixed(double gamma) { return {BandwidthMode::Fixed, gamma}; }
  static BandwidthPolicy scaled(double c) { return {BandwidthMode::ScaledDimension, c}; }
  static BandwidthPolicy median() { return {BandwidthMode::MedianHeuristic, 0.0}; }

  void validate() const;
  bool needs_data() const noexcept { return mode == BandwidthMode::MedianHeuristic; }
};

// Fixed -> gamma; ScaledDimension -> c * p; MedianHeuristic -> median of the
// squared distances over all pairs i < j of the pooled sample.
// EmptyInput if the pooled sample has fewer than two rows under the median
// heuristic, DegenerateBandwidth if that median is zero.
double resolve_bandwidth(const BandwidthPolicy& policy, const SampleMatrix& x, const SampleMatrix& y);

// Bandwidth for policies that do not look at the data.
double resolve_bandwidth(const BandwidthPolicy& policy, Eigen::Index p);

// "gaussian" | "laplace" | "rq:<alpha>" | "energy"; bandwidth left at 1.
KernelSpec parse_kernel(std::string_view text);
// "fixed:<g>" | "scaled:<c>" | "median"
BandwidthPolicy parse_bandwidth(std::string_view text);

std::string kernel_name(const KernelSpec& kernel);
std::string bandwidth_name(const BandwidthPolicy& policy);

}  // namespace hdmmd
