#include "hdmmd/kernels.hpp"

#include "hdmmd/error.hpp"
#include "hdmmd/parse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace hdmmd {

KernelSpec KernelSpec::gaussian(double bandwidth) {
  return {KernelFamily::Gaussian, bandwidth, 1.0};
}
KernelSpec KernelSpec::laplace(double bandwidth) {
  return {KernelFamily::Laplace, bandwidth, 1.0};
}
KernelSpec KernelSpec::rational_quadratic(double alpha, double bandwidth) {
  return {KernelFamily::RationalQuadratic, bandwidth, alpha};
}
KernelSpec KernelSpec::energy(double bandwidth) {
  return {KernelFamily::Energy, bandwidth, 1.0};
}

void KernelSpec::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    fail(ErrorCode::InvalidArgument, "kernel bandwidth must be positive and finite");
  }
  if (family == KernelFamily::RationalQuadratic && !(rq_alpha > 0.0 && std::isfinite(rq_alpha))) {
    fail(ErrorCode::InvalidArgument, "rational quadratic alpha must be positive");
  }
}

KernelSpec KernelSpec::with_bandwidth(double gamma) const {
  KernelSpec k = *this;
  k.bandwidth = gamma;
  return k;
}

namespace {

// Falling factorial a (a - 1) ... (a - s + 1).
double falling(double a, int s) {
  double r = 1.0;
  for (int i = 0; i < s; ++i) r *= a - i;
  return r;
}

// f^(s) of exp(-sqrt(x)) written as exp(-sqrt(x)) * sum_j c_j x^(-j/2).
// Differentiating c x^(-j/2) e^(-u) gives -(j/2) c x^(-(j+2)/2) - (1/2) c x^(-(j+1)/2).
double laplace_deriv(int order, double x) {
  std::array<double, 2 * kMaxDerivativeOrder + 1> c{};
  c[0] = 1.0;
  for (int s = 0; s < order; ++s) {
    std::array<double, 2 * kMaxDerivativeOrder + 1> next{};
    for (int j = 0; j + 2 < static_cast<int>(c.size()); ++j) {
      if (c[j] == 0.0) continue;
      next[j + 2] += -0.5 * j * c[j];
      next[j + 1] += -0.5 * c[j];
    }
    c = next;
  }
  const double u = std::sqrt(x);
  double acc = 0.0;
  for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j) {
    if (c[j] != 0.0) acc += c[j] * std::pow(x, -0.5 * j);
  }
  return acc * std::exp(-u);
}

}  // namespace

double f_deriv(const KernelSpec& kernel, int order, double x) {
  if (order < 0) fail(ErrorCode::InvalidArgument, "derivative order must be non-negative");
  if (order > kMaxDerivativeOrder) {
    fail(ErrorCode::UnsupportedOrder, "derivative order " + std::to_string(order) + " exceeds 4");
  }
  if (!(x >= 0.0)) fail(ErrorCode::DomainError, "kernel argument must be non-negative");

  switch (kernel.family) {
    case KernelFamily::Gaussian:
      return (order % 2 == 0 ? 1.0 : -1.0) * std::exp(-x);
    case KernelFamily::Laplace:
      if (order == 0) return std::exp(-std::sqrt(x));
      if (x == 0.0) fail(ErrorCode::DomainError, "Laplace derivative is singular at 0");
      return laplace_deriv(order, x);
    case KernelFamily::RationalQuadratic:
      return falling(-kernel.rq_alpha, order) * std::pow(1.0 + x, -kernel.rq_alpha - order);
    case KernelFamily::Energy:
      if (order == 0) return -std::sqrt(x);
      if (x == 0.0) fail(ErrorCode::DomainError, "energy derivative is singular at 0");
      return -falling(0.5, order) * std::pow(x, 0.5 - order);
  }
  return 0.0;
}

double kernel_value(const KernelSpec& kernel, double sqdist) {
  const double x = sqdist / kernel.bandwidth;
  switch (kernel.family) {
    case KernelFamily::Gaussian: return std::exp(-x);
    case KernelFamily::Laplace: return std::exp(-std::sqrt(x));
    case KernelFamily::RationalQuadratic: return std::pow(1.0 + x, -kernel.rq_alpha);
    case KernelFamily::Energy: return -std::sqrt(x);
  }
  return 0.0;
}

double scaled_f_deriv(const KernelSpec& kernel, int order, double x, double scale) {
  return std::pow(scale, order) * f_deriv(kernel, order, scale * x);
}

void BandwidthPolicy::validate() const {
  if (mode == BandwidthMode::MedianHeuristic) return;
  if (!(value > 0.0) || !std::isfinite(value)) {
    fail(ErrorCode::InvalidArgument, mode == BandwidthMode::Fixed ? "fixed bandwidth must be positive"
                                                                  : "bandwidth scale c must be positive");
  }
}

double resolve_bandwidth(const BandwidthPolicy& policy, Eigen::Index p) {
  policy.validate();
  switch (policy.mode) {
    case BandwidthMode::Fixed: return policy.value;
    case BandwidthMode::ScaledDimension: return policy.value * static_cast<double>(p);
    case BandwidthMode::MedianHeuristic:
      fail(ErrorCode::InvalidArgument, "median heuristic needs data");
  }
  return 0.0;
}

double resolve_bandwidth(const BandwidthPolicy& policy, const SampleMatrix& x, const SampleMatrix& y) {
  if (!policy.needs_data()) {
    const Eigen::Index p = x.empty() ? y.cols() : x.cols();
    return resolve_bandwidth(policy, p);
  }
  if (!x.empty() && !y.empty() && x.cols() != y.cols()) {
    fail(ErrorCode::DimensionMismatch, "samples have different dimensions");
  }
  const Eigen::Index n = x.rows() + y.rows();
  if (n < 2) fail(ErrorCode::EmptyInput, "median heuristic needs at least two pooled rows");

  RowMatrix pooled(n, x.empty() ? y.cols() : x.cols());
  if (!x.empty()) pooled.topRows(x.rows()) = x.matrix();
  if (!y.empty()) pooled.bottomRows(y.rows()) = y.matrix();

  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d.push_back((pooled.row(i) - pooled.row(j)).squaredNorm());
    }
  }
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double median = d[mid];
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  if (!(median > 0.0)) {
    fail(ErrorCode::DegenerateBandwidth, "median pairwise squared distance is zero");
  }
  return median;
}

KernelSpec parse_kernel(std::string_view text) {
  if (text == "gaussian") return KernelSpec::gaussian(1.0);
  if (text == "laplace") return KernelSpec::laplace(1.0);
  if (text == "energy") return KernelSpec::energy(1.0);
  if (text.starts_with("rq:")) {
    const double alpha = parse_double(text.substr(3), "rq alpha");
    if (!(alpha > 0.0)) fail(ErrorCode::InvalidArgument, "rq alpha must be positive");
    return KernelSpec::rational_quadratic(alpha, 1.0);
  }
  fail(ErrorCode::InvalidArgument,
       "unknown kernel '" + std::string(text) + "' (expected gaussian|laplace|rq:<alpha>|energy)");
}

BandwidthPolicy parse_bandwidth(std::string_view text) {
  BandwidthPolicy policy;
  if (text == "median") {
    policy = BandwidthPolicy::median();
  } else if (text.starts_with("fixed:")) {
    policy = BandwidthPolicy::fixed(parse_double(text.substr(6), "fixed bandwidth"));
  } else if (text.starts_with("scaled:")) {
    policy = BandwidthPolicy::scaled(parse_double(text.substr(7), "bandwidth scale"));
  } else {
    fail(ErrorCode::InvalidArgument,
         "unknown bandwidth '" + std::string(text) + "' (expected fixed:<g>|scaled:<c>|median)");
  }
  policy.validate();
  return policy;
}

std::string kernel_name(const KernelSpec& kernel) {
  switch (kernel.family) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Laplace: return "laplace";
    case KernelFamily::RationalQuadratic: return "rq:" + format_number(kernel.rq_alpha);
    case KernelFamily::Energy: return "energy";
  }
  return "unknown";
}

std::string bandwidth_name(const BandwidthPolicy& policy) {
  switch (policy.mode) {
    case BandwidthMode::Fixed: return "fixed:" + format_number(policy.value);
    case BandwidthMode::ScaledDimension: return "scaled:" + format_number(policy.value);
    case BandwidthMode::MedianHeuristic: return "median";
  }
  return "unknown";
}

}  // namespace hdmmd
