#include "hdmmd/normal.hpp"

#include "hdmmd/error.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>

namespace hdmmd {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) fail(ErrorCode::DomainError, "normal quantile needs 0 < q < 1");
  if (q == 0.5) return 0.0;
  // erfc_inv of the smaller tail keeps relative accuracy for q near 0 and 1.
  if (q < 0.5) return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * (1.0 - q));
}

}  // namespace hdmmd
