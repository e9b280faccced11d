#pragma once

namespace hdmmd {

// Standard normal CDF, via erfc so both tails keep full relative accuracy.
double normal_cdf(double x);

// 1 - normal_cdf(x) without cancellation.
double normal_upper_tail(double x);

double normal_pdf(double x);

// Inverse CDF via the inverse complementary error function of the smaller tail.
// DomainError unless 0 < q < 1.
double normal_quantile(double q);

}  // namespace hdmmd
