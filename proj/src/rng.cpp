#include "hdmmd/rng.hpp"

#include "hdmmd/error.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace hdmmd {

namespace {

std::mt19937_64 seeded(std::initializer_list<std::uint64_t> words) {
  std::vector<std::uint32_t> parts;
  for (std::uint64_t w : words) {
    parts.push_back(static_cast<std::uint32_t>(w & 0xffffffffu));
    parts.push_back(static_cast<std::uint32_t>(w >> 32));
  }
  std::seed_seq seq(parts.begin(), parts.end());
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seeded({seed})) {}

Rng::Rng(std::uint64_t seed, std::uint64_t grid, std::uint64_t replicate, StreamRole role)
    : engine_(seeded({seed, grid, replicate, static_cast<std::uint64_t>(role)})) {}

double Rng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Rng::exponential() { return -std::log(uniform()); }

long Rng::poisson(double lambda) {
  if (!(lambda > 0.0 && lambda <= 500.0)) fail(ErrorCode::DomainError, "poisson rate must lie in (0, 500]");
  // Sequential inversion of the CDF from k = 0.
  const double u = uniform();
  double prob = std::exp(-lambda);
  double cdf = prob;
  long k = 0;
  while (u > cdf) {
    ++k;
    prob *= lambda / static_cast<double>(k);
    const double next = cdf + prob;
    if (next == cdf) break;  // tail mass below double resolution
    cdf = next;
  }
  return k;
}

double Rng::rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

}  // namespace hdmmd
