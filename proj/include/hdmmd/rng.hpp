#pragma once

#include <cstdint>
#include <random>

namespace hdmmd {

// Which draw inside a replicate a stream feeds. Distinct roles give
// independent streams for X and Y from the same (seed, grid, replicate).
enum class StreamRole : std::uint32_t { X = 1, Y = 2, Oracle = 3, Aux = 4 };

// Repo-wide generator: std::mt19937_64 (fully specified by the C++ standard,
// so streams are identical across platforms) seeded through std::seed_seq.
// All variate transforms below are written out here rather than taken from
// <random> distributions, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  // Substream for (seed, grid point, replicate, role).
  Rng(std::uint64_t seed, std::uint64_t grid, std::uint64_t replicate, StreamRole role);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double normal();  // Box-Muller, caches the second variate
  double exponential();  // rate 1
  long poisson(double lambda);  // inversion; DomainError unless 0 < lambda <= 500
  double rademacher();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hdmmd
