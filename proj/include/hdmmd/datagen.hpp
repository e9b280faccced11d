#pragma once

#include "hdmmd/rng.hpp"
#include "hdmmd/sample_matrix.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hdmmd {

// Entry distributions for U in X = Gamma U + mu. The first four are
// standardized (mean 0, variance 1); ShiftedNormal and Poisson are raw, which
// shifts the population mean by Gamma 1 * E[U] and scales the covariance.
enum class EntryDist { StdNormal, CenteredPoisson, CenteredExponential, Rademacher, ShiftedNormal, Poisson };

struct EntrySpec {
  EntryDist dist = EntryDist::StdNormal;
  double mean = 0.0;      // ShiftedNormal
  double variance = 1.0;  // ShiftedNormal
  double lambda = 1.0;    // CenteredPoisson, Poisson

  double entry_mean() const;
  double entry_variance() const;
  // E[Z^4] - 3 for the standardized entry Z = (U - E U) / sd(U).
  double excess_kurtosis() const;
  bool is_gaussian() const noexcept {
    return dist == EntryDist::StdNormal || dist == EntryDist::ShiftedNormal;
  }
};

enum class CovarianceKind { Identity, AR1, Banded, Explicit };

struct CovarianceSpec {
  CovarianceKind kind = CovarianceKind::Identity;
  double rho = 0.0;                  // AR1: sigma_ij = rho^|i-j|
  double diag = 1.0;                 // Banded: sigma_ii
  std::vector<double> band_values;   // Banded: sigma_ij = band_values[|i-j| - 1] for 1 <= |i-j| <= width
  Eigen::MatrixXd matrix;            // Explicit
};

enum class MeanKind { Zero, Constant, UniformNormSq, Vector };

struct MeanSpec {
  MeanKind kind = MeanKind::Zero;
  double value = 0.0;  // Constant: every coordinate; UniformNormSq: |mu|^2 spread evenly
  Eigen::VectorXd vector;
};

enum class Transform { LinearMap, DirichletScaled, SphereUniform };

struct ModelSpec {
  long p = 1;
  EntrySpec entry;
  CovarianceSpec covariance;
  MeanSpec mean;
  Transform transform = Transform::LinearMap;

  // InvalidArgument on inconsistent fields (p < 1, |rho| >= 1, explicit
  // shapes that disagree with p, ...).
  void validate() const;

  // Copy with a different dimension. ConfigError if an explicit mean or
  // covariance pins the dimension to something else.
  ModelSpec with_dimension(long new_p) const;

  Eigen::VectorXd mean_vector() const;
};

// Sigma for the covariance structure (before entry-variance scaling).
// NotPositiveSemiDefinite if a banded or explicit matrix has an eigenvalue
// below -1e-8. InvalidArgument for non-linear transforms.
Eigen::MatrixXd covariance_matrix(const ModelSpec& spec);

// Lower-triangular Cholesky factor when Sigma is positive definite, otherwise
// the symmetric eigen square root. NotPositiveSemiDefinite below -1e-8.
Eigen::MatrixXd factor_root(const Eigen::MatrixXd& sigma);

// Population moments of a LinearMap model, as seen by the theory layer.
struct PopulationMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd sigma;       // covariance of X
  Eigen::VectorXd gram_diag;   // diag(Gamma' Gamma) for the Gamma the sampler uses, variance folded in
  double excess_kurtosis = 0.0;
  bool gaussian = true;
};
PopulationMoments population_moments(const ModelSpec& spec);

// Precomputes the factor once; draw() can then be called for many replicates
// and from several threads.
class ModelSampler {
 public:
  explicit ModelSampler(const ModelSpec& spec);

  const ModelSpec& spec() const noexcept { return spec_; }
  SampleMatrix draw(long n, Rng& rng) const;

 private:
  void fill_entries(RowMatrix& u, Rng& rng) const;

  ModelSpec spec_;
  Eigen::VectorXd mean_;
  RowMatrix gamma_;   // lower triangular, unused for Identity / AR1
  long bandwidth_ = 0;  // nonzero sub-diagonals of gamma_
};

SampleMatrix sample(const ModelSpec& spec, long n, std::uint64_t seed);

std::string entry_dist_name(EntryDist dist);

}  // namespace hdmmd
