#include "hdmmd/datagen.hpp"

#include "hdmmd/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace hdmmd {

namespace {

constexpr double kPsdTolerance = 1e-8;

void require_psd(const Eigen::MatrixXd& sigma, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kPsdTolerance) {
    fail(ErrorCode::NotPositiveSemiDefinite, std::string(what) + " has a negative eigenvalue");
  }
}

}  // namespace

double EntrySpec::entry_mean() const {
  switch (dist) {
    case EntryDist::ShiftedNormal: return mean;
    case EntryDist::Poisson: return lambda;
    default: return 0.0;
  }
}

double EntrySpec::entry_variance() const {
  switch (dist) {
    case EntryDist::ShiftedNormal: return variance;
    case EntryDist::Poisson: return lambda;
    default: return 1.0;
  }
}

double EntrySpec::excess_kurtosis() const {
  switch (dist) {
    case EntryDist::StdNormal:
    case EntryDist::ShiftedNormal: return 0.0;
    case EntryDist::CenteredPoisson:
    case EntryDist::Poisson: return 1.0 / lambda;
    case EntryDist::CenteredExponential: return 6.0;
    case EntryDist::Rademacher: return -2.0;
  }
  return 0.0;
}

std::string entry_dist_name(EntryDist dist) {
  switch (dist) {
    case EntryDist::StdNormal: return "std_normal";
    case EntryDist::CenteredPoisson: return "centered_poisson";
    case EntryDist::CenteredExponential: return "centered_exponential";
    case EntryDist::Rademacher: return "rademacher";
    case EntryDist::ShiftedNormal: return "shifted_normal";
    case EntryDist::Poisson: return "poisson";
  }
  return "unknown";
}

void ModelSpec::validate() const {
  if (p < 1) fail(ErrorCode::InvalidArgument, "model dimension p must be >= 1");
  if (entry.dist == EntryDist::ShiftedNormal && !(entry.variance > 0.0)) {
    fail(ErrorCode::InvalidArgument, "shifted_normal variance must be > 0");
  }
  if ((entry.dist == EntryDist::Poisson || entry.dist == EntryDist::CenteredPoisson) &&
      !(entry.lambda > 0.0 && entry.lambda <= 500.0)) {
    fail(ErrorCode::InvalidArgument, "poisson lambda must lie in (0, 500]");
  }
  switch (covariance.kind) {
    case CovarianceKind::Identity: break;
    case CovarianceKind::AR1:
      if (!(std::fabs(covariance.rho) < 1.0)) fail(ErrorCode::InvalidArgument, "ar1 rho must satisfy |rho| < 1");
      break;
    case CovarianceKind::Banded:
      if (!(covariance.diag > 0.0)) fail(ErrorCode::InvalidArgument, "banded diag must be > 0");
      break;
    case CovarianceKind::Explicit:
      if (covariance.matrix.rows() != p || covariance.matrix.cols() != p) {
        fail(ErrorCode::InvalidArgument, "explicit covariance must be p x p");
      }
      if (!covariance.matrix.isApprox(covariance.matrix.transpose(), 1e-12)) {
        fail(ErrorCode::InvalidArgument, "explicit covariance must be symmetric");
      }
      break;
  }
  if (mean.kind == MeanKind::Vector && mean.vector.size() != p) {
    fail(ErrorCode::InvalidArgument, "mean vector length must equal p");
  }
  if (mean.kind == MeanKind::UniformNormSq && !(mean.value >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "uniform_norm_sq must be >= 0");
  }
}

ModelSpec ModelSpec::with_dimension(long new_p) const {
  ModelSpec out = *this;
  if (new_p == p) return out;
  if (covariance.kind == CovarianceKind::Explicit) {
    fail(ErrorCode::ConfigError, "explicit covariance fixes p; it cannot be used on a grid with other dimensions");
  }
  if (mean.kind == MeanKind::Vector) {
    fail(ErrorCode::ConfigError, "explicit mean vector fixes p; it cannot be used on a grid with other dimensions");
  }
  out.p = new_p;
  return out;
}

Eigen::VectorXd ModelSpec::mean_vector() const {
  switch (mean.kind) {
    case MeanKind::Zero: return Eigen::VectorXd::Zero(p);
    case MeanKind::Constant: return Eigen::VectorXd::Constant(p, mean.value);
    case MeanKind::UniformNormSq: return Eigen::VectorXd::Constant(p, std::sqrt(mean.value / static_cast<double>(p)));
    case MeanKind::Vector: return mean.vector;
  }
  return Eigen::VectorXd::Zero(p);
}

Eigen::MatrixXd covariance_matrix(const ModelSpec& spec) {
  spec.validate();
  if (spec.transform != Transform::LinearMap) {
    fail(ErrorCode::InvalidArgument, "covariance structure applies to the linear-map model only");
  }
  const long p = spec.p;
  const CovarianceSpec& c = spec.covariance;
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(p, p);
  switch (c.kind) {
    case CovarianceKind::Identity: break;
    case CovarianceKind::AR1:
      for (long i = 0; i < p; ++i) {
        for (long j = 0; j < p; ++j) sigma(i, j) = std::pow(c.rho, static_cast<double>(std::labs(i - j)));
      }
      break;
    case CovarianceKind::Banded: {
      const long width = static_cast<long>(c.band_values.size());
      for (long i = 0; i < p; ++i) {
        sigma(i, i) = c.diag;
        for (long d = 1; d <= width && i + d < p; ++d) {
          sigma(i, i + d) = c.band_values[d - 1];
          sigma(i + d, i) = c.band_values[d - 1];
        }
      }
      require_psd(sigma, "banded covariance");
      break;
    }
    case CovarianceKind::Explicit:
      sigma = c.matrix;
      require_psd(sigma, "explicit covariance");
      break;
  }
  return sigma;
}

Eigen::MatrixXd factor_root(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) fail(ErrorCode::DimensionMismatch, "covariance must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  const Eigen::VectorXd& values = eig.eigenvalues();
  if (values.minCoeff() < -kPsdTolerance) {
    fail(ErrorCode::NotPositiveSemiDefinite, "covariance has a negative eigenvalue");
  }
  const Eigen::VectorXd roots = values.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

PopulationMoments population_moments(const ModelSpec& spec) {
  spec.validate();
  if (spec.transform != Transform::LinearMap) {
    fail(ErrorCode::MissingSummary, "population moments are only tabulated for the linear-map model");
  }
  const Eigen::MatrixXd sigma = covariance_matrix(spec);
  const Eigen::MatrixXd gamma = factor_root(sigma);
  const double m_e = spec.entry.entry_mean();
  const double v_e = spec.entry.entry_variance();

  PopulationMoments pm;
  pm.mean = spec.mean_vector() + m_e * gamma.rowwise().sum();
  pm.sigma = v_e * sigma;
  pm.gram_diag = v_e * gamma.colwise().squaredNorm().transpose();
  pm.excess_kurtosis = spec.entry.excess_kurtosis();
  pm.gaussian = spec.entry.is_gaussian();
  return pm;
}

ModelSampler::ModelSampler(const ModelSpec& spec) : spec_(spec) {
  spec_.validate();
  if (spec_.transform != Transform::LinearMap) return;
  mean_ = spec_.mean_vector();
  const auto kind = spec_.covariance.kind;
  if (kind == CovarianceKind::Identity || kind == CovarianceKind::AR1) return;

  gamma_ = factor_root(covariance_matrix(spec_));
  const long p = spec_.p;
  bool lower = true;
  for (long i = 0; i < p && lower; ++i) {
    for (long j = i + 1; j < p; ++j) {
      if (gamma_(i, j) != 0.0) {
        lower = false;
        break;
      }
    }
  }
  if (!lower) {
    bandwidth_ = p;  // dense factor: general product
    return;
  }
  bandwidth_ = 0;
  for (long i = 0; i < p; ++i) {
    for (long j = 0; j < i - bandwidth_; ++j) {
      if (gamma_(i, j) != 0.0) {
        bandwidth_ = i - j;
        break;
      }
    }
  }
}

void ModelSampler::fill_entries(RowMatrix& u, Rng& rng) const {
  const EntrySpec& e = spec_.entry;
  double* data = u.data();
  const long total = u.size();
  switch (e.dist) {
    case EntryDist::StdNormal:
      for (long t = 0; t < total; ++t) data[t] = rng.normal();
      break;
    case EntryDist::ShiftedNormal: {
      const double sd = std::sqrt(e.variance);
      for (long t = 0; t < total; ++t) data[t] = e.mean + sd * rng.normal();
      break;
    }
    case EntryDist::CenteredPoisson: {
      const double sd = std::sqrt(e.lambda);
      for (long t = 0; t < total; ++t) data[t] = (static_cast<double>(rng.poisson(e.lambda)) - e.lambda) / sd;
      break;
    }
    case EntryDist::Poisson:
      for (long t = 0; t < total; ++t) data[t] = static_cast<double>(rng.poisson(e.lambda));
      break;
    case EntryDist::CenteredExponential:
      for (long t = 0; t < total; ++t) data[t] = rng.exponential() - 1.0;
      break;
    case EntryDist::Rademacher:
      for (long t = 0; t < total; ++t) data[t] = rng.rademacher();
      break;
  }
}

SampleMatrix ModelSampler::draw(long n, Rng& rng) const {
  if (n < 1) fail(ErrorCode::InvalidArgument, "sample size must be >= 1");
  const long p = spec_.p;
  RowMatrix out(n, p);

  if (spec_.transform == Transform::DirichletScaled) {
    for (long i = 0; i < n; ++i) {
      double total = 0.0;
      for (long k = 0; k < p; ++k) {
        out(i, k) = rng.exponential();
        total += out(i, k);
      }
      out.row(i) *= static_cast<double>(p) / total;
    }
    return SampleMatrix(std::move(out));
  }
  if (spec_.transform == Transform::SphereUniform) {
    for (long i = 0; i < n; ++i) {
      for (long k = 0; k < p; ++k) out(i, k) = rng.normal();
      out.row(i) *= std::sqrt(static_cast<double>(p)) / out.row(i).norm();
    }
    return SampleMatrix(std::move(out));
  }

  RowMatrix u(n, p);
  fill_entries(u, rng);
  switch (spec_.covariance.kind) {
    case CovarianceKind::Identity:
      out = std::move(u);
      break;
    case CovarianceKind::AR1: {
      // x_1 = u_1, x_k = rho x_{k-1} + sqrt(1 - rho^2) u_k: the Cholesky
      // factor of the AR(1) matrix applied in O(p).
      const double rho = spec_.covariance.rho;
      const double s = std::sqrt(1.0 - rho * rho);
      for (long i = 0; i < n; ++i) {
        out(i, 0) = u(i, 0);
        for (long k = 1; k < p; ++k) out(i, k) = rho * out(i, k - 1) + s * u(i, k);
      }
      break;
    }
    default:
      if (bandwidth_ * 4 < p) {
        for (long i = 0; i < n; ++i) {
          for (long k = 0; k < p; ++k) {
            double acc = 0.0;
            for (long j = std::max(0L, k - bandwidth_); j <= k; ++j) acc += gamma_(k, j) * u(i, j);
            out(i, k) = acc;
          }
        }
      } else {
        out.noalias() = u * gamma_.transpose();
      }
      break;
  }
  out.rowwise() += mean_.transpose();
  return SampleMatrix(std::move(out));
}

SampleMatrix sample(const ModelSpec& spec, long n, std::uint64_t seed) {
  Rng rng(seed);
  return ModelSampler(spec).draw(n, rng);
}

}  // namespace hdmmd
