#include "hdmmd/datagen.hpp"
#include "hdmmd/error.hpp"
#include "test_util.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace hdmmd;
using Catch::Approx;

namespace {

ModelSpec ar1_model(long p, double rho) {
  ModelSpec m;
  m.p = p;
  m.covariance.kind = CovarianceKind::AR1;
  m.covariance.rho = rho;
  return m;
}

ModelSpec banded_model(long p, double diag, std::vector<double> band) {
  ModelSpec m;
  m.p = p;
  m.covariance.kind = CovarianceKind::Banded;
  m.covariance.diag = diag;
  m.covariance.band_values = std::move(band);
  return m;
}

Eigen::MatrixXd sample_cov(const SampleMatrix& x) {
  const Eigen::MatrixXd c = x.matrix().rowwise() - x.matrix().colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows() - 1);
}

}  // namespace

TEST_CASE("covariance structures", "[datagen]") {
  ModelSpec id;
  id.p = 3;
  CHECK(covariance_matrix(id) == Eigen::MatrixXd::Identity(3, 3));

  Eigen::MatrixXd ar(3, 3);
  ar << 1, .5, .25, .5, 1, .5, .25, .5, 1;
  CHECK(covariance_matrix(ar1_model(3, 0.5)).isApprox(ar, 1e-15));

  const Eigen::MatrixXd b = covariance_matrix(banded_model(5, 1.0, {0.25, 0.25}));
  for (long i = 0; i < 5; ++i)
    for (long j = 0; j < 5; ++j) {
      const long d = std::abs(i - j);
      CHECK(b(i, j) == (d == 0 ? 1.0 : d <= 2 ? 0.25 : 0.0));
    }

  try {
    covariance_matrix(banded_model(6, 1.0, {0.9, 0.9}));
    FAIL("expected NotPositiveSemiDefinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPositiveSemiDefinite);
  }
  CHECK_THROWS_AS(ar1_model(4, 1.0).validate(), Error);
}

TEST_CASE("factor_root", "[datagen]") {
  CHECK(factor_root(Eigen::MatrixXd::Identity(4, 4)) == Eigen::MatrixXd::Identity(4, 4));
  Eigen::MatrixXd d = Eigen::Vector2d(4, 9).asDiagonal();
  CHECK(factor_root(d).isApprox(Eigen::MatrixXd(Eigen::Vector2d(2, 3).asDiagonal()), 1e-15));

  const Eigen::MatrixXd s = covariance_matrix(ar1_model(10, 0.5));
  const Eigen::MatrixXd g = factor_root(s);
  CHECK((g * g.transpose() - s).cwiseAbs().maxCoeff() <= 1e-8);

  // Rank-deficient PSD input takes the eigen square root.
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
  const Eigen::MatrixXd r = factor_root(ones);
  CHECK((r * r.transpose() - ones).cwiseAbs().maxCoeff() <= 1e-8);

  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(factor_root(bad), Error);
}

TEST_CASE("standard normal identity model obeys the LLN", "[datagen]") {
  ModelSpec m;
  m.p = 5;
  const SampleMatrix x = sample(m, 10000, 1);
  const Eigen::RowVectorXd mean = x.matrix().colwise().mean();
  CHECK(mean.cwiseAbs().maxCoeff() < 4.0 / 100.0);
  CHECK((sample_cov(x) - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("sampler reproduces the model covariance", "[datagen]") {
  for (const ModelSpec& m : {ar1_model(8, 0.7), banded_model(8, 1.0, {0.25, 0.25})}) {
    const SampleMatrix x = sample(m, 40000, 2);
    CHECK((sample_cov(x) - covariance_matrix(m)).cwiseAbs().maxCoeff() < 0.05);
  }
  // Dense explicit covariance goes through the general product.
  ModelSpec e;
  e.p = 3;
  e.covariance.kind = CovarianceKind::Explicit;
  e.covariance.matrix.resize(3, 3);
  e.covariance.matrix << 2, 0.5, 0.3, 0.5, 1, 0.2, 0.3, 0.2, 1.5;
  CHECK((sample_cov(sample(e, 40000, 3)) - e.covariance.matrix).cwiseAbs().maxCoeff() < 0.06);
}

TEST_CASE("entry distributions have the tabulated moments", "[datagen]") {
  struct Case {
    EntryDist dist;
    double lambda;
    double third;  // third central moment of the standardized entry
  };
  const Case cases[] = {{EntryDist::StdNormal, 1.0, 0.0},
                        {EntryDist::CenteredPoisson, 4.0, 0.5},
                        {EntryDist::CenteredExponential, 1.0, 2.0},
                        {EntryDist::Rademacher, 1.0, 0.0}};
  for (const Case& c : cases) {
    ModelSpec m;
    m.p = 4;
    m.entry.dist = c.dist;
    m.entry.lambda = c.lambda;
    const SampleMatrix x = sample(m, 50000, 4);
    const Eigen::ArrayXXd a = x.matrix().array();
    INFO(entry_dist_name(c.dist));
    CHECK(std::fabs(a.mean()) < 0.02);
    CHECK(std::fabs(a.square().mean() - 1.0) < 0.03);
    CHECK(std::fabs(a.cube().mean() - c.third) < 0.12);
    CHECK(std::fabs(a.pow(4).mean() - 3.0 - m.entry.excess_kurtosis()) < 1.5);
  }

  // Raw entries shift the mean and scale the covariance.
  ModelSpec pois;
  pois.p = 3;
  pois.entry.dist = EntryDist::Poisson;
  pois.entry.lambda = 1.0;
  const PopulationMoments pm = population_moments(pois);
  CHECK(pm.mean.isApprox(Eigen::VectorXd::Ones(3)));
  CHECK_FALSE(pm.gaussian);
  CHECK(pm.excess_kurtosis == 1.0);
  const SampleMatrix x = sample(pois, 50000, 5);
  CHECK((x.matrix().colwise().mean().transpose() - pm.mean).cwiseAbs().maxCoeff() < 0.02);

  ModelSpec sn;
  sn.p = 3;
  sn.entry.dist = EntryDist::ShiftedNormal;
  sn.entry.mean = 1.0;
  sn.entry.variance = 2.0;
  sn.covariance = ar1_model(3, 0.5).covariance;
  const PopulationMoments ps = population_moments(sn);
  CHECK(ps.sigma.isApprox(2.0 * covariance_matrix(sn)));
  CHECK((sample_cov(sample(sn, 50000, 6)) - ps.sigma).cwiseAbs().maxCoeff() < 0.06);
}

TEST_CASE("trace of the sample covariance matches the model", "[datagen]") {
  const ModelSpec m = ar1_model(200, 0.5);
  const SampleMatrix x = sample(m, 400, 7);
  CHECK(sample_cov(x).trace() / 200.0 == Approx(1.0).epsilon(0.05));
}

TEST_CASE("mean specifications", "[datagen]") {
  ModelSpec m;
  m.p = 4;
  m.mean.kind = MeanKind::UniformNormSq;
  m.mean.value = 2.0;
  CHECK(m.mean_vector().squaredNorm() == Approx(2.0));
  CHECK(m.mean_vector().minCoeff() == m.mean_vector().maxCoeff());
  m.mean.kind = MeanKind::Constant;
  m.mean.value = 0.5;
  CHECK(m.mean_vector() == Eigen::VectorXd::Constant(4, 0.5));
  m.mean.kind = MeanKind::Vector;
  m.mean.vector = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(m.validate(), Error);
  CHECK_THROWS_AS(m.with_dimension(8), Error);
  ModelSpec a = ar1_model(4, 0.3);
  CHECK(a.with_dimension(9).p == 9);
}

TEST_CASE("nonlinear transforms", "[datagen]") {
  ModelSpec d;
  d.p = 50;
  d.transform = Transform::DirichletScaled;
  const SampleMatrix x = sample(d, 200, 8);
  for (long i = 0; i < x.rows(); ++i) {
    CHECK(std::fabs(x.row(i).sum() - 50.0) <= 1e-9);
    CHECK(x.row(i).minCoeff() > 0.0);
  }
  ModelSpec s;
  s.p = 50;
  s.transform = Transform::SphereUniform;
  const SampleMatrix y = sample(s, 200, 9);
  for (long i = 0; i < y.rows(); ++i) CHECK(std::fabs(y.row(i).norm() - std::sqrt(50.0)) <= 1e-9);
  CHECK_THROWS_AS(covariance_matrix(s), Error);
}

TEST_CASE("sampling is reproducible per seed", "[datagen]") {
  const ModelSpec m = ar1_model(20, 0.5);
  CHECK(sample(m, 30, 42).matrix() == sample(m, 30, 42).matrix());
  CHECK(sample(m, 30, 42).matrix() != sample(m, 30, 43).matrix());

  Rng a(1, 2, 3, StreamRole::X);
  Rng b(1, 2, 3, StreamRole::Y);
  Rng c(1, 2, 3, StreamRole::X);
  const ModelSampler sampler(m);
  const RowMatrix xa = sampler.draw(10, a).matrix();
  CHECK(xa == sampler.draw(10, c).matrix());
  CHECK(xa != sampler.draw(10, b).matrix());
}
