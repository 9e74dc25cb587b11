#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "mdr/gauss_source.hpp"
#include "test_util.hpp"

using namespace mdr;

TEST_CASE("synthetic covariance single entry") {
  const Eigen::MatrixXd s = synthetic_covariance(1, 4.0, 0.5);
  REQUIRE(s.rows() == 1);
  CHECK(s(0, 0) == 4.0);
}

TEST_CASE("synthetic covariance formula") {
  const Eigen::MatrixXd s = synthetic_covariance(2, 1.0, 0.9);
  CHECK(s(0, 0) == 1.0);
  CHECK(s(1, 1) == 1.0);
  CHECK(s(0, 1) == 0.9);
  CHECK(s(1, 0) == 0.9);
}

TEST_CASE("synthetic covariance is positive definite") {
  const Eigen::MatrixXd s = synthetic_covariance(50, 1.0, 0.9);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("synthetic covariance domain errors") {
  CHECK_THROWS_AS(synthetic_covariance(3, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(synthetic_covariance(3, 1.0, -0.1), std::domain_error);
  CHECK_THROWS_AS(synthetic_covariance(3, 0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(synthetic_covariance(0, 1.0, 0.5), std::domain_error);
}

TEST_CASE("covariance factor reproduces the matrix") {
  auto rng = make_stream(7);
  for (int n : {1, 5, 20}) {
    const Eigen::MatrixXd s = test_util::random_spd(n, rng);
    const Eigen::MatrixXd f = covariance_factor(s);
    CHECK((f * f.transpose() - s).norm() <= 1e-10 * s.norm());
  }
  const Eigen::MatrixXd kms = synthetic_covariance(30, 4.0, 0.9);
  const Eigen::MatrixXd f = covariance_factor(kms);
  CHECK((f * f.transpose() - kms).norm() <= 1e-10 * kms.norm());
}

TEST_CASE("zero covariance sampling returns the mean exactly") {
  GaussianSourceSpec spec;
  spec.mean = Eigen::VectorXd::Constant(6, 5.0);
  spec.covariance = Eigen::MatrixXd::Zero(6, 6);
  auto rng = make_stream(1);
  const StateMatrix m = sample_source(spec, 4, rng);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 6; ++i) CHECK(m.values(i, j) == 5.0);
}

TEST_CASE("sampling determinism under a fixed seed") {
  GaussianSourceSpec spec;
  spec.mean = Eigen::VectorXd::Zero(8);
  spec.covariance = synthetic_covariance(8, 2.0, 0.6);
  auto r1 = make_stream(42);
  auto r2 = make_stream(42);
  const StateMatrix a = sample_source(spec, 10, r1);
  const StateMatrix b = sample_source(spec, 10, r2);
  CHECK(a.values == b.values);
}

TEST_CASE("large-sample column statistics match the law") {
  const int n = 100;
  const int l = 100000;
  GaussianSourceSpec spec;
  spec.mean = Eigen::VectorXd::Constant(n, 3.0);
  spec.covariance = Eigen::MatrixXd::Identity(n, n);
  auto rng = make_stream(2024);
  const StateMatrix m = sample_source(spec, l, rng);

  const Eigen::VectorXd mean = m.values.rowwise().mean();
  const double mean_tol = 5.0 * std::sqrt(1.0 / l);
  CHECK((mean.array() - 3.0).abs().maxCoeff() <= mean_tol);

  Eigen::MatrixXd centered = m.values.colwise() - mean;
  Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(l - 1);
  CHECK((cov - spec.covariance).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("spec validation rejects bad inputs") {
  GaussianSourceSpec spec;
  spec.mean = Eigen::VectorXd::Zero(3);
  spec.covariance = synthetic_covariance(4, 1.0, 0.5);
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.covariance = synthetic_covariance(3, 1.0, 0.5);
  CHECK_NOTHROW(spec.validate());
  spec.covariance(0, 1) += 1e-6;  // asymmetric as stored
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.covariance = -Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("mismatch vanishes as smr grows") {
  const Eigen::MatrixXd sigma = synthetic_covariance(20, 4.0, 0.8);
  auto rng = make_stream(5);
  const Eigen::MatrixXd star = mismatch_covariance(sigma, 1e12, rng);
  CHECK((star - sigma).norm() / sigma.norm() <= 1e-11);
}

TEST_CASE("normalized mismatch norm is exactly 1/smr") {
  const Eigen::MatrixXd sigma = synthetic_covariance(25, 2.0, 0.7);
  for (double smr : {1.0, 10.0, 100.0}) {
    auto rng = make_stream(static_cast<std::uint64_t>(smr));
    const Eigen::MatrixXd star =
        mismatch_covariance(sigma, smr, rng, MismatchMode::normalized);
    const double rel = (star - sigma).norm() / sigma.norm();
    CHECK(std::abs(rel - 1.0 / smr) <= 1e-12);
  }
}

TEST_CASE("paper-literal mismatch applies the printed scale") {
  const Eigen::MatrixXd sigma = synthetic_covariance(15, 2.0, 0.7);
  auto rng1 = make_stream(9);
  auto rng2 = make_stream(9);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd h(15, 15);
  for (int j = 0; j < 15; ++j)
    for (int i = 0; i < 15; ++i) h(i, j) = nd(rng1);
  Eigen::MatrixXd delta = h * h.transpose();
  delta = 0.5 * (delta + delta.transpose()).eval();
  const double smr = 10.0;
  const Eigen::MatrixXd expected =
      sigma + (sigma.norm() * sigma.norm()) / (smr * delta.norm() * delta.norm()) * delta;
  const Eigen::MatrixXd star =
      mismatch_covariance(sigma, smr, rng2, MismatchMode::paper_literal);
  CHECK((star - expected).norm() <= 1e-12 * expected.norm());
}

TEST_CASE("mismatch keeps symmetry and does not lower the spectrum") {
  const Eigen::MatrixXd sigma = synthetic_covariance(30, 1.0, 0.9);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> base(sigma, Eigen::EigenvaluesOnly);
  const double base_min = base.eigenvalues().minCoeff();
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    auto rng = make_stream(seed);
    const Eigen::MatrixXd star = mismatch_covariance(sigma, 2.0, rng);
    CHECK((star - star.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(star, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= base_min - 1e-10);
  }
}

TEST_CASE("mismatch rejects nonpositive smr") {
  const Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(4, 4);
  auto rng = make_stream(1);
  CHECK_THROWS_AS(mismatch_covariance(sigma, 0.0, rng), std::domain_error);
}
