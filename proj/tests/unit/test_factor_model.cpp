#include "catch_amalgamated.hpp"

#include "fixtures.hpp"
#include "gresfa/error.hpp"
#include "gresfa/factor_model.hpp"
#include "oracles.hpp"

#include <Eigen/LU>

#include <cmath>

using namespace gresfa;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ParamSet single_item(double nu, double lambda, double theta) {
  ParamSet p;
  p.nu = Vector::Constant(1, nu);
  p.lambda = Matrix::Constant(1, 1, lambda);
  p.phi = Matrix::Identity(1, 1);
  p.theta = Vector::Constant(1, theta);
  return p;
}

ParamSet study1_like() {
  ParamSet p;
  p.nu = Vector::Zero(4);
  p.lambda = Matrix::Zero(4, 2);
  p.lambda(0, 0) = std::sqrt(0.3);
  p.lambda(1, 0) = std::sqrt(0.7);
  p.lambda(2, 1) = std::sqrt(0.5);
  p.lambda(3, 1) = std::sqrt(0.3);
  p.phi = (Matrix(2, 2) << 1.0, 0.2, 0.2, 1.0).finished();
  p.theta = (1.0 - (p.lambda * p.phi * p.lambda.transpose()).diagonal().array()).matrix();
  return p;
}

}  // namespace

TEST_CASE("latent density at known points") {
  const FactorModel one(single_item(0.0, 0.5, 1.0));
  REQUIRE_THAT(one.lv_log_density(Vector::Zero(1)), WithinAbs(std::log(0.3989422804014327), 1e-14));

  ParamSet p = study1_like();
  p.phi.setIdentity();
  REQUIRE_THAT(FactorModel(p).lv_log_density(Vector::Zero(2)), WithinAbs(std::log(0.15915494309189535), 1e-14));

  const ParamSet q = study1_like();
  const Vector x = (Vector(2) << 1.0, -1.0).finished();
  REQUIRE_THAT(FactorModel(q).lv_log_density(x),
               WithinAbs(oracle::bivariate_normal_log_density(x, Vector::Zero(2), q.phi), 1e-12));
}

TEST_CASE("latent density integrates to one") {
  const FactorModel model(single_item(0.1, 0.8, 0.4));
  const double total = oracle::integrate([&](double x) { return std::exp(model.lv_log_density(Vector::Constant(1, x))); },
                                         -10.0, 10.0);
  REQUIRE_THAT(total, WithinAbs(1.0, 1e-6));
}

TEST_CASE("non positive definite latent covariance is degenerate") {
  ParamSet p = study1_like();
  p.phi(0, 1) = p.phi(1, 0) = 1.0;
  REQUIRE_THROWS_AS(FactorModel(p), DegenerateCovarianceError);
}

TEST_CASE("conditional density of one item") {
  const FactorModel model(single_item(0.0, std::sqrt(0.5), 0.5));
  const Vector x0 = Vector::Zero(1);
  REQUIRE_THAT(model.conditional_log_density(0, 0.0, x0), WithinAbs(std::log(0.5641895835477563), 1e-14));
  REQUIRE_THAT(model.conditional_log_density(0, 1.0, x0), WithinAbs(std::log(0.5641895835477563) - 1.0, 1e-14));
  REQUIRE_THROWS_AS(model.conditional_log_density(1, 0.0, x0), IndexError);

  const FactorModel shifted(single_item(0.3, std::sqrt(0.5), 0.5));
  const Vector x1 = Vector::Ones(1);
  const double centre = 0.3 + std::sqrt(0.5);
  for (double delta : {0.1, 0.7, 2.5}) {
    REQUIRE_THAT(shifted.conditional_log_density(0, centre + delta, x1),
                 WithinAbs(shifted.conditional_log_density(0, centre - delta, x1), 1e-14));
  }
}

TEST_CASE("marginal density with zero loadings factorizes") {
  ParamSet p = fixture::one_factor_params(4);
  p.lambda.setZero();
  p.theta.setOnes();
  const Vector y = (Vector(4) << 0.3, -1.2, 2.0, 0.0).finished();
  double expected = 0.0;
  for (Eigen::Index j = 0; j < 4; ++j) expected += oracle::univariate_normal_log_density(y(j), 0.0, 1.0);
  REQUIRE_THAT(FactorModel(p).marginal_log_density(y), WithinAbs(expected, 1e-13));
}

TEST_CASE("marginal density of two items matches the bivariate formula") {
  ParamSet p;
  p.nu = Vector::Zero(2);
  p.lambda = Matrix::Constant(2, 1, std::sqrt(0.5));
  p.phi = Matrix::Identity(1, 1);
  p.theta = Vector::Constant(2, 0.5);
  const Matrix cov = (Matrix(2, 2) << 1.0, 0.5, 0.5, 1.0).finished();
  const Vector y = Vector::Zero(2);
  REQUIRE_THAT(FactorModel(p).marginal_log_density(y),
               WithinAbs(oracle::bivariate_normal_log_density(y, Vector::Zero(2), cov), 1e-13));
}

TEST_CASE("marginal density agrees with quadrature of the joint") {
  RandomStream rng(11);
  const ParamLayout layout(ModelSpec::one_factor(5));
  for (int rep = 0; rep < 20; ++rep) {
    const ParamSet p = fixture::random_params(layout, rng);
    const Vector y = p.nu + rng.normal_vector(5);
    const double expected = oracle::quadrature_marginal_log_density(y, p.nu, p.lambda.col(0), p.theta);
    REQUIRE_THAT(FactorModel(p).marginal_log_density(y), WithinAbs(expected, 1e-8));
  }
}

TEST_CASE("marginal density matches a dense LU evaluation") {
  RandomStream rng(12);
  const ParamLayout layout(fixture::two_factor_spec(4));
  for (int rep = 0; rep < 10; ++rep) {
    const ParamSet p = fixture::random_params(layout, rng);
    const Vector y = rng.normal_vector(8);
    REQUIRE_THAT(FactorModel(p).marginal_log_density(y),
                 WithinAbs(oracle::dense_normal_log_density(y, p.nu, p.implied_covariance()), 1e-11));
  }
}

TEST_CASE("marginal density is translation consistent") {
  RandomStream rng(13);
  const ParamLayout layout(fixture::two_factor_spec(3));
  ParamSet p = fixture::random_params(layout, rng);
  const Vector y = rng.normal_vector(6);
  const Vector shift = rng.normal_vector(6);
  const double before = FactorModel(p).marginal_log_density(y);
  p.nu += shift;
  REQUIRE_THAT(FactorModel(p).marginal_log_density(y + shift), WithinAbs(before, 1e-12));
}

TEST_CASE("posterior density: Bayes identity") {
  RandomStream rng(14);
  const ParamLayout layout(fixture::two_factor_spec(3));
  for (int rep = 0; rep < 20; ++rep) {
    const FactorModel model(fixture::random_params(layout, rng));
    const Vector y = rng.normal_vector(6);
    const Vector x = rng.normal_vector(2);
    const double lhs = model.posterior_log_density(x, y) + model.marginal_log_density(y);
    const double rhs = model.lv_log_density(x) + model.conditional_joint_log_density(y, x);
    REQUIRE_THAT(lhs, WithinAbs(rhs, 1e-12));
  }
}

TEST_CASE("posterior density equals prior when loadings vanish") {
  ParamSet p = fixture::one_factor_params(3);
  p.lambda.setZero();
  const FactorModel model(p);
  const Vector y = (Vector(3) << 1.0, -2.0, 0.5).finished();
  for (double x : {-2.0, 0.0, 1.3}) {
    const Vector xv = Vector::Constant(1, x);
    REQUIRE_THAT(model.posterior_log_density(xv, y), WithinAbs(model.lv_log_density(xv), 1e-13));
  }
}

TEST_CASE("posterior density of a single item is the conjugate normal") {
  const FactorModel model(single_item(0.0, std::sqrt(0.5), 0.5));
  for (double y : {0.0, 0.8, -1.5}) {
    const Vector yv = Vector::Constant(1, y);
    const double mean = 0.5 * y * std::sqrt(2.0);
    const double expected = std::exp(oracle::univariate_normal_log_density(0.0, mean, 0.5));
    REQUIRE_THAT(std::exp(model.posterior_log_density(Vector::Zero(1), yv)), WithinAbs(expected, 1e-10));
  }
}

TEST_CASE("posterior density integrates to one") {
  RandomStream rng(15);
  const ParamLayout layout(ModelSpec::one_factor(6));
  for (int rep = 0; rep < 5; ++rep) {
    const FactorModel model(fixture::random_params(layout, rng));
    const Vector y = 1.5 * rng.normal_vector(6);
    const double total = oracle::integrate(
        [&](double x) { return std::exp(model.posterior_log_density(Vector::Constant(1, x), y)); }, -12.0, 12.0);
    REQUIRE_THAT(total, WithinAbs(1.0, 1e-6));
  }
}

TEST_CASE("vectorized grid evaluations agree with pointwise ones") {
  RandomStream rng(16);
  const ParamLayout layout(fixture::two_factor_spec(4));
  const FactorModel model(fixture::random_params(layout, rng));
  Matrix points(7, 2);
  for (Eigen::Index i = 0; i < points.rows(); ++i) points.row(i) = 2.0 * rng.normal_vector(2).transpose();
  const Vector y = rng.normal_vector(8);
  Vector post(7), prior(7);
  model.posterior_log_density_grid(y, points, post);
  model.lv_log_density_grid(points, prior);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Vector x = points.row(i).transpose();
    REQUIRE_THAT(post(i), WithinAbs(model.posterior_log_density(x, y), 1e-11));
    REQUIRE_THAT(prior(i), WithinAbs(model.lv_log_density(x), 1e-13));
  }
}

TEST_CASE("conditional mean and variance") {
  const FactorModel model(single_item(0.0, std::sqrt(0.5), 0.5));
  REQUIRE(model.conditional_mean(0, Vector::Zero(1)) == 0.0);
  REQUIRE_THAT(model.conditional_mean(0, Vector::Constant(1, 2.0)), WithinAbs(1.4142135623730951, 1e-14));
  REQUIRE(model.conditional_variance(0, Vector::Constant(1, -1.0)) == 0.5);
  REQUIRE(model.conditional_variance(0, Vector::Constant(1, 3.0)) == 0.5);
  REQUIRE_THROWS_AS(model.conditional_mean(2, Vector::Zero(1)), IndexError);

  ParamSet p = study1_like();
  const FactorModel two(p);
  const Vector x = (Vector(2) << 1.0, 5.0).finished();
  REQUIRE_THAT(two.conditional_mean(0, x), WithinAbs(std::sqrt(0.3), 1e-15));
  REQUIRE_THAT(two.conditional_variance(1, x), WithinAbs(0.3, 1e-15));
}

TEST_CASE("cached implied quantities") {
  RandomStream rng(17);
  const ParamLayout layout(fixture::two_factor_spec(3));
  const FactorModel model(fixture::random_params(layout, rng));
  const Matrix eye = model.implied_covariance() * model.implied_precision();
  REQUIRE((eye - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE_THAT(model.implied_log_det(), WithinRel(std::log(model.implied_covariance().determinant()), 1e-12));
}
