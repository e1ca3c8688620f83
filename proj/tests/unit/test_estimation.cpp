#include "catch_amalgamated.hpp"

#include "fixtures.hpp"
#include "gresfa/error.hpp"
#include "gresfa/estimation.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace gresfa;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("score agrees with finite differences of the log density") {
  RandomStream rng(21);
  for (const ModelSpec& spec : {ModelSpec::one_factor(5), fixture::two_factor_spec(3)}) {
    const ParamLayout layout(spec);
    for (int rep = 0; rep < 5; ++rep) {
      Vector v;
      fixture::random_params(layout, rng, &v);
      const Vector y = rng.normal_vector(static_cast<Eigen::Index>(spec.m));
      const auto f = [&](const Vector& w) { return FactorModel(layout.unpack(w)).marginal_log_density(y); };
      const Vector analytic = score(layout, layout.unpack(v), y);
      const Vector numeric = oracle::fd_gradient(f, v);
      REQUIRE((analytic - numeric).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("score matrix rows match single-row scores") {
  RandomStream rng(22);
  const ParamLayout layout(fixture::two_factor_spec(3));
  const FactorModel model(fixture::random_params(layout, rng));
  const Matrix obs = simulate_observations(model.params(), 700, rng);
  const Matrix s1 = score_matrix(layout, model, obs, 1);
  const Matrix s4 = score_matrix(layout, model, obs, 4);
  REQUIRE(s1 == s4);
  for (Eigen::Index i : {0, 511, 512, 699}) {
    REQUIRE((s1.row(i).transpose() - score(layout, model, obs.row(i).transpose())).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("mean gradient from moments equals mean score") {
  RandomStream rng(23);
  const ParamLayout layout(ModelSpec::one_factor(6));
  const FactorModel model(fixture::random_params(layout, rng));
  const DataMatrix data = simulate_data(fixture::one_factor_params(6), 300, rng);
  const Matrix s = score_matrix(layout, model, data.values);
  const Vector mean_score = s.colwise().mean().transpose();
  const Vector grad = mean_log_likelihood_gradient(layout, model, sample_moments(data));
  REQUIRE((grad - mean_score).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("log-likelihood is additive over rows") {
  RandomStream rng(24);
  const ParamSet p = fixture::one_factor_params(4, 0.2);
  const DataMatrix data = simulate_data(p, 50, rng);
  const FactorModel model(p);
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.values.rows(); ++i) total += model.marginal_log_density(data.values.row(i).transpose());
  REQUIRE_THAT(log_likelihood(p, data), WithinAbs(total, 1e-9));

  DataMatrix head = data, tail = data;
  head.values = data.values.topRows(20);
  tail.values = data.values.bottomRows(30);
  REQUIRE_THAT(log_likelihood(p, head) + log_likelihood(p, tail), WithinAbs(log_likelihood(p, data), 1e-9));
}

TEST_CASE("log-likelihood with zero loadings is a sum of univariate normals") {
  ParamSet p = fixture::one_factor_params(3);
  p.lambda.setZero();
  p.theta = (Vector(3) << 0.5, 1.0, 2.0).finished();
  DataMatrix data = fixture::one_row((Vector(3) << 1.0, 0.0, -1.0).finished());
  double expected = 0.0;
  for (Eigen::Index j = 0; j < 3; ++j) expected += oracle::univariate_normal_log_density(data.values(0, j), 0.0, p.theta(j));
  REQUIRE_THAT(log_likelihood(p, data), WithinAbs(expected, 1e-13));
}

TEST_CASE("fit recovers one-factor parameters") {
  RandomStream rng(25);
  const ParamSet truth = fixture::one_factor_params(6, 0.5);
  const DataMatrix data = simulate_data(truth, 5000, rng);
  OptimOptions opts;
  opts.information_draws = 2000;
  const FitResult fit = fit_ml(data, ModelSpec::one_factor(6), opts);
  REQUIRE(fit.converged);
  REQUIRE(fit.gradient_norm < 1e-4);
  // The factor sign is arbitrary.
  const double sign = fit.params.lambda.col(0).sum() < 0 ? -1.0 : 1.0;
  REQUIRE((sign * fit.params.lambda - truth.lambda).cwiseAbs().maxCoeff() < 0.05);
  REQUIRE((fit.params.theta - truth.theta).cwiseAbs().maxCoeff() < 0.05);
  REQUIRE((fit.params.nu - truth.nu).cwiseAbs().maxCoeff() < 0.05);
  REQUIRE(fit.information.rows() == static_cast<Eigen::Index>(ParamLayout(fit.spec).size()));
  REQUIRE((fit.information * fit.inv_information - Matrix::Identity(18, 18)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fitted intercepts equal the sample means") {
  RandomStream rng(26);
  const DataMatrix data = simulate_data(fixture::one_factor_params(5, 1.0), 400, rng);
  OptimOptions opts;
  opts.compute_information = false;
  const FitResult fit = fit_ml(data, ModelSpec::one_factor(5), opts);
  REQUIRE(fit.converged);
  REQUIRE((fit.params.nu - sample_moments(data).mean).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("fit is invariant to row permutation") {
  RandomStream rng(27);
  const DataMatrix data = simulate_data(fixture::one_factor_params(5), 300, rng);
  std::vector<Eigen::Index> order(300);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());
  DataMatrix shuffled = data;
  for (Eigen::Index i = 0; i < 300; ++i) shuffled.values.row(i) = data.values.row(order[static_cast<std::size_t>(i)]);
  OptimOptions opts;
  opts.compute_information = false;
  const FitResult a = fit_ml(data, ModelSpec::one_factor(5), opts);
  const FitResult b = fit_ml(shuffled, ModelSpec::one_factor(5), opts);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  REQUIRE_THAT(a.loglik, WithinAbs(b.loglik, 1e-8));
  REQUIRE((a.params.lambda.cwiseAbs() - b.params.lambda.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("fit is equivariant under a shift of the data") {
  RandomStream rng(28);
  const DataMatrix data = simulate_data(fixture::one_factor_params(4), 300, rng);
  DataMatrix shifted = data;
  shifted.values.array().rowwise() += Eigen::RowVector4d(1.0, -2.0, 0.5, 3.0).array();
  OptimOptions opts;
  opts.compute_information = false;
  const FitResult a = fit_ml(data, ModelSpec::one_factor(4), opts);
  const FitResult b = fit_ml(shifted, ModelSpec::one_factor(4), opts);
  REQUIRE_THAT(a.loglik, WithinAbs(b.loglik, 1e-7));
  REQUIRE((b.params.nu - a.params.nu - Eigen::Vector4d(1.0, -2.0, 0.5, 3.0)).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("two-factor fit converges with a correlated factor pair") {
  RandomStream rng(29);
  const ModelSpec spec = fixture::two_factor_spec(4);
  ParamSet truth;
  truth.nu = Vector::Zero(8);
  truth.lambda = Matrix::Zero(8, 2);
  for (Eigen::Index j = 0; j < 8; ++j) truth.lambda(j, j < 4 ? 0 : 1) = 0.7;
  truth.phi = (Matrix(2, 2) << 1.0, 0.3, 0.3, 1.0).finished();
  truth.theta = Vector::Constant(8, 0.51);
  const DataMatrix data = simulate_data(truth, 4000, rng);
  OptimOptions opts;
  opts.compute_information = false;
  const FitResult fit = fit_ml(data, spec, opts);
  REQUIRE(fit.converged);
  REQUIRE_THAT(std::abs(fit.params.phi(0, 1)), WithinAbs(0.3, 0.06));
  REQUIRE(fit.params.phi.diagonal().isApprox(Vector::Ones(2), 1e-12));
}

TEST_CASE("information at zero loadings has the closed form") {
  // With Lambda = 0 the nu block is diag(1/theta) and the log-theta block is
  // diag(((theta - floor)/theta)^2 / 2).
  ParamSet p = fixture::one_factor_params(3);
  p.lambda.setConstant(1e-3);
  p.theta = (Vector(3) << 0.5, 1.0, 2.0).finished();
  const ParamLayout layout(ModelSpec::one_factor(3));
  RandomStream rng(30);
  const InformationEstimate info = expected_information(layout, p, 200000, rng, 4);
  for (Eigen::Index j = 0; j < 3; ++j) {
    REQUIRE_THAT(info.information(j, j), WithinRel(1.0 / p.theta(j), 0.03));
    const double r = (p.theta(j) - kThetaFloor) / p.theta(j);
    const auto t = static_cast<Eigen::Index>(layout.theta_offset()) + j;
    REQUIRE_THAT(info.information(t, t), WithinRel(0.5 * r * r, 0.03));
  }
}

TEST_CASE("information matrix is symmetric and independent of workers") {
  const ParamLayout layout(ModelSpec::one_factor(4));
  const ParamSet p = fixture::one_factor_params(4);
  RandomStream r1(31), r2(31);
  const InformationEstimate a = expected_information(layout, p, 3000, r1, 1);
  const InformationEstimate b = expected_information(layout, p, 3000, r2, 3);
  REQUIRE(a.information == b.information);
  REQUIRE((a.information - a.information.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("singular information is an identification error") {
  Matrix info = Matrix::Identity(3, 3);
  info(2, 2) = 1e-15;
  REQUIRE_THROWS_AS(invert_information(info), IdentificationError);
  const InformationEstimate ok = invert_information(Matrix::Identity(3, 3) * 2.0);
  REQUIRE(ok.inverse.isApprox(Matrix::Identity(3, 3) * 0.5));
}

TEST_CASE("simulated data reproduce the implied moments") {
  RandomStream rng(32);
  ParamSet p;
  p.nu = (Vector(4) << 1.0, 0.0, -1.0, 2.0).finished();
  p.lambda = Matrix::Zero(4, 2);
  p.lambda << 0.8, 0.0, 0.6, 0.0, 0.0, 0.7, 0.0, 0.5;
  p.phi = (Matrix(2, 2) << 1.0, 0.4, 0.4, 1.0).finished();
  p.theta = (Vector(4) << 0.36, 0.64, 0.51, 0.75).finished();
  const DataMatrix data = simulate_data(p, 200000, rng);
  const SampleMoments mom = sample_moments(data);
  REQUIRE((mom.mean - p.nu).cwiseAbs().maxCoeff() < 0.01);
  REQUIRE((mom.covariance - p.implied_covariance()).cwiseAbs().maxCoeff() < 0.015);
}

TEST_CASE("data validation") {
  DataMatrix empty;
  REQUIRE_THROWS_AS(validate_data(empty), DataError);
  DataMatrix flat = fixture::one_row(Vector::Ones(3));
  flat.values = Matrix::Ones(5, 3);
  flat.values.col(0) << 1, 2, 3, 4, 5;
  flat.values.col(1) << 2, 1, 2, 1, 2;
  REQUIRE_THROWS_AS(validate_data(flat), DataError);
  flat.values(0, 2) = 0.0;
  REQUIRE(validate_data(flat).empty());
  flat.values(1, 1) = std::nan("");
  REQUIRE_THROWS_AS(validate_data(flat), DataError);
}

TEST_CASE("fit with spec and data of different widths is rejected") {
  RandomStream rng(33);
  const DataMatrix data = simulate_data(fixture::one_factor_params(4), 50, rng);
  REQUIRE_THROWS_AS(fit_ml(data, ModelSpec::one_factor(5)), DimensionError);
}
