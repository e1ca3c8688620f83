#pragma once

#include "gresfa/estimation.hpp"
#include "gresfa/parametrization.hpp"
#include "gresfa/random.hpp"

#include <cmath>

namespace fixture {

using namespace gresfa;

/// One-factor model with loadings cycling sqrt(.3), sqrt(.5), sqrt(.7) and
/// unit total variances.
inline ParamSet one_factor_params(std::size_t m, double nu = 0.0) {
  ParamSet p;
  p.nu = Vector::Constant(static_cast<Eigen::Index>(m), nu);
  p.lambda = Matrix(static_cast<Eigen::Index>(m), 1);
  const double loads[3] = {std::sqrt(0.3), std::sqrt(0.5), std::sqrt(0.7)};
  for (Eigen::Index j = 0; j < p.lambda.rows(); ++j) p.lambda(j, 0) = loads[j % 3];
  p.phi = Matrix::Identity(1, 1);
  p.theta = (1.0 - p.lambda.col(0).array().square()).matrix();
  return p;
}

/// Random admissible parameters for `spec` drawn through the free vector.
inline ParamSet random_params(const ParamLayout& layout, RandomStream& rng, Vector* free = nullptr) {
  Vector v(static_cast<Eigen::Index>(layout.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = 0.5 * rng.normal();
  for (std::size_t i = 0; i < layout.lambda_count(); ++i) {
    v(static_cast<Eigen::Index>(layout.lambda_offset() + i)) = 0.4 + 0.5 * rng.uniform();
  }
  for (std::size_t j = 0; j < layout.theta_count(); ++j) {
    v(static_cast<Eigen::Index>(layout.theta_offset() + j)) = std::log(0.3 + 0.6 * rng.uniform());
  }
  if (free) *free = v;
  return layout.unpack(v);
}

inline ModelSpec two_factor_spec(std::size_t per_factor) {
  std::vector<std::size_t> cluster;
  for (std::size_t j = 0; j < 2 * per_factor; ++j) cluster.push_back(j < per_factor ? 0 : 1);
  return ModelSpec::independent_cluster(cluster, 2);
}

inline DataMatrix one_row(const Vector& y) {
  DataMatrix d;
  d.values = y.transpose();
  for (Eigen::Index j = 0; j < y.size(); ++j) d.column_names.push_back("y" + std::to_string(j + 1));
  return d;
}

}  // namespace fixture
