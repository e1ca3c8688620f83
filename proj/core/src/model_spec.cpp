#include "gresfa/model_spec.hpp"

#include "gresfa/error.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace gresfa {

std::vector<std::string> ModelSpec::validate() const {
  if (m < 1 || d < 1) {
    throw SpecError("model needs at least one manifest and one latent variable");
  }
  if (static_cast<std::size_t>(loading_pattern.rows()) != m ||
      static_cast<std::size_t>(loading_pattern.cols()) != d) {
    throw SpecError("loading pattern must be " + std::to_string(m) + " x " + std::to_string(d));
  }
  for (std::size_t j = 0; j < m; ++j) {
    bool any_free = false;
    for (std::size_t k = 0; k < d; ++k) {
      const int v = loading_pattern(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      if (v != 0 && v != 1) {
        throw SpecError("loading pattern entries must be 0 or 1 (row " + std::to_string(j + 1) + ")");
      }
      any_free = any_free || v == 1;
    }
    if (!any_free) {
      throw SpecError("manifest variable " + std::to_string(j + 1) + " has no free loading");
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    if (loading_pattern.col(static_cast<Eigen::Index>(k)).sum() == 0) {
      throw SpecError("latent variable " + std::to_string(k + 1) + " has no indicators");
    }
  }
  std::vector<std::string> warnings;
  if (d <= 2 && m < 3 * d) {
    warnings.push_back("fewer than three manifest variables per factor; identification may be weak");
  }
  return warnings;
}

std::size_t ModelSpec::free_loading_count() const {
  return static_cast<std::size_t>(loading_pattern.sum());
}

ModelSpec ModelSpec::independent_cluster(const std::vector<std::size_t>& cluster, std::size_t d) {
  ModelSpec spec;
  spec.m = cluster.size();
  spec.d = d;
  spec.loading_pattern = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(spec.m), static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < cluster.size(); ++j) {
    if (cluster[j] >= d) throw SpecError("cluster index out of range");
    spec.loading_pattern(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(cluster[j])) = 1;
  }
  return spec;
}

ModelSpec ModelSpec::one_factor(std::size_t m) {
  return independent_cluster(std::vector<std::size_t>(m, 0), 1);
}

Matrix ParamSet::implied_covariance() const {
  Matrix sigma = lambda * phi * lambda.transpose();
  sigma.diagonal() += theta;
  return sigma;
}

void ParamSet::check_admissible(const ModelSpec& spec) const {
  const auto m = static_cast<Eigen::Index>(spec.m);
  const auto d = static_cast<Eigen::Index>(spec.d);
  if (nu.size() != m || lambda.rows() != m || lambda.cols() != d || phi.rows() != d || phi.cols() != d ||
      theta.size() != m) {
    throw DimensionError("parameter shapes do not match the model specification");
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!(theta(j) > 0.0)) throw DegenerateCovarianceError("error variance must be positive");
    for (Eigen::Index k = 0; k < d; ++k) {
      if (spec.loading_pattern(j, k) == 0 && lambda(j, k) != 0.0) {
        throw SpecError("masked loading is not zero");
      }
    }
  }
  for (Eigen::Index k = 0; k < d; ++k) {
    if (std::abs(phi(k, k) - 1.0) > 1e-12) throw SpecError("latent covariance must have unit diagonal");
  }
  if ((phi - phi.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw DegenerateCovarianceError("latent covariance is not symmetric");
  }
  Eigen::LLT<Matrix> llt(phi);
  if (llt.info() != Eigen::Success) throw DegenerateCovarianceError("latent covariance is not positive definite");
}

}  // namespace gresfa
