#include "gresfa/factor_model.hpp"

#include "gresfa/error.hpp"

#include <cmath>
#include <string>

namespace gresfa {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_det_from_llt(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

FactorModel::FactorModel(ParamSet params) : params_(std::move(params)) {
  const auto m = params_.lambda.rows();
  const auto d = params_.lambda.cols();
  if (params_.nu.size() != m || params_.theta.size() != m || params_.phi.rows() != d || params_.phi.cols() != d) {
    throw DimensionError("inconsistent parameter shapes");
  }
  if (d < 1 || m < 1) throw DimensionError("model needs at least one manifest and one latent variable");
  if ((params_.theta.array() <= 0.0).any() || !params_.theta.allFinite()) {
    throw DegenerateCovarianceError("error variances must be positive");
  }

  phi_llt_.compute(params_.phi);
  if (phi_llt_.info() != Eigen::Success || !params_.phi.allFinite()) {
    throw DegenerateCovarianceError("latent covariance is not positive definite");
  }
  phi_log_det_ = log_det_from_llt(phi_llt_);
  lv_log_norm_ = -0.5 * (static_cast<double>(d) * kLog2Pi + phi_log_det_);

  sigma_ = params_.implied_covariance();
  sigma_llt_.compute(sigma_);
  if (sigma_llt_.info() != Eigen::Success) {
    throw DegenerateCovarianceError("model-implied covariance is not positive definite");
  }
  sigma_log_det_ = log_det_from_llt(sigma_llt_);
  sigma_inv_ = sigma_llt_.solve(Matrix::Identity(m, m));
  sigma_inv_ = 0.5 * (sigma_inv_ + sigma_inv_.transpose()).eval();

  const Matrix phi_inv = phi_llt_.solve(Matrix::Identity(d, d));
  const Matrix lt_theta_inv = params_.lambda.transpose() * params_.theta.cwiseInverse().asDiagonal();
  Matrix precision = phi_inv + lt_theta_inv * params_.lambda;
  precision = 0.5 * (precision + precision.transpose()).eval();
  Eigen::LLT<Matrix> prec_llt(precision);
  if (prec_llt.info() != Eigen::Success) {
    throw DegenerateCovarianceError("posterior precision is not positive definite");
  }
  posterior_prec_chol_ = prec_llt.matrixL();
  posterior_cov_ = prec_llt.solve(Matrix::Identity(d, d));
  posterior_gain_ = posterior_cov_ * lt_theta_inv;
  posterior_log_norm_ = -0.5 * (static_cast<double>(d) * kLog2Pi - log_det_from_llt(prec_llt));
}

void FactorModel::check_index(std::size_t j) const {
  if (j >= m()) {
    throw IndexError("manifest variable index " + std::to_string(j) + " out of range [0, " + std::to_string(m()) +
                     ")");
  }
}

double FactorModel::lv_log_density(const LvPoint& x) const {
  if (x.size() != params_.lambda.cols()) throw DimensionError("latent point has wrong dimension");
  const Vector z = phi_llt_.matrixL().solve(x);
  return lv_log_norm_ - 0.5 * z.squaredNorm();
}

double FactorModel::conditional_log_density(std::size_t j, double y_j, const LvPoint& x) const {
  check_index(j);
  const double theta = params_.theta(static_cast<Eigen::Index>(j));
  const double r = y_j - conditional_mean(j, x);
  return -0.5 * (kLog2Pi + std::log(theta)) - 0.5 * r * r / theta;
}

double FactorModel::conditional_joint_log_density(const Vector& y, const LvPoint& x) const {
  if (y.size() != params_.lambda.rows()) throw DimensionError("observation has wrong length");
  double total = 0.0;
  for (std::size_t j = 0; j < m(); ++j) total += conditional_log_density(j, y(static_cast<Eigen::Index>(j)), x);
  return total;
}

double FactorModel::marginal_log_density(const Vector& y) const {
  if (y.size() != params_.lambda.rows()) throw DimensionError("observation has wrong length");
  const Vector z = sigma_llt_.matrixL().solve(y - params_.nu);
  return -0.5 * (static_cast<double>(m()) * kLog2Pi + sigma_log_det_) - 0.5 * z.squaredNorm();
}

double FactorModel::posterior_log_density(const LvPoint& x, const Vector& y) const {
  return lv_log_density(x) + conditional_joint_log_density(y, x) - marginal_log_density(y);
}

double FactorModel::conditional_mean(std::size_t j, const LvPoint& x) const {
  check_index(j);
  if (x.size() != params_.lambda.cols()) throw DimensionError("latent point has wrong dimension");
  const auto row = static_cast<Eigen::Index>(j);
  return params_.nu(row) + params_.lambda.row(row).dot(x);
}

double FactorModel::conditional_variance(std::size_t j, const LvPoint& /*x*/) const {
  check_index(j);
  return params_.theta(static_cast<Eigen::Index>(j));
}

Vector FactorModel::posterior_mean(const Vector& y) const {
  if (y.size() != params_.lambda.rows()) throw DimensionError("observation has wrong length");
  return posterior_gain_ * (y - params_.nu);
}

void FactorModel::posterior_log_density_grid(const Vector& y, const Matrix& points, Eigen::Ref<Vector> out) const {
  if (points.cols() != params_.lambda.cols() || out.size() != points.rows()) {
    throw DimensionError("grid shape does not match the model");
  }
  const Vector mu = posterior_mean(y);
  const Matrix centered = (points.rowwise() - mu.transpose()) * posterior_prec_chol_;
  out = (posterior_log_norm_ - 0.5 * centered.rowwise().squaredNorm().array()).matrix();
}

void FactorModel::lv_log_density_grid(const Matrix& points, Eigen::Ref<Vector> out) const {
  if (points.cols() != params_.lambda.cols() || out.size() != points.rows()) {
    throw DimensionError("grid shape does not match the model");
  }
  const Matrix z = phi_llt_.matrixL().solve(points.transpose());
  out = (lv_log_norm_ - 0.5 * z.colwise().squaredNorm().array()).matrix().transpose();
}

}  // namespace gresfa
