#pragma once

#include "gresfa/model_spec.hpp"

#include <Eigen/Cholesky>

namespace gresfa {

/// Closed-form densities and moments of the linear normal common factor model
/// for one fixed ParamSet.
///
/// All densities are returned on the log scale. The model-implied covariance,
/// the latent covariance and the posterior precision are factorized once at
/// construction; instances are immutable and may be shared between threads.
class FactorModel {
 public:
  /// Throws DegenerateCovarianceError if Phi, the implied covariance or the
  /// posterior precision is not positive definite, or if some theta_j <= 0.
  explicit FactorModel(ParamSet params);

  const ParamSet& params() const { return params_; }
  std::size_t m() const { return params_.m(); }
  std::size_t d() const { return params_.d(); }

  double lv_log_density(const LvPoint& x) const;
  double conditional_log_density(std::size_t j, double y_j, const LvPoint& x) const;
  /// log f(y | x) = sum_j log f_j(y_j | x) under local independence.
  double conditional_joint_log_density(const Vector& y, const LvPoint& x) const;
  double marginal_log_density(const Vector& y) const;
  /// log f(x | y) assembled from prior, conditional and marginal terms.
  double posterior_log_density(const LvPoint& x, const Vector& y) const;

  double conditional_mean(std::size_t j, const LvPoint& x) const;
  double conditional_variance(std::size_t j, const LvPoint& x) const;

  /// Posterior mean E(x | y); the posterior covariance does not depend on y.
  Vector posterior_mean(const Vector& y) const;
  const Matrix& posterior_covariance() const { return posterior_cov_; }

  /// log f(x_l | y) for every row x_l of `points` (Q x d), through the
  /// conjugate normal posterior. Agrees with posterior_log_density.
  void posterior_log_density_grid(const Vector& y, const Matrix& points, Eigen::Ref<Vector> out) const;
  /// log phi(x_l) for every row of `points`.
  void lv_log_density_grid(const Matrix& points, Eigen::Ref<Vector> out) const;

  const Matrix& implied_covariance() const { return sigma_; }
  /// Sigma^{-1}, obtained from the Cholesky factor.
  const Matrix& implied_precision() const { return sigma_inv_; }
  double implied_log_det() const { return sigma_log_det_; }

 private:
  void check_index(std::size_t j) const;

  ParamSet params_;
  Eigen::LLT<Matrix> phi_llt_;
  double phi_log_det_ = 0.0;
  Matrix sigma_;
  Eigen::LLT<Matrix> sigma_llt_;
  Matrix sigma_inv_;
  double sigma_log_det_ = 0.0;
  // Posterior N(B (y - nu), V) with B = V Lambda^T Theta^{-1}.
  Matrix posterior_gain_;
  Matrix posterior_cov_;
  Matrix posterior_prec_chol_;  // lower L with L L^T = V^{-1}
  double posterior_log_norm_ = 0.0;
  double lv_log_norm_ = 0.0;
};

}  // namespace gresfa
