#pragma once

#include "gresfa/model_spec.hpp"

#include <string>
#include <vector>

namespace gresfa {

/// Lower bound on every error variance; theta_j = floor + exp(t_j).
inline constexpr double kThetaFloor = 1e-6;

/// Layout of the unconstrained free-parameter vector for a ModelSpec.
///
/// Blocks, in order: intercepts nu (when the mean structure is free), free
/// loadings in row-major order, the strictly lower triangle of a unit-diagonal
/// square-root factor of Phi (row-major), and the log-shifted error variances.
/// Phi is rebuilt as L L^T after normalizing each row of the factor to unit
/// length, which keeps it a correlation matrix for any vector.
class ParamLayout {
 public:
  explicit ParamLayout(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  std::size_t size() const { return size_; }

  std::size_t nu_offset() const { return 0; }
  std::size_t nu_count() const { return spec_.mean_structure ? spec_.m : 0; }
  std::size_t lambda_offset() const { return nu_count(); }
  std::size_t lambda_count() const { return loading_slots_.size(); }
  std::size_t phi_offset() const { return lambda_offset() + lambda_count(); }
  std::size_t phi_count() const { return spec_.d * (spec_.d - 1) / 2; }
  std::size_t theta_offset() const { return phi_offset() + phi_count(); }
  std::size_t theta_count() const { return spec_.m; }

  ParamSet unpack(const Vector& v) const;
  /// Inverse of unpack; requires an admissible ParamSet with theta > floor.
  Vector pack(const ParamSet& params) const;

  /// Gradient with respect to the free vector, given the gradient of some
  /// scalar with respect to nu and to the implied covariance:
  /// d(scalar) = grad_nu . d(nu) + tr(grad_sigma d(Sigma)), grad_sigma symmetric.
  Vector chain_rule(const ParamSet& params, const Vector& grad_nu, const Matrix& grad_sigma) const;

  /// Human-readable labels (1-based indices), e.g. "lambda[3,1]".
  std::vector<std::string> labels() const;

  /// Conventional start values computed from the data moments.
  Vector start_values(const Vector& column_means, const Vector& column_variances) const;

 private:
  struct Slot {
    Eigen::Index row;
    Eigen::Index col;
  };

  Matrix phi_factor(const Vector& v) const;

  ModelSpec spec_;
  std::vector<Slot> loading_slots_;
  std::size_t size_ = 0;
};

}  // namespace gresfa
