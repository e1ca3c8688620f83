#include "gresfa/parametrization.hpp"

#include "gresfa/error.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace gresfa {

ParamLayout::ParamLayout(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  for (Eigen::Index j = 0; j < spec_.loading_pattern.rows(); ++j) {
    for (Eigen::Index k = 0; k < spec_.loading_pattern.cols(); ++k) {
      if (spec_.loading_pattern(j, k) == 1) loading_slots_.push_back({j, k});
    }
  }
  size_ = theta_offset() + theta_count();
}

Matrix ParamLayout::phi_factor(const Vector& v) const {
  const auto d = static_cast<Eigen::Index>(spec_.d);
  Matrix factor = Matrix::Zero(d, d);
  auto pos = static_cast<Eigen::Index>(phi_offset());
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index k = 0; k < i; ++k) factor(i, k) = v(pos++);
    factor(i, i) = 1.0;
    factor.row(i) /= factor.row(i).norm();
  }
  return factor;
}

ParamSet ParamLayout::unpack(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != size_) {
    throw DimensionError("free-parameter vector has length " + std::to_string(v.size()) + ", expected " +
                         std::to_string(size_));
  }
  const auto m = static_cast<Eigen::Index>(spec_.m);
  const auto d = static_cast<Eigen::Index>(spec_.d);
  ParamSet p;
  p.nu = spec_.mean_structure ? Vector(v.segment(0, m)) : Vector::Zero(m);
  p.lambda = Matrix::Zero(m, d);
  auto pos = static_cast<Eigen::Index>(lambda_offset());
  for (const auto& slot : loading_slots_) p.lambda(slot.row, slot.col) = v(pos++);
  const Matrix factor = phi_factor(v);
  p.phi = factor * factor.transpose();
  p.phi.diagonal().setOnes();
  p.theta = (v.segment(static_cast<Eigen::Index>(theta_offset()), m).array().exp() + kThetaFloor).matrix();
  return p;
}

Vector ParamLayout::pack(const ParamSet& params) const {
  params.check_admissible(spec_);
  Vector v(static_cast<Eigen::Index>(size_));
  const auto m = static_cast<Eigen::Index>(spec_.m);
  if (spec_.mean_structure) {
    v.segment(0, m) = params.nu;
  } else if (params.nu.cwiseAbs().maxCoeff() != 0.0) {
    throw SpecError("intercepts must be zero without a mean structure");
  }
  auto pos = static_cast<Eigen::Index>(lambda_offset());
  for (const auto& slot : loading_slots_) v(pos++) = params.lambda(slot.row, slot.col);
  Eigen::LLT<Matrix> llt(params.phi);
  const Matrix factor = llt.matrixL();
  for (Eigen::Index i = 0; i < factor.rows(); ++i) {
    for (Eigen::Index k = 0; k < i; ++k) v(pos++) = factor(i, k) / factor(i, i);
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const double excess = params.theta(j) - kThetaFloor;
    if (!(excess > 0.0)) throw DegenerateCovarianceError("error variance at or below the floor");
    v(pos++) = std::log(excess);
  }
  return v;
}

Vector ParamLayout::chain_rule(const ParamSet& params, const Vector& grad_nu, const Matrix& grad_sigma) const {
  Vector g = Vector::Zero(static_cast<Eigen::Index>(size_));
  const auto m = static_cast<Eigen::Index>(spec_.m);
  const auto d = static_cast<Eigen::Index>(spec_.d);
  if (spec_.mean_structure) g.segment(0, m) = grad_nu;

  const Matrix grad_lambda = 2.0 * grad_sigma * params.lambda * params.phi;
  auto pos = static_cast<Eigen::Index>(lambda_offset());
  for (const auto& slot : loading_slots_) g(pos++) = grad_lambda(slot.row, slot.col);

  if (d > 1) {
    const Matrix grad_phi = params.lambda.transpose() * grad_sigma * params.lambda;
    // Rebuild the normalized factor from the current Phi; its rows are unit
    // vectors L_i and raw rows have unit diagonal.
    Eigen::LLT<Matrix> llt(params.phi);
    const Matrix factor = llt.matrixL();
    for (Eigen::Index i = 1; i < d; ++i) {
      const double raw_norm = 1.0 / factor(i, i);
      const Vector weighted = factor.transpose() * grad_phi.col(i);
      for (Eigen::Index k = 0; k < i; ++k) {
        Vector delta = -factor.row(i).transpose() * factor(i, k);
        delta(k) += 1.0;
        delta /= raw_norm;
        g(pos++) = 2.0 * delta.dot(weighted);
      }
    }
  }

  for (Eigen::Index j = 0; j < m; ++j) g(pos++) = grad_sigma(j, j) * (params.theta(j) - kThetaFloor);
  return g;
}

std::vector<std::string> ParamLayout::labels() const {
  std::vector<std::string> out;
  out.reserve(size_);
  if (spec_.mean_structure) {
    for (std::size_t j = 0; j < spec_.m; ++j) out.push_back("nu[" + std::to_string(j + 1) + "]");
  }
  for (const auto& slot : loading_slots_) {
    out.push_back("lambda[" + std::to_string(slot.row + 1) + "," + std::to_string(slot.col + 1) + "]");
  }
  for (std::size_t i = 1; i < spec_.d; ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      out.push_back("phi_factor[" + std::to_string(i + 1) + "," + std::to_string(k + 1) + "]");
    }
  }
  for (std::size_t j = 0; j < spec_.m; ++j) out.push_back("log_theta[" + std::to_string(j + 1) + "]");
  return out;
}

Vector ParamLayout::start_values(const Vector& column_means, const Vector& column_variances) const {
  const auto m = static_cast<Eigen::Index>(spec_.m);
  if (column_means.size() != m || column_variances.size() != m) throw DimensionError("moment vectors have wrong length");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(size_));
  if (spec_.mean_structure) v.segment(0, m) = column_means;
  auto pos = static_cast<Eigen::Index>(lambda_offset());
  for (const auto& slot : loading_slots_) v(pos++) = 0.5 * std::sqrt(column_variances(slot.row));
  pos += static_cast<Eigen::Index>(phi_count());
  for (Eigen::Index j = 0; j < m; ++j) v(pos++) = std::log(0.5 * column_variances(j) - kThetaFloor);
  return v;
}

}  // namespace gresfa
