#include "gresfa/estimation.hpp"

#include "gresfa/error.hpp"
#include "gresfa/numeric.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <optional>

namespace gresfa {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

struct Evaluation {
  double value = std::numeric_limits<double>::infinity();  // -l_n / n
  Vector gradient;
};

std::optional<Evaluation> evaluate_objective(const ParamLayout& layout, const Vector& v, const SampleMoments& moments) {
  try {
    const FactorModel model(layout.unpack(v));
    Evaluation out;
    out.value = -mean_log_likelihood(model, moments);
    out.gradient = -mean_log_likelihood_gradient(layout, model, moments);
    if (!std::isfinite(out.value) || !out.gradient.allFinite()) return std::nullopt;
    return out;
  } catch (const DegenerateCovarianceError&) {
    return std::nullopt;
  }
}

Matrix second_moment_about(const SampleMoments& moments, const Vector& nu) {
  const Vector diff = moments.mean - nu;
  return moments.covariance + diff * diff.transpose();
}

}  // namespace

double log_likelihood(const FactorModel& model, const DataMatrix& data) {
  if (data.m() != model.m()) throw DimensionError("data has " + std::to_string(data.m()) + " columns, model has " +
                                                  std::to_string(model.m()));
  CompensatedSum total(1, 1);
  for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
    total.add(Matrix::Constant(1, 1, model.marginal_log_density(data.values.row(i).transpose())));
  }
  return total.value()(0, 0);
}

double log_likelihood(const ParamSet& params, const DataMatrix& data) {
  return log_likelihood(FactorModel(params), data);
}

Vector score(const ParamLayout& layout, const FactorModel& model, const Vector& y) {
  if (static_cast<std::size_t>(y.size()) != model.m()) throw DimensionError("observation has wrong length");
  const Matrix& precision = model.implied_precision();
  const Vector u = precision * (y - model.params().nu);
  const Matrix grad_sigma = 0.5 * (u * u.transpose() - precision);
  return layout.chain_rule(model.params(), u, grad_sigma);
}

Vector score(const ParamLayout& layout, const ParamSet& params, const Vector& y) {
  return score(layout, FactorModel(params), y);
}

Matrix score_matrix(const ParamLayout& layout, const FactorModel& model, const Matrix& observations,
                    std::size_t workers) {
  Matrix out(observations.rows(), static_cast<Eigen::Index>(layout.size()));
  const auto rows = static_cast<std::size_t>(observations.rows());
  const std::size_t blocks = (rows + kReductionBlock - 1) / kReductionBlock;
  parallel_for(blocks, workers, [&](std::size_t b) {
    const auto start = static_cast<Eigen::Index>(b) * kReductionBlock;
    const Eigen::Index end = std::min<Eigen::Index>(start + kReductionBlock, observations.rows());
    for (Eigen::Index i = start; i < end; ++i) {
      out.row(i) = score(layout, model, observations.row(i).transpose()).transpose();
    }
  });
  return out;
}

double mean_log_likelihood(const FactorModel& model, const SampleMoments& moments) {
  const Matrix second = second_moment_about(moments, model.params().nu);
  const double trace = (model.implied_precision().cwiseProduct(second)).sum();
  return -0.5 * (static_cast<double>(model.m()) * kLog2Pi + model.implied_log_det() + trace);
}

Vector mean_log_likelihood_gradient(const ParamLayout& layout, const FactorModel& model,
                                    const SampleMoments& moments) {
  const Matrix& precision = model.implied_precision();
  const Vector grad_nu = precision * (moments.mean - model.params().nu);
  const Matrix second = second_moment_about(moments, model.params().nu);
  Matrix grad_sigma = 0.5 * (precision * second * precision - precision);
  grad_sigma = 0.5 * (grad_sigma + grad_sigma.transpose()).eval();
  return layout.chain_rule(model.params(), grad_nu, grad_sigma);
}

Matrix mean_log_likelihood_hessian(const ParamLayout& layout, const Vector& v, const SampleMoments& moments) {
  const auto q = v.size();
  Matrix hessian(q, q);
  for (Eigen::Index k = 0; k < q; ++k) {
    const double h = 1e-5 * std::max(1.0, std::abs(v(k)));
    Vector plus = v;
    Vector minus = v;
    plus(k) += h;
    minus(k) -= h;
    const Vector g_plus = mean_log_likelihood_gradient(layout, FactorModel(layout.unpack(plus)), moments);
    const Vector g_minus = mean_log_likelihood_gradient(layout, FactorModel(layout.unpack(minus)), moments);
    hessian.col(k) = (g_plus - g_minus) / (2.0 * h);
  }
  return 0.5 * (hessian + hessian.transpose());
}

FitResult fit_ml(const DataMatrix& data, const ModelSpec& spec, const OptimOptions& options) {
  const ParamLayout layout(spec);
  FitResult result;
  result.spec = layout.spec();
  result.warnings = spec.validate();
  if (data.m() != spec.m) {
    throw DimensionError("data has " + std::to_string(data.m()) + " columns, model expects " + std::to_string(spec.m));
  }
  for (auto& w : validate_data(data)) result.warnings.push_back(std::move(w));
  const SampleMoments moments = sample_moments(data);
  result.n = moments.n;

  Vector v = layout.start_values(moments.mean, moments.covariance.diagonal());
  auto current = evaluate_objective(layout, v, moments);
  if (!current) throw DataError("start values give a degenerate model");

  const auto q = static_cast<Eigen::Index>(layout.size());
  Matrix inv_hessian = Matrix::Identity(q, q);
  bool fresh_hessian = true;
  std::size_t iter = 0;
  bool stalled = false;
  for (; iter < options.max_iter; ++iter) {
    if (current->gradient.cwiseAbs().maxCoeff() < options.polish_tolerance) break;
    Vector direction = -inv_hessian * current->gradient;
    double slope = current->gradient.dot(direction);
    if (!(slope < 0.0)) {
      inv_hessian.setIdentity();
      fresh_hessian = true;
      direction = -current->gradient;
      slope = current->gradient.dot(direction);
    }
    double step = 1.0;
    std::optional<Evaluation> trial;
    Vector candidate;
    for (int attempt = 0; attempt < 60; ++attempt) {
      candidate = v + step * direction;
      trial = evaluate_objective(layout, candidate, moments);
      if (trial && trial->value <= current->value + 1e-4 * step * slope) break;
      trial.reset();
      step *= 0.5;
    }
    if (!trial) {
      if (fresh_hessian) {
        stalled = true;
        break;
      }
      inv_hessian.setIdentity();
      fresh_hessian = true;
      continue;
    }
    const Vector s = candidate - v;
    const Vector y = trial->gradient - current->gradient;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh_hessian) {
        inv_hessian *= sy / y.squaredNorm();
        fresh_hessian = false;
      }
      const double rho = 1.0 / sy;
      const Vector hy = inv_hessian * y;
      inv_hessian += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
    }
    v = candidate;
    current = std::move(trial);
  }

  result.free_params = v;
  result.params = layout.unpack(v);
  result.n_iter = iter;
  result.gradient_norm = current->gradient.cwiseAbs().maxCoeff();
  result.loglik = -current->value * static_cast<double>(moments.n);

  bool ok = result.gradient_norm < options.gradient_tolerance;
  if (!ok) {
    result.warnings.push_back(stalled ? "line search stalled before convergence"
                                      : "maximum iterations reached before convergence");
  }
  for (Eigen::Index j = 0; j < result.params.theta.size(); ++j) {
    if (result.params.theta(j) <= options.heywood_ratio * moments.covariance(j, j)) {
      result.warnings.push_back("Heywood case: error variance of manifest variable " + std::to_string(j + 1) +
                                " at the boundary");
      ok = false;
    }
  }
  const Matrix hessian = mean_log_likelihood_hessian(layout, v, moments);
  const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(hessian, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (!(min_eig < 0.0)) {
    result.warnings.push_back("Hessian of the log-likelihood is not negative definite");
    ok = false;
  }
  if (options.compute_information) {
    try {
      RandomStream rng = RandomStream::derive(options.seed, 0x1f0);
      const InformationEstimate info =
          expected_information(layout, result.params, options.information_draws, rng, options.workers);
      result.information = info.information;
      result.inv_information = info.inverse;
    } catch (const IdentificationError& e) {
      result.warnings.push_back(e.what());
      ok = false;
    }
  }
  result.converged = ok;
  return result;
}

Matrix mc_information(const ParamLayout& layout, const FactorModel& model, const Matrix& draws, std::size_t workers) {
  if (draws.rows() < 1) throw ConfigurationError("information needs at least one draw");
  const Matrix scores = score_matrix(layout, model, draws, workers);
  Matrix info = blocked_cross_product(scores, scores) / static_cast<double>(draws.rows());
  return 0.5 * (info + info.transpose());
}

InformationEstimate invert_information(const Matrix& information) {
  InformationEstimate out;
  out.information = information;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(information);
  const Vector& values = eig.eigenvalues();
  const double largest = values(values.size() - 1);
  const double smallest = values(0);
  out.condition_number = smallest > 0.0 ? largest / smallest : std::numeric_limits<double>::infinity();
  if (!(out.condition_number <= kMaxInformationCondition)) {
    throw IdentificationError("information matrix is near-singular (condition number " +
                              std::to_string(out.condition_number) + ")");
  }
  out.inverse = eig.eigenvectors() * values.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  out.inverse = 0.5 * (out.inverse + out.inverse.transpose()).eval();
  return out;
}

InformationEstimate expected_information(const ParamLayout& layout, const ParamSet& params, std::size_t draws,
                                         RandomStream& rng, std::size_t workers) {
  if (draws < 1000) throw ConfigurationError("expected information needs at least 1000 draws");
  const FactorModel model(params);
  const Matrix y = simulate_observations(params, draws, rng);
  return invert_information(mc_information(layout, model, y, workers));
}

Matrix simulate_observations(const ParamSet& params, std::size_t n, RandomStream& rng, Matrix* latents) {
  const auto m = params.lambda.rows();
  const auto d = params.lambda.cols();
  Eigen::LLT<Matrix> llt(params.phi);
  if (llt.info() != Eigen::Success) throw DegenerateCovarianceError("latent covariance is not positive definite");
  const Matrix phi_root = llt.matrixL();
  const Vector sd = params.theta.cwiseSqrt();
  Matrix y(static_cast<Eigen::Index>(n), m);
  if (latents) latents->resize(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    const Vector x = phi_root * rng.normal_vector(d);
    const Vector e = rng.normal_vector(m);
    y.row(i) = (params.nu + params.lambda * x + sd.cwiseProduct(e)).transpose();
    if (latents) latents->row(i) = x.transpose();
  }
  return y;
}

DataMatrix simulate_data(const ParamSet& params, std::size_t n, RandomStream& rng) {
  DataMatrix out;
  out.values = simulate_observations(params, n, rng);
  out.column_names.reserve(params.m());
  for (std::size_t j = 0; j < params.m(); ++j) out.column_names.push_back("y" + std::to_string(j + 1));
  return out;
}

}  // namespace gresfa
