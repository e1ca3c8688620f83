#pragma once

#include "gresfa/data.hpp"
#include "gresfa/factor_model.hpp"
#include "gresfa/parametrization.hpp"
#include "gresfa/random.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gresfa {

struct OptimOptions {
  std::size_t max_iter = 500;
  /// Convergence requires max |gradient of l_n / n| below this value.
  double gradient_tolerance = 1e-4;
  /// The optimizer keeps iterating until this tighter level, when reachable.
  double polish_tolerance = 1e-9;
  /// Error variances below this fraction of the column variance are Heywood cases.
  double heywood_ratio = 1e-4;
  bool compute_information = true;
  std::size_t information_draws = 10000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

struct FitResult {
  ModelSpec spec;
  ParamSet params;
  Vector free_params;
  std::size_t n = 0;
  double loglik = 0.0;
  bool converged = false;
  /// Max-abs gradient of the mean log-likelihood in the free-parameter scale.
  double gradient_norm = 0.0;
  std::size_t n_iter = 0;
  /// Per-observation expected information and its inverse (empty when not computed).
  Matrix information;
  Matrix inv_information;
  std::vector<std::string> warnings;
};

struct InformationEstimate {
  Matrix information;
  Matrix inverse;
  double condition_number = 0.0;
};

/// Information matrices with a condition number above this are rejected.
inline constexpr double kMaxInformationCondition = 1e12;

double log_likelihood(const ParamSet& params, const DataMatrix& data);
double log_likelihood(const FactorModel& model, const DataMatrix& data);

/// Gradient of log f(y) with respect to the free-parameter vector.
Vector score(const ParamLayout& layout, const FactorModel& model, const Vector& y);
Vector score(const ParamLayout& layout, const ParamSet& params, const Vector& y);
/// Per-row scores of `observations` (n x m), returned as n x q.
Matrix score_matrix(const ParamLayout& layout, const FactorModel& model, const Matrix& observations,
                    std::size_t workers = 1);

/// Gradient of l_n / n computed from sample moments (equals the mean score).
Vector mean_log_likelihood_gradient(const ParamLayout& layout, const FactorModel& model, const SampleMoments& moments);
double mean_log_likelihood(const FactorModel& model, const SampleMoments& moments);

FitResult fit_ml(const DataMatrix& data, const ModelSpec& spec, const OptimOptions& options = {});

/// Hessian of l_n / n at `v` by central differences of the analytic gradient.
Matrix mean_log_likelihood_hessian(const ParamLayout& layout, const Vector& v, const SampleMoments& moments);

/// Average outer product of per-draw scores, with no inversion.
Matrix mc_information(const ParamLayout& layout, const FactorModel& model, const Matrix& draws, std::size_t workers = 1);
/// Symmetric inverse; throws IdentificationError if the condition number
/// exceeds kMaxInformationCondition.
InformationEstimate invert_information(const Matrix& information);
/// Monte Carlo expected information from `draws` model simulations.
InformationEstimate expected_information(const ParamLayout& layout, const ParamSet& params, std::size_t draws,
                                         RandomStream& rng, std::size_t workers = 1);

/// n i.i.d. draws y = nu + Lambda x + e with x ~ N(0, Phi), e ~ N(0, Theta).
DataMatrix simulate_data(const ParamSet& params, std::size_t n, RandomStream& rng);
/// Same draws, returning latent values alongside.
Matrix simulate_observations(const ParamSet& params, std::size_t n, RandomStream& rng, Matrix* latents = nullptr);

}  // namespace gresfa
