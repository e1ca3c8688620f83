#pragma once

#include "gresfa/data.hpp"
#include "gresfa/estimation.hpp"
#include "gresfa/factor_model.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gresfa {

/// A vector H(y; xi) of k summary quantities evaluated per observation.
class SummaryBattery {
 public:
  virtual ~SummaryBattery() = default;

  virtual std::size_t size() const = 0;
  virtual std::string name() const = 0;
  /// Writes H(y; xi) into `out` (length size()).
  virtual void evaluate(const Vector& y, const FactorModel& model, Eigen::Ref<Vector> out) const = 0;
  /// Population expectation E[H] under the model, when available in closed form.
  virtual std::optional<Vector> closed_form_eta(const FactorModel& /*model*/) const { return std::nullopt; }
};

/// Smooth map phi: R^k -> R^k' applied to both the sample and population
/// averages before differencing.
class Transformation {
 public:
  virtual ~Transformation() = default;

  virtual std::size_t input_size() const = 0;
  virtual std::size_t output_size() const = 0;
  virtual Vector apply(const Vector& g) const = 0;
  virtual Matrix jacobian(const Vector& g) const = 0;
  /// True when component r of apply(g_hat) is numerically meaningless for a
  /// sample of size n.
  virtual bool unstable_component(const Vector& /*g_hat*/, std::size_t /*n*/, std::size_t /*r*/) const {
    return false;
  }
};

class IdentityTransformation final : public Transformation {
 public:
  explicit IdentityTransformation(std::size_t k) : k_(k) {}
  std::size_t input_size() const override { return k_; }
  std::size_t output_size() const override { return k_; }
  Vector apply(const Vector& g) const override;
  Matrix jacobian(const Vector& g) const override;

 private:
  std::size_t k_;
};

/// phi(g) = (g_1 / g_{Q+1}, ..., g_Q / g_{2Q}).
class RatioTransformation final : public Transformation {
 public:
  /// Ratio denominators whose sample sum falls below this are unstable.
  static constexpr double kMinDenominatorSum = 1e-300;

  explicit RatioTransformation(std::size_t q) : q_(q) {}
  std::size_t input_size() const override { return 2 * q_; }
  std::size_t output_size() const override { return q_; }
  Vector apply(const Vector& g) const override;
  Matrix jacobian(const Vector& g) const override;
  bool unstable_component(const Vector& g_hat, std::size_t n, std::size_t r) const override;

 private:
  std::size_t q_;
};

/// Evaluation of H at every row of `observations` (n x m), returned as n x k.
Matrix battery_matrix(const SummaryBattery& battery, const FactorModel& model, const Matrix& observations,
                      std::size_t workers = 1);

/// Sample average of H over the rows of `data`.
Vector eta_hat(const SummaryBattery& battery, const DataMatrix& data, const FactorModel& model,
               std::size_t workers = 1);

struct McBudget {
  std::size_t draws = 0;
  std::uint64_t seed = 1;
};

/// Closed-form expectation, or a Monte Carlo average over `fallback.draws`
/// model simulations. Throws ConfigurationError when neither is available.
Vector eta(const SummaryBattery& battery, const FactorModel& model, std::optional<McBudget> fallback = std::nullopt);

/// (1/M) sum_i H_i score_i^T from per-draw rows.
Matrix estimate_A(const Matrix& h_draws, const Matrix& score_draws);
/// Sample covariance of the rows of `h_draws` with divisor M - 1.
Matrix estimate_sigma_H(const Matrix& h_draws);

/// Convenience overloads evaluating H and scores on `draws` (M x m).
Matrix estimate_A(const SummaryBattery& battery, const ParamLayout& layout, const FactorModel& model,
                  const Matrix& draws);
Matrix estimate_sigma_H(const SummaryBattery& battery, const FactorModel& model, const Matrix& draws);

struct AcmDiagnostics {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  /// Max |S - S^T| before symmetrization.
  double symmetrization_delta = 0.0;
  /// Diagonal entries at or below kUnstableVariance.
  std::vector<bool> unstable;
};

struct AcmEstimate {
  Matrix A_hat;
  Matrix sigma_H_hat;
  Matrix inv_info;
  Matrix sigma_phi_hat;
  std::size_t M = 0;
  AcmDiagnostics diagnostics;
};

inline constexpr double kUnstableVariance = 1e-12;

/// jac (-A I^{-1} A^T + Sigma_H) jac^T, symmetrized. A, inv_info and sigma_H
/// are stored in the returned estimate; M is left for the caller.
AcmEstimate assemble_acm(const Matrix& jac, const Matrix& A, const Matrix& inv_info, const Matrix& sigma_H);

struct ZTest {
  double z = 0.0;
  double p = 1.0;
};

/// z = residual / (se / sqrt(n)) with a two-sided normal p-value; empty when
/// se <= 0.
std::optional<ZTest> z_statistic(double residual, double se, std::size_t n);

/// Relative eigenvalue tolerance for "numerically positive".
inline constexpr double kEigenTolerance = 1e-10;

/// U diag(1/w_1, ..., 1/w_s, 0, ...) U^T with eigenvalues sorted descending.
/// Throws RankError when s is 0 or exceeds the numerically positive count.
Matrix truncated_inverse(const Matrix& sigma, std::size_t s);
/// Number of eigenvalues above kEigenTolerance times the largest.
std::size_t numerical_rank(const Matrix& sigma);

struct Chi2Test {
  double T = 0.0;
  std::size_t s = 1;
  double p = 1.0;
};

/// T = n e^T W e referred to chi-square with s degrees of freedom.
Chi2Test chi2_statistic(const Vector& e, const Matrix& sigma, std::size_t n, std::size_t s);

/// One generalized-residual test: battery, transformation and the latent
/// coordinates attached to each transformed component.
struct ResidualProblem {
  std::string label;
  std::shared_ptr<const SummaryBattery> battery;
  std::shared_ptr<const Transformation> transformation;
  /// k' x d; row r holds the latent point behind transformed component r.
  Matrix coordinates;
  /// Components entering the summary statistic; empty means no summary.
  std::vector<std::size_t> summary_subset;
};

struct McConfig {
  std::size_t draws = 10000;
  std::uint64_t seed = 1;
  std::size_t s = 1;
  std::size_t workers = 1;
};

struct ReportPoint {
  Vector coordinates;
  double eta_hat = 0.0;  // transformed sample quantity
  double eta = 0.0;      // transformed model quantity
  double residual = 0.0;
  double se = 0.0;  // sqrt of the ACM diagonal
  double z = 0.0;
  double p = 1.0;
  bool unstable = false;
};

struct SummaryResult {
  double T = 0.0;
  std::size_t s = 1;
  double p = 1.0;
  std::size_t points_used = 0;
};

struct TestReport {
  std::string label;
  std::vector<ReportPoint> points;
  std::optional<SummaryResult> summary;
  std::size_t n = 0;
  std::size_t M = 0;
  std::uint64_t seed = 0;
  std::size_t s = 1;
  std::vector<std::size_t> summary_subset;
  std::vector<std::string> notes;
  AcmEstimate acm;
};

/// Full pipeline for one problem: sample and model averages, transformation,
/// Monte Carlo A / Sigma_H / information from one shared draw set,
/// pointwise z and the summary T. Rejects non-converged fits.
TestReport run_residual_test(const ResidualProblem& problem, const FitResult& fit, const DataMatrix& data,
                             const McConfig& mc);
/// Several problems sharing one draw set and one information estimate.
std::vector<TestReport> run_residual_tests(std::span<const ResidualProblem> problems, const FitResult& fit,
                                           const DataMatrix& data, const McConfig& mc);

}  // namespace gresfa
