#include "gresfa/baseline.hpp"

#include "gresfa/error.hpp"
#include "gresfa/numeric.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace gresfa {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_inputs(const FitResult& fit, const DataMatrix& data) {
  if (!fit.converged) throw ConvergenceError("fit indices need a converged fit");
  if (data.m() != fit.spec.m) throw DimensionError("data width does not match the fitted model");
  if (data.n() != fit.n) throw DataError("data row count differs from the fitted sample size");
}

/// Moment matrix the model reproduces: covariance, or raw second moments when
/// intercepts are fixed at zero.
Matrix target_moments(const FitResult& fit, const SampleMoments& moments) {
  if (fit.spec.mean_structure) return moments.covariance;
  return moments.covariance + moments.mean * moments.mean.transpose();
}

double saturated_loglik(const Matrix& s, std::size_t n) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) throw DegenerateCovarianceError("sample covariance is not positive definite");
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const auto m = static_cast<double>(s.rows());
  return -0.5 * static_cast<double>(n) * (m * kLog2Pi + log_det + m);
}

double chi2_p(double chi2, long df) {
  if (df <= 0) return chi2 > 0.0 ? 0.0 : 1.0;
  return chi2_survival(chi2, static_cast<double>(df));
}

}  // namespace

LrTest lr_chi2(const FitResult& fit, const DataMatrix& data) {
  check_inputs(fit, data);
  const SampleMoments moments = sample_moments(data);
  const auto m = static_cast<long>(fit.spec.m);
  const long moment_count = fit.spec.mean_structure ? m * (m + 3) / 2 : m * (m + 1) / 2;
  const long q = static_cast<long>(ParamLayout(fit.spec).size());
  LrTest out;
  out.df = moment_count - q;
  if (out.df < 0) throw SpecError("model has more free parameters than sample moments");
  const double l_sat = saturated_loglik(target_moments(fit, moments), moments.n);
  out.chi2 = std::max(0.0, 2.0 * (l_sat - fit.loglik));
  out.p = chi2_p(out.chi2, out.df);
  return out;
}

BaselineReport fit_indices(const FitResult& fit, const DataMatrix& data) {
  const LrTest lr = lr_chi2(fit, data);
  const SampleMoments moments = sample_moments(data);
  const Matrix s = target_moments(fit, moments);
  const auto m = static_cast<long>(fit.spec.m);
  const double n = static_cast<double>(moments.n);

  BaselineReport out;
  out.chi2 = lr.chi2;
  out.df = lr.df;
  out.p = lr.p;

  // Independence model: diagonal covariance, its ML solution is diag(S).
  const double l_sat = saturated_loglik(s, moments.n);
  double l_indep = 0.0;
  for (Eigen::Index j = 0; j < s.rows(); ++j) l_indep += -0.5 * n * (kLog2Pi + std::log(s(j, j)) + 1.0);
  out.baseline_chi2 = std::max(0.0, 2.0 * (l_sat - l_indep));
  out.baseline_df = m * (m - 1) / 2;

  const double excess = std::max(out.chi2 - static_cast<double>(out.df), 0.0);
  const double baseline_excess = std::max(out.baseline_chi2 - static_cast<double>(out.baseline_df), 0.0);
  const double denom = std::max(baseline_excess, excess);
  out.cfi = denom > 0.0 ? 1.0 - excess / denom : 1.0;

  if (out.df > 0 && out.baseline_df > 0) {
    const double ratio_b = out.baseline_chi2 / static_cast<double>(out.baseline_df);
    const double ratio = out.chi2 / static_cast<double>(out.df);
    out.tli = ratio_b != 1.0 ? (ratio_b - ratio) / (ratio_b - 1.0) : 1.0;
    out.rmsea = std::sqrt(excess / (static_cast<double>(out.df) * n));
  } else {
    out.tli = 1.0;
    out.rmsea = 0.0;
  }

  const Matrix sigma = fit.params.implied_covariance();
  double sum = 0.0;
  long count = 0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double r = (s(i, j) - sigma(i, j)) / std::sqrt(s(i, i) * s(j, j));
      sum += r * r;
      ++count;
    }
  }
  out.srmr = std::sqrt(sum / static_cast<double>(count));
  return out;
}

}  // namespace gresfa
