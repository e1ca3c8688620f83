#pragma once

#include "gresfa/data.hpp"
#include "gresfa/estimation.hpp"

namespace gresfa {

struct LrTest {
  double chi2 = 0.0;
  long df = 0;
  double p = 1.0;
};

/// Likelihood-ratio test against the saturated model (sample mean and
/// divisor-n covariance). Without a mean structure the saturated model is the
/// moment matrix about zero and df counts covariance moments only.
LrTest lr_chi2(const FitResult& fit, const DataMatrix& data);

struct BaselineReport {
  double chi2 = 0.0;
  long df = 0;
  double p = 1.0;
  /// Raw values; CFI and TLI are not clamped to [0, 1].
  double cfi = 1.0;
  double tli = 1.0;
  double srmr = 0.0;
  double rmsea = 0.0;
  /// Independence model with free means.
  double baseline_chi2 = 0.0;
  long baseline_df = 0;
};

/// LR test plus CFI, TLI, SRMR and unadjusted RMSEA. SRMR uses residual
/// covariances and variances standardized by the sample variances, means
/// excluded.
BaselineReport fit_indices(const FitResult& fit, const DataMatrix& data);

}  // namespace gresfa
