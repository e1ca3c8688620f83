#pragma once

#include "gresfa/model_spec.hpp"

#include <string>
#include <vector>

namespace gresfa {

/// n x m matrix of manifest-variable observations, one row per respondent.
struct DataMatrix {
  Matrix values;
  std::vector<std::string> column_names;

  std::size_t n() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t m() const { return static_cast<std::size_t>(values.cols()); }
};

/// Column means and divisor-n covariance of a data matrix.
struct SampleMoments {
  Vector mean;
  Matrix covariance;
  std::size_t n = 0;
};

SampleMoments sample_moments(const DataMatrix& data);

/// Throws DataError when the matrix is empty, has non-finite entries or has a
/// zero-variance column. Returns soft warnings (e.g. n <= m).
std::vector<std::string> validate_data(const DataMatrix& data);

}  // namespace gresfa
