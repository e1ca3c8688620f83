#include "gresfa/data.hpp"

#include "gresfa/error.hpp"

namespace gresfa {

SampleMoments sample_moments(const DataMatrix& data) {
  SampleMoments out;
  out.n = data.n();
  if (out.n == 0) throw DataError("data matrix has no rows");
  out.mean = data.values.colwise().mean().transpose();
  const Matrix centered = data.values.rowwise() - out.mean.transpose();
  out.covariance = (centered.transpose() * centered) / static_cast<double>(out.n);
  return out;
}

std::vector<std::string> validate_data(const DataMatrix& data) {
  if (data.n() == 0 || data.m() == 0) throw DataError("data matrix is empty");
  if (!data.values.allFinite()) throw DataError("data matrix contains non-finite values");
  const SampleMoments moments = sample_moments(data);
  for (Eigen::Index j = 0; j < moments.covariance.rows(); ++j) {
    if (!(moments.covariance(j, j) > 0.0)) {
      const auto idx = static_cast<std::size_t>(j);
      const std::string name = idx < data.column_names.size() ? data.column_names[idx] : std::to_string(idx + 1);
      throw DataError("column '" + name + "' has zero variance");
    }
  }
  std::vector<std::string> warnings;
  if (data.n() <= data.m()) warnings.push_back("sample size does not exceed the number of manifest variables");
  return warnings;
}

}  // namespace gresfa
