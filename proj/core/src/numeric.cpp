#include "gresfa/numeric.hpp"

#include "gresfa/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <cmath>

namespace gresfa {

CompensatedSum::CompensatedSum(Eigen::Index rows, Eigen::Index cols)
    : sum_(Matrix::Zero(rows, cols)), compensation_(Matrix::Zero(rows, cols)) {}

void CompensatedSum::add(const Matrix& term) {
  if (term.rows() != sum_.rows() || term.cols() != sum_.cols()) throw DimensionError("compensated sum shape mismatch");
  for (Eigen::Index c = 0; c < sum_.cols(); ++c) {
    for (Eigen::Index r = 0; r < sum_.rows(); ++r) {
      const double s = sum_(r, c);
      const double x = term(r, c);
      const double t = s + x;
      if (std::abs(s) >= std::abs(x)) {
        compensation_(r, c) += (s - t) + x;
      } else {
        compensation_(r, c) += (x - t) + s;
      }
      sum_(r, c) = t;
    }
  }
}

Matrix blocked_cross_product(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("cross product needs equal row counts");
  CompensatedSum total(a.cols(), b.cols());
  for (Eigen::Index start = 0; start < a.rows(); start += kReductionBlock) {
    const Eigen::Index len = std::min(kReductionBlock, a.rows() - start);
    total.add(a.middleRows(start, len).transpose() * b.middleRows(start, len));
  }
  return total.value();
}

Vector blocked_column_sum(const Matrix& a) {
  CompensatedSum total(a.cols(), 1);
  for (Eigen::Index start = 0; start < a.rows(); start += kReductionBlock) {
    const Eigen::Index len = std::min(kReductionBlock, a.rows() - start);
    total.add(a.middleRows(start, len).colwise().sum().transpose());
  }
  return total.value();
}

double normal_two_sided_p(double z) {
  const boost::math::normal_distribution<double> standard;
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(standard, std::abs(z))));
}

double chi2_survival(double x, double df) {
  if (x <= 0.0) return 1.0;
  const boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::cdf(boost::math::complement(dist, x));
}

double chi2_upper_quantile(double alpha, double df) {
  const boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

double normal_two_sided_critical(double alpha) {
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(boost::math::complement(standard, alpha / 2.0));
}

}  // namespace gresfa
