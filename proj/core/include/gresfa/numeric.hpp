#pragma once

#include "gresfa/model_spec.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gresfa {

/// Elementwise Neumaier-compensated running sum of equally shaped matrices.
class CompensatedSum {
 public:
  CompensatedSum(Eigen::Index rows, Eigen::Index cols);

  void add(const Matrix& term);
  Matrix value() const { return sum_ + compensation_; }

 private:
  Matrix sum_;
  Matrix compensation_;
};

/// Row-block size used by every Monte Carlo reduction. Fixed so results do
/// not depend on the number of workers.
inline constexpr Eigen::Index kReductionBlock = 512;

/// a^T b accumulated over fixed row blocks with compensated summation.
Matrix blocked_cross_product(const Matrix& a, const Matrix& b);
/// Column sums of `a` accumulated over fixed row blocks with compensation.
Vector blocked_column_sum(const Matrix& a);

/// Two-sided p-value of a standard normal statistic.
double normal_two_sided_p(double z);
/// Upper-tail probability of chi-square with `df` degrees of freedom.
double chi2_survival(double x, double df);
/// Upper alpha quantile of chi-square with `df` degrees of freedom.
double chi2_upper_quantile(double alpha, double df);
/// Upper alpha/2 quantile of the standard normal.
double normal_two_sided_critical(double alpha);

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Work items must
/// be independent; the first exception thrown is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gresfa
