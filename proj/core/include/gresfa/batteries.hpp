#pragma once

#include "gresfa/residuals.hpp"

#include <string_view>

namespace gresfa {

struct GridDim {
  double lo = -3.0;
  double hi = 3.0;
  std::size_t count = 1;
};

/// Evenly spaced latent points, outer product in row-major dimension order
/// (the last dimension varies fastest).
struct LvGrid {
  std::vector<GridDim> dims;
  Matrix points;  // Q x d
  std::vector<std::size_t> summary_subset;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t dimension() const { return dims.size(); }
};

/// Throws ConfigurationError when some lo >= hi or count == 0. The summary
/// subset is empty.
LvGrid make_grid(const std::vector<GridDim>& dims);

/// Sets the summary subset to the grid points that coincide with the points
/// of the `sub` grid. Throws ConfigurationError if any of them is missing.
void set_summary_subgrid(LvGrid& grid, const std::vector<GridDim>& sub);
/// Every grid point enters the summary statistic.
void use_all_for_summary(LvGrid& grid);

/// 31 points on [-3, 3] with the 11-point [-2, 2] summary subgrid for d = 1;
/// 19 x 19 on [-3, 3]^2 with the 7 x 7 [-2, 2]^2 subgrid for d = 2.
LvGrid default_grid(std::size_t d);
/// 31 points on [-3, 3] per dimension, all used for the summary statistic.
LvGrid full_summary_grid(std::size_t d);

enum class BatteryKind { lv_density, mv_linearity, mv_homoscedasticity, mv_linearity_direct };

std::string_view battery_kind_name(BatteryKind kind);

/// H_l(y) = f(x_l | y).
class LvDensityBattery final : public SummaryBattery {
 public:
  explicit LvDensityBattery(Matrix points) : points_(std::move(points)) {}
  std::size_t size() const override { return static_cast<std::size_t>(points_.rows()); }
  std::string name() const override { return "lv-density"; }
  void evaluate(const Vector& y, const FactorModel& model, Eigen::Ref<Vector> out) const override;
  std::optional<Vector> closed_form_eta(const FactorModel& model) const override;

 private:
  Matrix points_;
};

/// H_l(y) = y_j f(x_l | y), H_{Q+l}(y) = f(x_l | y).
class MvLinearityBattery final : public SummaryBattery {
 public:
  MvLinearityBattery(Matrix points, std::size_t item) : points_(std::move(points)), item_(item) {}
  std::size_t size() const override { return 2 * static_cast<std::size_t>(points_.rows()); }
  std::string name() const override { return "linearity"; }
  void evaluate(const Vector& y, const FactorModel& model, Eigen::Ref<Vector> out) const override;
  std::optional<Vector> closed_form_eta(const FactorModel& model) const override;

 private:
  Matrix points_;
  std::size_t item_;
};

/// H_l(y) = (y_j - mu_j(x_l))^2 f(x_l | y), H_{Q+l}(y) = f(x_l | y).
class MvHomoscedasticityBattery final : public SummaryBattery {
 public:
  MvHomoscedasticityBattery(Matrix points, std::size_t item) : points_(std::move(points)), item_(item) {}
  std::size_t size() const override { return 2 * static_cast<std::size_t>(points_.rows()); }
  std::string name() const override { return "variance"; }
  void evaluate(const Vector& y, const FactorModel& model, Eigen::Ref<Vector> out) const override;
  std::optional<Vector> closed_form_eta(const FactorModel& model) const override;

 private:
  Matrix points_;
  std::size_t item_;
};

/// H_l(y) = y_j f(y | x_l) / f(y), whose expectation is mu_j(x_l).
class MvLinearityDirectBattery final : public SummaryBattery {
 public:
  MvLinearityDirectBattery(Matrix points, std::size_t item) : points_(std::move(points)), item_(item) {}
  std::size_t size() const override { return static_cast<std::size_t>(points_.rows()); }
  std::string name() const override { return "linearity-direct"; }
  void evaluate(const Vector& y, const FactorModel& model, Eigen::Ref<Vector> out) const override;
  std::optional<Vector> closed_form_eta(const FactorModel& model) const override;

 private:
  Matrix points_;
  std::size_t item_;
};

/// Problem builders. `item` is a 0-based manifest variable index and is
/// checked against `m`.
ResidualProblem lv_density_problem(const LvGrid& grid);
ResidualProblem mv_linearity_problem(const LvGrid& grid, std::size_t item, std::size_t m);
ResidualProblem mv_homoscedasticity_problem(const LvGrid& grid, std::size_t item, std::size_t m);
ResidualProblem mv_linearity_direct_problem(const LvGrid& grid, std::size_t item, std::size_t m);
ResidualProblem make_problem(BatteryKind kind, const LvGrid& grid, std::size_t item, std::size_t m);

struct SliceProfile {
  /// Dimension that varies along the profile.
  std::size_t dimension = 0;
  std::vector<ReportPoint> points;
};

/// Profiles along each latent dimension with the other coordinate at 0. A
/// one-dimensional report passes through as a single profile.
std::vector<SliceProfile> slice_report(const std::vector<ReportPoint>& points, std::size_t d);
std::vector<SliceProfile> slice_report(const TestReport& report);

}  // namespace gresfa
