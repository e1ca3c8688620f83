#include "gresfa/batteries.hpp"

#include "gresfa/error.hpp"

#include <cmath>

namespace gresfa {
namespace {

constexpr double kCoordinateTolerance = 1e-9;

void check_item(std::size_t item, std::size_t m) {
  if (item >= m) {
    throw IndexError("manifest variable " + std::to_string(item + 1) + " is out of range 1.." + std::to_string(m));
  }
}

void check_observation(const Vector& y, std::size_t item) {
  if (static_cast<std::size_t>(y.size()) <= item) throw IndexError("observation is shorter than the tested item");
}

Vector axis(const GridDim& dim) {
  if (dim.count == 1) return Vector::Constant(1, dim.lo);
  return Vector::LinSpaced(static_cast<Eigen::Index>(dim.count), dim.lo, dim.hi);
}

Vector lv_density(const Matrix& points, const FactorModel& model) {
  Vector out(points.rows());
  model.lv_log_density_grid(points, out);
  return out.array().exp().matrix();
}

void posterior_weights(const Vector& y, const FactorModel& model, const Matrix& points, Eigen::Ref<Vector> out) {
  model.posterior_log_density_grid(y, points, out);
  out = out.array().exp().matrix();
}

Vector conditional_means(const Matrix& points, const FactorModel& model, std::size_t item) {
  const auto j = static_cast<Eigen::Index>(item);
  return (points * model.params().lambda.row(j).transpose()).array() + model.params().nu(j);
}

ResidualProblem ratio_problem(std::string label, std::shared_ptr<const SummaryBattery> battery, const LvGrid& grid) {
  ResidualProblem p;
  p.label = std::move(label);
  p.battery = std::move(battery);
  p.transformation = std::make_shared<RatioTransformation>(grid.size());
  p.coordinates = grid.points;
  p.summary_subset = grid.summary_subset;
  return p;
}

}  // namespace

LvGrid make_grid(const std::vector<GridDim>& dims) {
  if (dims.empty()) throw ConfigurationError("grid needs at least one dimension");
  std::size_t total = 1;
  for (const auto& dim : dims) {
    if (dim.count == 0) throw ConfigurationError("grid count must be at least 1");
    if (!(dim.lo < dim.hi)) throw ConfigurationError("grid bounds need lo < hi");
    total *= dim.count;
  }
  LvGrid grid;
  grid.dims = dims;
  grid.points.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(dims.size()));
  std::vector<Vector> axes;
  for (const auto& dim : dims) axes.push_back(axis(dim));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t k = dims.size(); k-- > 0;) {
      const std::size_t pos = rest % dims[k].count;
      rest /= dims[k].count;
      grid.points(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(k)) = axes[k](static_cast<Eigen::Index>(pos));
    }
  }
  return grid;
}

void set_summary_subgrid(LvGrid& grid, const std::vector<GridDim>& sub) {
  if (sub.size() != grid.dimension()) throw DimensionError("summary grid dimension differs from the grid");
  const LvGrid small = make_grid(sub);
  std::vector<std::size_t> subset;
  subset.reserve(small.size());
  for (Eigen::Index s = 0; s < small.points.rows(); ++s) {
    bool found = false;
    for (Eigen::Index g = 0; g < grid.points.rows(); ++g) {
      if ((grid.points.row(g) - small.points.row(s)).cwiseAbs().maxCoeff() <= kCoordinateTolerance) {
        subset.push_back(static_cast<std::size_t>(g));
        found = true;
        break;
      }
    }
    if (!found) throw ConfigurationError("summary grid point is not on the evaluation grid");
  }
  grid.summary_subset = std::move(subset);
}

void use_all_for_summary(LvGrid& grid) {
  grid.summary_subset.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) grid.summary_subset[i] = i;
}

LvGrid default_grid(std::size_t d) {
  if (d == 1) {
    LvGrid grid = make_grid({{-3.0, 3.0, 31}});
    set_summary_subgrid(grid, {{-2.0, 2.0, 11}});
    return grid;
  }
  if (d == 2) {
    LvGrid grid = make_grid({{-3.0, 3.0, 19}, {-3.0, 3.0, 19}});
    set_summary_subgrid(grid, {{-2.0, 2.0, 7}, {-2.0, 2.0, 7}});
    return grid;
  }
  throw DimensionError("default grids exist for d = 1 and d = 2 only");
}

LvGrid full_summary_grid(std::size_t d) {
  if (d == 0) throw DimensionError("grid needs at least one dimension");
  LvGrid grid = make_grid(std::vector<GridDim>(d, GridDim{-3.0, 3.0, 31}));
  use_all_for_summary(grid);
  return grid;
}

std::string_view battery_kind_name(BatteryKind kind) {
  switch (kind) {
    case BatteryKind::lv_density:
      return "lv-density";
    case BatteryKind::mv_linearity:
      return "linearity";
    case BatteryKind::mv_homoscedasticity:
      return "variance";
    case BatteryKind::mv_linearity_direct:
      return "linearity-direct";
  }
  return "unknown";
}

void LvDensityBattery::evaluate(const Vector& y, const FactorModel& model, Eigen::Ref<Vector> out) const {
  posterior_weights(y, model, points_, out);
}

std::optional<Vector> LvDensityBattery::closed_form_eta(const FactorModel& model) const {
  return lv_density(points_, model);
}

void MvLinearityBattery::evaluate(const Vector& y, const FactorModel& model, Eigen::Ref<Vector> out) const {
  check_observation(y, item_);
  const Eigen::Index q = points_.rows();
  posterior_weights(y, model, points_, out.tail(q));
  out.head(q) = y(static_cast<Eigen::Index>(item_)) * out.tail(q);
}

std::optional<Vector> MvLinearityBattery::closed_form_eta(const FactorModel& model) const {
  check_item(item_, model.m());
  const Eigen::Index q = points_.rows();
  const Vector dens = lv_density(points_, model);
  Vector out(2 * q);
  out.head(q) = dens.cwiseProduct(conditional_means(points_, model, item_));
  out.tail(q) = dens;
  return out;
}

void MvHomoscedasticityBattery::evaluate(const Vector& y, const FactorModel& model, Eigen::Ref<Vector> out) const {
  check_observation(y, item_);
  const Eigen::Index q = points_.rows();
  posterior_weights(y, model, points_, out.tail(q));
  const Vector dev = (y(static_cast<Eigen::Index>(item_)) - conditional_means(points_, model, item_).array()).matrix();
  out.head(q) = dev.cwiseAbs2().cwiseProduct(out.tail(q));
}

std::optional<Vector> MvHomoscedasticityBattery::closed_form_eta(const FactorModel& model) const {
  check_item(item_, model.m());
  const Eigen::Index q = points_.rows();
  const Vector dens = lv_density(points_, model);
  Vector out(2 * q);
  out.head(q) = dens * model.params().theta(static_cast<Eigen::Index>(item_));
  out.tail(q) = dens;
  return out;
}

void MvLinearityDirectBattery::evaluate(const Vector& y, const FactorModel& model, Eigen::Ref<Vector> out) const {
  check_observation(y, item_);
  Vector prior(points_.rows());
  model.lv_log_density_grid(points_, prior);
  model.posterior_log_density_grid(y, points_, out);
  out = (out - prior).array().exp().matrix() * y(static_cast<Eigen::Index>(item_));
}

std::optional<Vector> MvLinearityDirectBattery::closed_form_eta(const FactorModel& model) const {
  check_item(item_, model.m());
  return conditional_means(points_, model, item_);
}

ResidualProblem lv_density_problem(const LvGrid& grid) {
  ResidualProblem p;
  p.label = "lv-density";
  p.battery = std::make_shared<LvDensityBattery>(grid.points);
  p.transformation = std::make_shared<IdentityTransformation>(grid.size());
  p.coordinates = grid.points;
  p.summary_subset = grid.summary_subset;
  return p;
}

ResidualProblem mv_linearity_problem(const LvGrid& grid, std::size_t item, std::size_t m) {
  check_item(item, m);
  return ratio_problem("linearity:y" + std::to_string(item + 1), std::make_shared<MvLinearityBattery>(grid.points, item),
                       grid);
}

ResidualProblem mv_homoscedasticity_problem(const LvGrid& grid, std::size_t item, std::size_t m) {
  check_item(item, m);
  return ratio_problem("variance:y" + std::to_string(item + 1),
                       std::make_shared<MvHomoscedasticityBattery>(grid.points, item), grid);
}

ResidualProblem mv_linearity_direct_problem(const LvGrid& grid, std::size_t item, std::size_t m) {
  check_item(item, m);
  ResidualProblem p;
  p.label = "linearity-direct:y" + std::to_string(item + 1);
  p.battery = std::make_shared<MvLinearityDirectBattery>(grid.points, item);
  p.transformation = std::make_shared<IdentityTransformation>(grid.size());
  p.coordinates = grid.points;
  p.summary_subset = grid.summary_subset;
  return p;
}

ResidualProblem make_problem(BatteryKind kind, const LvGrid& grid, std::size_t item, std::size_t m) {
  switch (kind) {
    case BatteryKind::lv_density:
      return lv_density_problem(grid);
    case BatteryKind::mv_linearity:
      return mv_linearity_problem(grid, item, m);
    case BatteryKind::mv_homoscedasticity:
      return mv_homoscedasticity_problem(grid, item, m);
    case BatteryKind::mv_linearity_direct:
      return mv_linearity_direct_problem(grid, item, m);
  }
  throw ConfigurationError("unknown battery kind");
}

std::vector<SliceProfile> slice_report(const std::vector<ReportPoint>& points, std::size_t d) {
  if (d == 0 || d > 2) throw DimensionError("slices are defined for one or two latent dimensions");
  for (const auto& pt : points) {
    if (static_cast<std::size_t>(pt.coordinates.size()) != d) throw DimensionError("point dimension differs from d");
  }
  std::vector<SliceProfile> out;
  if (points.empty()) return out;
  if (d == 1) {
    out.push_back(SliceProfile{0, points});
    return out;
  }
  for (std::size_t t = 0; t < 2; ++t) {
    SliceProfile profile{t, {}};
    const Eigen::Index other = t == 0 ? 1 : 0;
    for (const auto& pt : points) {
      if (std::abs(pt.coordinates(other)) <= kCoordinateTolerance) profile.points.push_back(pt);
    }
    out.push_back(std::move(profile));
  }
  return out;
}

std::vector<SliceProfile> slice_report(const TestReport& report) {
  if (report.points.empty()) return {};
  return slice_report(report.points, static_cast<std::size_t>(report.points.front().coordinates.size()));
}

}  // namespace gresfa
