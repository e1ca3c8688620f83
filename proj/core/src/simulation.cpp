#include "gresfa/simulation.hpp"

#include "gresfa/error.hpp"
#include "gresfa/numeric.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace gresfa {
namespace {

const double kLoadings[3] = {std::sqrt(0.3), std::sqrt(0.5), std::sqrt(0.7)};

std::vector<std::string> column_names(std::size_t m) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < m; ++j) out.push_back("y" + std::to_string(j + 1));
  return out;
}

bool quadratic_mean(ItemType t) { return t == ItemType::qmcv || t == ItemType::qmlv; }
bool loglinear_variance(ItemType t) { return t == ItemType::lmlv || t == ItemType::qmlv; }

double critical_z(double alpha) { return normal_two_sided_critical(alpha); }

}  // namespace

std::string_view item_type_name(ItemType type) {
  switch (type) {
    case ItemType::lmcv:
      return "LMCV";
    case ItemType::qmcv:
      return "QMCV";
    case ItemType::lmlv:
      return "LMLV";
    case ItemType::qmlv:
      return "QMLV";
  }
  return "unknown";
}

ModelSpec study1_spec() {
  std::vector<std::size_t> cluster(20);
  for (std::size_t j = 0; j < 20; ++j) cluster[j] = j < 10 ? 0 : 1;
  return ModelSpec::independent_cluster(cluster, 2);
}

ParamSet study1_params() {
  ParamSet p;
  p.nu = Vector::Zero(20);
  p.lambda = Matrix::Zero(20, 2);
  for (Eigen::Index j = 0; j < 10; ++j) {
    p.lambda(j, 0) = kLoadings[j % 3];
    p.lambda(10 + j, 1) = kLoadings[j % 3];
  }
  p.phi = (Matrix(2, 2) << 1.0, 0.2, 0.2, 1.0).finished();
  const Matrix implied = p.lambda * p.phi * p.lambda.transpose();
  p.theta = (1.0 - implied.diagonal().array()).matrix();
  return p;
}

SimulatedSample generate_study1(const Study1Config& cfg, RandomStream& rng) {
  const ParamSet params = study1_params();
  SimulatedSample out;
  if (!cfg.misspecified) {
    out.data.values = simulate_observations(params, cfg.n, rng, &out.latents);
    out.data.column_names = column_names(params.m());
    return out;
  }
  Eigen::LLT<Matrix> llt(cfg.mixture_covariance);
  if (llt.info() != Eigen::Success) throw DegenerateCovarianceError("mixture covariance is not positive definite");
  const Matrix root = llt.matrixL();
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const Vector sd = params.theta.cwiseSqrt();
  out.latents.resize(n, 2);
  out.data.values.resize(n, static_cast<Eigen::Index>(params.m()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool first = rng.uniform() < cfg.mixture_weight;
    const Vector x = (first ? cfg.mixture_mean_1 : cfg.mixture_mean_2) + root * rng.normal_vector(2);
    const Vector e = rng.normal_vector(static_cast<Eigen::Index>(params.m()));
    out.latents.row(i) = x.transpose();
    out.data.values.row(i) = (params.nu + params.lambda * x + sd.cwiseProduct(e)).transpose();
  }
  out.data.column_names = column_names(params.m());
  return out;
}

ModelSpec study2_spec() { return ModelSpec::one_factor(10); }

std::vector<ItemType> study2_items(bool misspecified) {
  std::vector<ItemType> items(10, ItemType::lmcv);
  if (misspecified) {
    items[7] = ItemType::qmcv;
    items[8] = ItemType::lmlv;
    items[9] = ItemType::qmlv;
  }
  return items;
}

ParamSet study2_params(bool misspecified) {
  const auto items = study2_items(misspecified);
  ParamSet p;
  p.nu = Vector::Zero(10);
  p.lambda = Matrix::Zero(10, 1);
  for (Eigen::Index j = 0; j < 10; ++j) {
    p.lambda(j, 0) = items[static_cast<std::size_t>(j)] == ItemType::lmcv ? kLoadings[j % 3] : std::sqrt(0.5);
  }
  p.phi = Matrix::Identity(1, 1);
  p.theta = (1.0 - p.lambda.col(0).array().square()).matrix();
  return p;
}

SimulatedSample generate_study2(const Study2Config& cfg, RandomStream& rng) {
  const ParamSet params = study2_params(cfg.misspecified);
  SimulatedSample out;
  if (!cfg.misspecified) {
    out.data.values = simulate_observations(params, cfg.n, rng, &out.latents);
    out.data.column_names = column_names(params.m());
    return out;
  }
  const auto items = study2_items(true);
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto m = static_cast<Eigen::Index>(params.m());
  out.latents.resize(n, 1);
  out.data.values.resize(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = rng.normal();
    out.latents(i, 0) = x;
    for (Eigen::Index j = 0; j < m; ++j) {
      const ItemType type = items[static_cast<std::size_t>(j)];
      double mean = params.nu(j) + params.lambda(j, 0) * x;
      if (quadratic_mean(type)) mean += cfg.kappa * x * x;
      double var = params.theta(j);
      if (loglinear_variance(type)) var = std::exp(std::log(params.theta(j)) + cfg.gamma1 * x);
      out.data.values(i, j) = mean + std::sqrt(var) * rng.normal();
    }
  }
  out.data.column_names = column_names(params.m());
  return out;
}

std::vector<StatisticSpec> default_statistics(Study study, bool misspecified) {
  if (study == Study::one) return {{BatteryKind::lv_density, 0}};
  std::vector<std::size_t> items = misspecified ? std::vector<std::size_t>{1, 7, 8, 9} : std::vector<std::size_t>{1};
  std::vector<StatisticSpec> out;
  for (std::size_t j : items) {
    out.push_back({BatteryKind::mv_linearity, j});
    out.push_back({BatteryKind::mv_homoscedasticity, j});
  }
  return out;
}

RandomStream replication_stream(std::uint64_t master, std::size_t rep) {
  return RandomStream::derive(master, 0x5eed, rep);
}

std::uint64_t replication_mc_seed(std::uint64_t master, std::size_t rep) {
  return RandomStream::derive(master, 0xacc, rep).engine()();
}

ReplicationSet run_replications(const RejectionStudyConfig& cfg) {
  if (cfg.reps < 1) throw ConfigurationError("at least one replication is required");
  if (cfg.n < 2) throw ConfigurationError("sample size must be at least 2");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigurationError("alpha must lie in (0, 1)");
  const ModelSpec spec = cfg.study == Study::one ? study1_spec() : study2_spec();

  ReplicationSet set;
  set.config = cfg;
  set.grid = cfg.grid ? *cfg.grid : default_grid(spec.d);
  if (set.grid.dimension() != spec.d) throw DimensionError("grid dimension differs from the study's factor count");
  const auto stats = cfg.statistics.empty() ? default_statistics(cfg.study, cfg.misspecified) : cfg.statistics;
  std::vector<ResidualProblem> problems;
  for (const auto& st : stats) problems.push_back(make_problem(st.kind, set.grid, st.item, spec.m));
  for (const auto& p : problems) set.labels.push_back(p.label);

  OptimOptions options;
  options.compute_information = false;
  set.records.resize(cfg.reps);
  parallel_for(cfg.reps, cfg.workers, [&](std::size_t rep) {
    ReplicationRecord& rec = set.records[rep];
    rec.index = rep;
    RandomStream rng = replication_stream(cfg.seed, rep);
    const DataMatrix data = cfg.study == Study::one
                                ? generate_study1({.n = cfg.n, .misspecified = cfg.misspecified}, rng).data
                                : generate_study2({.n = cfg.n, .misspecified = cfg.misspecified}, rng).data;
    try {
      const FitResult fit = fit_ml(data, spec, options);
      if (!fit.converged) {
        rec.failure = fit.warnings.empty() ? "not converged" : fit.warnings.back();
        return;
      }
      McConfig mc;
      mc.draws = cfg.M;
      mc.seed = replication_mc_seed(cfg.seed, rep);
      mc.s = cfg.s;
      const auto reports = run_residual_tests(problems, fit, data, mc);
      for (const auto& report : reports) {
        StatisticRecord sr;
        sr.label = report.label;
        sr.z.reserve(report.points.size());
        for (const auto& pt : report.points) sr.z.push_back(pt.unstable ? std::nan("") : pt.z);
        if (report.summary) sr.T = report.summary->T;
        rec.statistics.push_back(std::move(sr));
      }
      if (cfg.baseline) rec.baseline = fit_indices(fit, data);
      rec.converged = true;
    } catch (const IdentificationError& e) {
      rec.failure = e.what();
    } catch (const DegenerateCovarianceError& e) {
      rec.failure = e.what();
    } catch (const DataError& e) {
      rec.failure = e.what();
    }
  });
  bool any = false;
  for (const auto& rec : set.records) any = any || rec.converged;
  if (!any) throw ConvergenceError("no replication produced a converged fit");
  return set;
}

double mc_band_halfwidth(double alpha, std::size_t reps) {
  if (reps == 0) return 0.0;
  return 1.96 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(reps));
}

RejectionTable tabulate(const ReplicationSet& set, double alpha) {
  RejectionTable table;
  table.alpha = alpha;
  table.requested = set.records.size();
  for (const auto& rec : set.records) table.excluded += rec.converged ? 0 : 1;

  const double z_crit = critical_z(alpha);
  const double t_crit = chi2_upper_quantile(alpha, static_cast<double>(set.config.s));
  auto finish = [&](RejectionRow& row) {
    row.rate = row.replications ? static_cast<double>(row.rejections) / static_cast<double>(row.replications) : 0.0;
    const double half = mc_band_halfwidth(alpha, row.replications);
    row.band_lo = alpha - half;
    row.band_hi = alpha + half;
  };

  for (std::size_t p = 0; p < set.labels.size(); ++p) {
    for (std::size_t q = 0; q < set.grid.size(); ++q) {
      RejectionRow row;
      row.statistic = set.labels[p];
      row.kind = "z";
      row.coordinates = set.grid.points.row(static_cast<Eigen::Index>(q)).transpose();
      for (const auto& rec : set.records) {
        if (!rec.converged) continue;
        const double z = rec.statistics[p].z[q];
        if (std::isnan(z)) continue;
        ++row.replications;
        if (std::abs(z) > z_crit) ++row.rejections;
      }
      finish(row);
      table.rows.push_back(std::move(row));
    }
    RejectionRow row;
    row.statistic = set.labels[p];
    row.kind = "T";
    for (const auto& rec : set.records) {
      if (!rec.converged || !rec.statistics[p].T) continue;
      ++row.replications;
      if (*rec.statistics[p].T > t_crit) ++row.rejections;
    }
    finish(row);
    table.rows.push_back(std::move(row));
  }

  if (set.config.baseline) {
    RejectionRow row;
    row.statistic = "lr_chi2";
    row.kind = "lr";
    BaselineSummary summary;
    for (const auto& rec : set.records) {
      if (!rec.converged || !rec.baseline) continue;
      ++row.replications;
      if (rec.baseline->p < alpha) ++row.rejections;
      summary.mean_cfi += rec.baseline->cfi;
      summary.mean_tli += rec.baseline->tli;
      summary.mean_srmr += rec.baseline->srmr;
      summary.mean_rmsea += rec.baseline->rmsea;
    }
    if (row.replications) {
      const auto r = static_cast<double>(row.replications);
      summary.mean_cfi /= r;
      summary.mean_tli /= r;
      summary.mean_srmr /= r;
      summary.mean_rmsea /= r;
    }
    finish(row);
    table.rows.push_back(std::move(row));
    table.baseline = summary;
  }
  return table;
}

RejectionTable run_rejection_study(const RejectionStudyConfig& cfg) { return tabulate(run_replications(cfg), cfg.alpha); }

}  // namespace gresfa
