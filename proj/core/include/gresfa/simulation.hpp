#pragma once

#include "gresfa/baseline.hpp"
#include "gresfa/batteries.hpp"
#include "gresfa/random.hpp"

#include <optional>

namespace gresfa {

struct Study1Config {
  std::size_t n = 500;
  bool misspecified = false;
  Vector mixture_mean_1 = (Vector(2) << -0.6, -0.6).finished();
  Vector mixture_mean_2 = (Vector(2) << 0.6, 0.6).finished();
  Matrix mixture_covariance = (Matrix(2, 2) << 0.64, -0.16, -0.16, 0.64).finished();
  double mixture_weight = 0.5;  // probability of the first component
};

enum class ItemType { lmcv, qmcv, lmlv, qmlv };

std::string_view item_type_name(ItemType type);

struct Study2Config {
  std::size_t n = 500;
  bool misspecified = false;
  double kappa = -0.1;
  double gamma1 = 0.3;
};

struct SimulatedSample {
  DataMatrix data;
  Matrix latents;  // n x d
};

/// Independent-cluster structure: items 1-10 on factor 1, 11-20 on factor 2.
ModelSpec study1_spec();
/// Data-generating parameters shared by both arms.
ParamSet study1_params();
SimulatedSample generate_study1(const Study1Config& cfg, RandomStream& rng);

ModelSpec study2_spec();
/// Item types: all LMCV, or items 1-7 LMCV then QMCV, LMLV, QMLV.
std::vector<ItemType> study2_items(bool misspecified);
/// Linear-normal parameters (nu, lambda, theta) behind each item before the
/// quadratic and log-linear terms are added.
ParamSet study2_params(bool misspecified);
SimulatedSample generate_study2(const Study2Config& cfg, RandomStream& rng);

enum class Study { one, two };

struct StatisticSpec {
  BatteryKind kind = BatteryKind::lv_density;
  std::size_t item = 0;  // 0-based; ignored for lv_density
};

struct RejectionStudyConfig {
  Study study = Study::two;
  bool misspecified = false;
  std::size_t n = 500;
  std::size_t reps = 300;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  std::size_t M = 4000;
  std::size_t s = 1;
  /// Empty selects the study's default statistics.
  std::vector<StatisticSpec> statistics;
  /// Defaults to default_grid(d) when absent.
  std::optional<LvGrid> grid;
  bool baseline = false;
  std::size_t workers = 1;
};

/// Study 1: LV density. Study 2: linearity and variance on item 2 (correct
/// arm) or items 2, 8, 9, 10 (misspecified arm).
std::vector<StatisticSpec> default_statistics(Study study, bool misspecified);

struct StatisticRecord {
  std::string label;
  /// Pointwise z per grid point; NaN where unstable.
  std::vector<double> z;
  std::optional<double> T;
};

struct ReplicationRecord {
  std::size_t index = 0;
  bool converged = false;
  std::string failure;
  std::vector<StatisticRecord> statistics;
  std::optional<BaselineReport> baseline;
};

struct ReplicationSet {
  RejectionStudyConfig config;
  LvGrid grid;
  std::vector<std::string> labels;
  std::vector<ReplicationRecord> records;  // ordered by replication index
};

/// Seeds for replication `rep`: data stream and residual-engine seed.
RandomStream replication_stream(std::uint64_t master, std::size_t rep);
std::uint64_t replication_mc_seed(std::uint64_t master, std::size_t rep);

/// Generate, fit and test `reps` replications. Non-converged fits are kept as
/// excluded records. Throws ConvergenceError if every replication fails.
ReplicationSet run_replications(const RejectionStudyConfig& cfg);

struct RejectionRow {
  std::string statistic;  // problem label
  std::string kind;       // "z", "T" or "lr"
  Vector coordinates;     // empty for summary rows
  std::size_t rejections = 0;
  std::size_t replications = 0;
  double rate = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
};

struct BaselineSummary {
  double mean_cfi = 0.0;
  double mean_tli = 0.0;
  double mean_srmr = 0.0;
  double mean_rmsea = 0.0;
};

struct RejectionTable {
  double alpha = 0.05;
  std::size_t requested = 0;
  std::size_t excluded = 0;
  std::vector<RejectionRow> rows;
  std::optional<BaselineSummary> baseline;
};

/// Half-width 1.96 sqrt(alpha (1 - alpha) / R).
double mc_band_halfwidth(double alpha, std::size_t reps);

RejectionTable tabulate(const ReplicationSet& set, double alpha);
/// run_replications followed by tabulate at cfg.alpha.
RejectionTable run_rejection_study(const RejectionStudyConfig& cfg);

}  // namespace gresfa
