#include "commands.hpp"

#include "gresfa/baseline.hpp"
#include "gresfa/batteries.hpp"
#include "gresfa/simulation.hpp"
#include "gresfa_io/csv.hpp"
#include "gresfa_io/files.hpp"
#include "gresfa_io/fit_document.hpp"
#include "gresfa_io/grid_syntax.hpp"
#include "gresfa_io/model_file.hpp"
#include "gresfa_io/reports.hpp"

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <thread>

namespace gresfa::cli {
namespace {

struct LoadedFit {
  FitResult fit;
  std::string source_key;  // provenance key: fit_sha256 or model_sha256
  std::string digest;
};

OptimOptions fit_options(const CommonOptions& opt) {
  OptimOptions o;
  o.seed = opt.seed;
  o.information_draws = opt.M;
  o.workers = opt.workers;
  return o;
}

LoadedFit load_or_fit(const CommonOptions& opt, const DataMatrix& data) {
  if (!opt.fit.empty() && !opt.model.empty()) throw ConfigurationError("give either --fit or --model, not both");
  LoadedFit out;
  if (!opt.fit.empty()) {
    out.fit = io::read_fit_document(opt.fit);
    out.source_key = "fit_sha256";
    out.digest = io::sha256_file(opt.fit);
  } else if (!opt.model.empty()) {
    out.fit = fit_ml(data, io::read_model_spec(opt.model), fit_options(opt));
    out.source_key = "model_sha256";
    out.digest = io::sha256_file(opt.model);
  } else {
    throw ConfigurationError("one of --fit or --model is required");
  }
  if (!out.fit.converged) {
    std::string why = out.fit.warnings.empty() ? "" : ": " + out.fit.warnings.back();
    throw ConvergenceError("model fit did not converge" + why);
  }
  return out;
}

std::size_t item_index(const std::optional<long>& item, std::size_t m) {
  if (!item) throw ConfigurationError("--item is required for this battery");
  if (*item < 1 || static_cast<std::size_t>(*item) > m) {
    throw IndexError("--item " + std::to_string(*item) + " is out of range 1.." + std::to_string(m));
  }
  return static_cast<std::size_t>(*item - 1);
}

/// Grid from --grid / --summary-grid. The summary defaults to every grid
/// point when --grid is given; otherwise d = 1 uses 31 points on [-3, 3], all
/// in the summary, and d = 2 the 19 x 19 grid with the 7 x 7 subgrid.
LvGrid resolve_grid(const std::optional<std::string>& grid_text, const std::optional<std::string>& summary_text,
                    std::size_t d, bool simulation_context, std::string& summary_echo) {
  LvGrid grid;
  if (grid_text) {
    grid = make_grid(io::parse_grid_spec(*grid_text));
    if (grid.dimension() != d) {
      throw DimensionError("--grid has " + std::to_string(grid.dimension()) + " dimension(s), the model has " +
                           std::to_string(d));
    }
    use_all_for_summary(grid);
  } else if (d == 1 && !simulation_context) {
    grid = full_summary_grid(1);
  } else {
    grid = default_grid(d);
  }
  if (summary_text) {
    if (*summary_text == "all") {
      use_all_for_summary(grid);
    } else if (*summary_text == "none") {
      grid.summary_subset.clear();
    } else {
      set_summary_subgrid(grid, io::parse_grid_spec(*summary_text));
    }
  }
  if (summary_text && *summary_text != "all" && *summary_text != "none") {
    summary_echo = *summary_text;
  } else if (grid.summary_subset.empty()) {
    summary_echo = "none";
  } else if (grid.summary_subset.size() == grid.size()) {
    summary_echo = "all";
  } else {
    summary_echo = d == 1 ? "-2:2:11" : "-2:2:7,-2:2:7";
  }
  return grid;
}

BatteryKind battery_kind(const std::string& name) {
  if (name == "lv-density") return BatteryKind::lv_density;
  if (name == "linearity") return BatteryKind::mv_linearity;
  if (name == "variance") return BatteryKind::mv_homoscedasticity;
  if (name == "linearity-direct") return BatteryKind::mv_linearity_direct;
  throw ConfigurationError("unknown battery '" + name + "'");
}

}  // namespace

std::size_t workers_from_environment() {
  if (const char* env = std::getenv("GRESFA_WORKERS")) {
    std::size_t value = 0;
    const std::string text(env);
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || value == 0) {
      throw ConfigurationError("GRESFA_WORKERS must be a positive integer");
    }
    return value;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int run_fit(const CommonOptions& opt) {
  const DataMatrix data = io::ingest_csv(opt.data);
  const ModelSpec spec = io::read_model_spec(opt.model);
  const FitResult fit = fit_ml(data, spec, fit_options(opt));
  io::FitProvenance prov;
  prov.data_sha256 = io::sha256_file(opt.data);
  prov.model_sha256 = io::sha256_file(opt.model);
  prov.seed = opt.seed;
  prov.information_draws = opt.M;
  io::write_fit_document(opt.out, fit, prov);
  for (const auto& w : fit.warnings) std::cerr << "warning: " << w << '\n';
  if (!fit.converged) {
    std::cerr << "error: model fit did not converge; fit document written to " << opt.out << '\n';
    return kExitNotConverged;
  }
  return 0;
}

int run_test(const TestOptions& opt) {
  const BatteryKind kind = battery_kind(opt.battery);
  const DataMatrix data = io::ingest_csv(opt.common.data);
  const LoadedFit loaded = load_or_fit(opt.common, data);
  const FitResult& fit = loaded.fit;
  const std::size_t item = kind == BatteryKind::lv_density ? 0 : item_index(opt.item, fit.spec.m);

  std::string summary_echo;
  const LvGrid grid = resolve_grid(opt.grid, opt.summary_grid, fit.spec.d, false, summary_echo);
  const ResidualProblem problem = make_problem(kind, grid, item, fit.spec.m);

  McConfig mc;
  mc.draws = opt.common.M;
  mc.seed = opt.common.seed;
  mc.s = opt.s;
  mc.workers = opt.common.workers;
  const TestReport report = run_residual_test(problem, fit, data, mc);

  io::Provenance prov = io::base_provenance("test " + opt.battery);
  if (kind != BatteryKind::lv_density) prov.add("item", std::to_string(item + 1));
  prov.add("seed", std::to_string(opt.common.seed));
  prov.add("M", std::to_string(opt.common.M));
  prov.add("s", std::to_string(opt.s));
  prov.add("grid", io::format_grid_spec(grid.dims));
  prov.add("summary_grid", summary_echo);
  prov.add("n", std::to_string(data.n()));
  prov.add("data_sha256", io::sha256_file(opt.common.data));
  prov.add(loaded.source_key, loaded.digest);
  io::write_text(opt.common.out, io::format_test_report(report, prov));
  return 0;
}

int run_simulate(const SimulateOptions& opt) {
  RejectionStudyConfig cfg;
  if (opt.study == "study1") {
    cfg.study = Study::one;
  } else if (opt.study == "study2") {
    cfg.study = Study::two;
  } else {
    throw ConfigurationError("unknown study '" + opt.study + "'");
  }
  cfg.misspecified = opt.misspecified;
  cfg.n = opt.n;
  cfg.reps = opt.reps;
  cfg.seed = opt.seed;
  cfg.alpha = opt.alpha;
  cfg.M = opt.M;
  cfg.s = opt.s;
  cfg.baseline = true;
  cfg.workers = opt.workers;
  const std::size_t d = cfg.study == Study::one ? 2 : 1;
  const std::size_t m = cfg.study == Study::one ? 20 : 10;
  if (opt.item) {
    if (cfg.study == Study::one) throw ConfigurationError("--item applies to study2 only");
    const std::size_t j = item_index(opt.item, m);
    cfg.statistics = {{BatteryKind::mv_linearity, j}, {BatteryKind::mv_homoscedasticity, j}};
  }
  std::string summary_echo;
  cfg.grid = resolve_grid(opt.grid, opt.summary_grid, d, true, summary_echo);

  const RejectionTable table = run_rejection_study(cfg);
  io::Provenance prov = io::base_provenance("simulate " + opt.study);
  prov.add("arm", opt.misspecified ? "misspecified" : "correct");
  prov.add("n", std::to_string(opt.n));
  prov.add("reps", std::to_string(opt.reps));
  prov.add("seed", std::to_string(opt.seed));
  prov.add("M", std::to_string(opt.M));
  prov.add("s", std::to_string(opt.s));
  prov.add("grid", io::format_grid_spec(cfg.grid->dims));
  prov.add("summary_grid", summary_echo);
  io::write_text(opt.out, io::format_rejection_table(table, d, prov));
  if (table.excluded > 0) std::cerr << "warning: " << table.excluded << " replication(s) excluded (no convergence)\n";
  return 0;
}

int run_indices(const CommonOptions& opt) {
  const DataMatrix data = io::ingest_csv(opt.data);
  const LoadedFit loaded = load_or_fit(opt, data);
  const BaselineReport report = fit_indices(loaded.fit, data);
  io::Provenance prov = io::base_provenance("indices");
  prov.add("data_sha256", io::sha256_file(opt.data));
  prov.add(loaded.source_key, loaded.digest);
  io::write_text(opt.out, io::format_baseline_report(report, prov));
  return 0;
}

}  // namespace gresfa::cli
