#include "commands.hpp"

#include "gresfa/error.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace gresfa::cli;

namespace {

void add_common(CLI::App* app, CommonOptions& opt, bool needs_fit) {
  app->add_option("--data", opt.data, "CSV data file with a header row")->required()->check(CLI::ExistingFile);
  auto* model = app->add_option("--model", opt.model, "model specification file")->check(CLI::ExistingFile);
  if (needs_fit) {
    auto* fit = app->add_option("--fit", opt.fit, "fit document written by 'gresfa fit'")->check(CLI::ExistingFile);
    fit->excludes(model);
  } else {
    model->required();
  }
  app->add_option("--out", opt.out, "output file")->required();
  app->add_option("--seed", opt.seed, "random seed")->capture_default_str();
  app->add_option("--M", opt.M, "Monte Carlo draws")->capture_default_str()->check(CLI::Range(1000, 100000000));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized residual fit diagnostics for linear normal factor models"};
  app.set_version_flag("--version", std::string("gresfa ") + GRESFA_VERSION);
  app.require_subcommand(1);

  CommonOptions fit_opt;
  auto* fit = app.add_subcommand("fit", "estimate a factor model by maximum likelihood");
  add_common(fit, fit_opt, false);

  TestOptions test_opt;
  auto* test = app.add_subcommand("test", "generalized residual tests on a fitted model");
  test->add_option("battery", test_opt.battery, "lv-density | linearity | variance | linearity-direct")
      ->required()
      ->check(CLI::IsMember({"lv-density", "linearity", "variance", "linearity-direct"}));
  add_common(test, test_opt.common, true);
  test->add_option("--grid", test_opt.grid, "evaluation grid, lo:hi:count per dimension");
  test->add_option("--summary-grid", test_opt.summary_grid, "summary subgrid, 'all' or 'none'");
  test->add_option("--item", test_opt.item, "manifest variable, 1-based");
  test->add_option("--s", test_opt.s, "eigenvalues kept in the summary statistic")->capture_default_str();

  SimulateOptions sim_opt;
  auto* sim = app.add_subcommand("simulate", "rejection-rate study");
  sim->add_option("study", sim_opt.study, "study1 | study2")->required()->check(CLI::IsMember({"study1", "study2"}));
  sim->add_option("--out", sim_opt.out, "output file")->required();
  sim->add_option("--n", sim_opt.n, "sample size")->capture_default_str();
  sim->add_option("--reps", sim_opt.reps, "replications")->capture_default_str();
  sim->add_option("--M", sim_opt.M, "Monte Carlo draws per replication")->capture_default_str()->check(
      CLI::Range(1000, 100000000));
  sim->add_option("--s", sim_opt.s, "eigenvalues kept in the summary statistic")->capture_default_str();
  sim->add_option("--alpha", sim_opt.alpha, "significance level")->capture_default_str()->check(
      CLI::Range(1e-6, 0.5));
  sim->add_option("--seed", sim_opt.seed, "master seed")->capture_default_str();
  sim->add_flag("--misspecified", sim_opt.misspecified, "use the misspecified data-generating arm");
  sim->add_option("--item", sim_opt.item, "study2 item to test, 1-based");
  sim->add_option("--grid", sim_opt.grid, "evaluation grid, lo:hi:count per dimension");
  sim->add_option("--summary-grid", sim_opt.summary_grid, "summary subgrid, 'all' or 'none'");

  CommonOptions idx_opt;
  auto* indices = app.add_subcommand("indices", "likelihood-ratio test and CFI, TLI, SRMR, RMSEA");
  add_common(indices, idx_opt, true);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::size_t workers = workers_from_environment();
    if (fit->parsed()) {
      fit_opt.workers = workers;
      return run_fit(fit_opt);
    }
    if (test->parsed()) {
      test_opt.common.workers = workers;
      return run_test(test_opt);
    }
    if (sim->parsed()) {
      sim_opt.workers = workers;
      return run_simulate(sim_opt);
    }
    if (indices->parsed()) {
      idx_opt.workers = workers;
      return run_indices(idx_opt);
    }
  } catch (const gresfa::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
