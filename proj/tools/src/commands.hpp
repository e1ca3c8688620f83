#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace gresfa::cli {

struct CommonOptions {
  std::string data;
  std::string model;
  std::string fit;
  std::string out;
  std::uint64_t seed = 1;
  std::size_t M = 10000;
  std::size_t workers = 1;
};

struct TestOptions {
  CommonOptions common;
  std::string battery;
  std::optional<std::string> grid;
  std::optional<std::string> summary_grid;
  std::optional<long> item;
  std::size_t s = 1;
};

struct SimulateOptions {
  std::string study;
  std::string out;
  std::uint64_t seed = 1;
  std::size_t n = 500;
  std::size_t reps = 300;
  std::size_t M = 4000;
  std::size_t s = 1;
  double alpha = 0.05;
  bool misspecified = false;
  std::optional<long> item;
  std::optional<std::string> grid;
  std::optional<std::string> summary_grid;
  std::size_t workers = 1;
};

/// Exit status for a fit that was written but did not converge.
inline constexpr int kExitNotConverged = 3;

int run_fit(const CommonOptions& opt);
int run_test(const TestOptions& opt);
int run_simulate(const SimulateOptions& opt);
int run_indices(const CommonOptions& opt);

/// Worker count from GRESFA_WORKERS, else the hardware concurrency.
std::size_t workers_from_environment();

}  // namespace gresfa::cli
