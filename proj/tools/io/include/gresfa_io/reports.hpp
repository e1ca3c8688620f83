#pragma once

#include "gresfa/baseline.hpp"
#include "gresfa/residuals.hpp"
#include "gresfa/simulation.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace gresfa::io {

/// Key/value lines written as "# key: value" above the CSV header.
struct Provenance {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(std::string key, std::string value) { entries.emplace_back(std::move(key), std::move(value)); }
  std::string header() const;
};

/// Provenance lines every output starts with: tool version and command.
Provenance base_provenance(const std::string& command);

/// Columns record,x1[,x2..],eta_hat,eta,residual,se,z,p,unstable,T,s: one
/// "point" row per grid point and one "summary" row (T, s and p).
std::string format_test_report(const TestReport& report, const Provenance& provenance);
/// Columns statistic,kind,x1[,x2..],rejections,replications,rate,band_lo,band_hi.
/// Baseline means follow as kind "mean" rows with the value in `rate`.
std::string format_rejection_table(const RejectionTable& table, std::size_t d, const Provenance& provenance);
std::string format_baseline_report(const BaselineReport& report, const Provenance& provenance);

void write_text(const std::filesystem::path& path, const std::string& contents);

}  // namespace gresfa::io
