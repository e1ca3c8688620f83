#include "gresfa_io/reports.hpp"

#include "gresfa_io/files.hpp"

#include <sstream>

namespace gresfa::io {
namespace {

std::string coordinate_header(std::size_t d) {
  std::string out;
  for (std::size_t k = 0; k < d; ++k) out += ",x" + std::to_string(k + 1);
  return out;
}

std::string empty_cells(std::size_t count) { return std::string(count, ','); }

std::string num(double v) { return format_double(v); }

}  // namespace

std::string Provenance::header() const {
  std::string out;
  for (const auto& [key, value] : entries) out += "# " + key + ": " + value + "\n";
  return out;
}

Provenance base_provenance(const std::string& command) {
  Provenance p;
  p.add("tool", std::string("gresfa ") + GRESFA_VERSION);
  p.add("command", command);
  return p;
}

std::string format_test_report(const TestReport& report, const Provenance& provenance) {
  const std::size_t d = report.points.empty() ? 0 : static_cast<std::size_t>(report.points.front().coordinates.size());
  std::ostringstream out;
  out << provenance.header();
  for (const auto& note : report.notes) out << "# note: " << note << '\n';
  out << "record" << coordinate_header(d) << ",eta_hat,eta,residual,se,z,p,unstable,T,s\n";
  for (const auto& pt : report.points) {
    out << "point";
    for (Eigen::Index k = 0; k < pt.coordinates.size(); ++k) out << ',' << num(pt.coordinates(k));
    out << ',' << num(pt.eta_hat) << ',' << num(pt.eta) << ',' << num(pt.residual) << ',' << num(pt.se);
    if (pt.unstable) {
      out << ",,";
    } else {
      out << ',' << num(pt.z) << ',' << num(pt.p);
    }
    out << ',' << (pt.unstable ? 1 : 0) << ",,\n";
  }
  out << "summary" << empty_cells(d) << ",,,,,";
  if (report.summary) {
    out << "," << num(report.summary->p) << ",," << num(report.summary->T) << ',' << report.summary->s << '\n';
  } else {
    out << ",,,,\n";
  }
  return out.str();
}

std::string format_rejection_table(const RejectionTable& table, std::size_t d, const Provenance& provenance) {
  std::ostringstream out;
  out << provenance.header();
  out << "# alpha: " << num(table.alpha) << '\n';
  out << "# replications_requested: " << table.requested << '\n';
  out << "# replications_excluded: " << table.excluded << '\n';
  out << "statistic,kind" << coordinate_header(d) << ",rejections,replications,rate,band_lo,band_hi\n";
  for (const auto& row : table.rows) {
    out << row.statistic << ',' << row.kind;
    if (row.coordinates.size() == static_cast<Eigen::Index>(d)) {
      for (Eigen::Index k = 0; k < row.coordinates.size(); ++k) out << ',' << num(row.coordinates(k));
    } else {
      out << empty_cells(d);
    }
    out << ',' << row.rejections << ',' << row.replications << ',' << num(row.rate) << ',' << num(row.band_lo) << ','
        << num(row.band_hi) << '\n';
  }
  if (table.baseline) {
    const std::pair<const char*, double> means[] = {{"cfi", table.baseline->mean_cfi},
                                                    {"tli", table.baseline->mean_tli},
                                                    {"srmr", table.baseline->mean_srmr},
                                                    {"rmsea", table.baseline->mean_rmsea}};
    for (const auto& [name, value] : means) out << name << ",mean" << empty_cells(d) << ",,," << num(value) << ",,\n";
  }
  return out.str();
}

std::string format_baseline_report(const BaselineReport& report, const Provenance& provenance) {
  std::ostringstream out;
  out << provenance.header();
  out << "chi2,df,p,cfi,tli,srmr,rmsea,baseline_chi2,baseline_df\n";
  out << num(report.chi2) << ',' << report.df << ',' << num(report.p) << ',' << num(report.cfi) << ','
      << num(report.tli) << ',' << num(report.srmr) << ',' << num(report.rmsea) << ',' << num(report.baseline_chi2)
      << ',' << report.baseline_df << '\n';
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& contents) { write_atomic(path, contents); }

}  // namespace gresfa::io
