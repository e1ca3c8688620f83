#include "gresfa_io/model_file.hpp"

#include "gresfa_io/files.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

namespace gresfa::io {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + what);
}

std::size_t parse_count(const std::string& text, const std::string& source, std::size_t line) {
  std::size_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || value == 0) {
    fail(source, line, "expected a positive integer, got '" + text + "'");
  }
  return value;
}

}  // namespace

ModelSpec parse_model_spec(std::istream& in, const std::string& source) {
  std::optional<std::size_t> m;
  std::optional<std::size_t> d;
  bool mean_structure = true;
  std::vector<std::vector<int>> rows;
  std::size_t pattern_line = 0;
  bool in_pattern = false;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    if (line == "loading_pattern:") {
      if (pattern_line) fail(source, line_no, "loading_pattern given twice");
      pattern_line = line_no;
      in_pattern = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (!in_pattern) fail(source, line_no, "expected 'key = value'");
      std::istringstream cells(line);
      std::vector<int> row;
      std::string cell;
      while (cells >> cell) {
        if (cell != "0" && cell != "1") fail(source, line_no, "loading pattern entries must be 0 or 1");
        row.push_back(cell == "1");
      }
      if (d && row.size() != *d) {
        fail(source, line_no, "loading pattern row has " + std::to_string(row.size()) + " entries, expected " +
                                  std::to_string(*d));
      }
      rows.push_back(std::move(row));
      continue;
    }
    in_pattern = false;
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "m") {
      m = parse_count(value, source, line_no);
    } else if (key == "d") {
      d = parse_count(value, source, line_no);
    } else if (key == "mean_structure") {
      if (value == "true") {
        mean_structure = true;
      } else if (value == "false") {
        mean_structure = false;
      } else {
        fail(source, line_no, "mean_structure must be true or false");
      }
    } else {
      fail(source, line_no, "unknown key '" + key + "'");
    }
  }

  if (!m) fail(source, line_no, "missing key 'm'");
  if (!d) fail(source, line_no, "missing key 'd'");
  if (!pattern_line) fail(source, line_no, "missing loading_pattern block");
  if (rows.size() != *m) {
    fail(source, pattern_line,
         "loading_pattern has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(*m));
  }
  ModelSpec spec;
  spec.m = *m;
  spec.d = *d;
  spec.mean_structure = mean_structure;
  spec.loading_pattern.resize(static_cast<Eigen::Index>(*m), static_cast<Eigen::Index>(*d));
  for (std::size_t j = 0; j < *m; ++j) {
    if (rows[j].size() != *d) fail(source, pattern_line, "loading pattern row " + std::to_string(j + 1) + " is short");
    for (std::size_t k = 0; k < *d; ++k) {
      spec.loading_pattern(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = rows[j][k];
    }
  }
  try {
    spec.validate();
  } catch (const SpecError& e) {
    fail(source, pattern_line, e.what());
  }
  return spec;
}

ModelSpec read_model_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_model_spec(in, path.string());
}

std::string format_model_spec(const ModelSpec& spec) {
  std::ostringstream out;
  out << "m = " << spec.m << "\nd = " << spec.d << "\nmean_structure = " << (spec.mean_structure ? "true" : "false")
      << "\nloading_pattern:\n";
  for (Eigen::Index j = 0; j < spec.loading_pattern.rows(); ++j) {
    for (Eigen::Index k = 0; k < spec.loading_pattern.cols(); ++k) out << (k ? " " : "") << spec.loading_pattern(j, k);
    out << '\n';
  }
  return out.str();
}

}  // namespace gresfa::io
