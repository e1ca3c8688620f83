#include "gresfa_io/csv.hpp"

#include "gresfa_io/files.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace gresfa::io {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

DataMatrix parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw DataError(source + ": file is empty");
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0] = header[0].substr(3);
  for (std::size_t c = 0; c < header.size(); ++c) {
    header[c] = unquote(header[c]);
    if (header[c].empty()) header[c] = "column" + std::to_string(c + 1);
  }

  std::vector<double> cells;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++rows;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw ParseError(source + ": line " + std::to_string(line_no) + " (data row " + std::to_string(rows) + ") has " +
                       std::to_string(fields.size()) + " fields, header has " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& f = fields[c];
      const std::string where = source + ": line " + std::to_string(line_no) + " (data row " + std::to_string(rows) +
                                "), column " + std::to_string(c + 1) + " '" + header[c] + "'";
      if (f.empty()) throw ParseError(where + ": empty cell");
      double value = 0.0;
      const char* begin = f.data();
      const char* end = f.data() + f.size();
      if (*begin == '+') ++begin;
      const auto res = std::from_chars(begin, end, value);
      if (res.ec != std::errc() || res.ptr != end) throw ParseError(where + ": non-numeric value '" + f + "'");
      cells.push_back(value);
    }
  }
  if (rows == 0) throw DataError(source + ": no data rows after the header");

  DataMatrix data;
  data.column_names = std::move(header);
  const auto m = static_cast<Eigen::Index>(data.column_names.size());
  data.values.resize(static_cast<Eigen::Index>(rows), m);
  for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < m; ++j) data.values(i, j) = cells[static_cast<std::size_t>(i * m + j)];
  }
  validate_data(data);
  return data;
}

DataMatrix ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_csv(in, path.string());
}

std::string format_csv(const DataMatrix& data) {
  std::ostringstream out;
  for (std::size_t c = 0; c < data.m(); ++c) out << (c ? "," : "") << data.column_names[c];
  out << '\n';
  for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.values.cols(); ++j) out << (j ? "," : "") << format_double(data.values(i, j));
    out << '\n';
  }
  return out.str();
}

}  // namespace gresfa::io
