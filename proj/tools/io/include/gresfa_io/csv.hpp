#pragma once

#include "gresfa/data.hpp"

#include <filesystem>
#include <istream>
#include <string>

namespace gresfa::io {

/// Comma-delimited numeric table with a header row. Empty or non-numeric
/// cells raise ParseError naming the line, row and column; a header with no
/// data rows or a zero-variance column raises DataError.
DataMatrix parse_csv(std::istream& in, const std::string& source = "<input>");
DataMatrix ingest_csv(const std::filesystem::path& path);

std::string format_csv(const DataMatrix& data);

}  // namespace gresfa::io
