#pragma once

#include "gresfa/error.hpp"

#include <filesystem>
#include <string>

namespace gresfa::io {

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text; the message carries the source name and line.
class ParseError : public Error {
 public:
  using Error::Error;
};

std::string read_file(const std::filesystem::path& path);

/// Writes `contents` to a temporary file next to `path`, then renames it into
/// place.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

/// Lower-case hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

/// Shortest round-trip decimal form; "nan" and "inf" spelled out.
std::string format_double(double value);

}  // namespace gresfa::io
