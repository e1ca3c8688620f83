#pragma once

#include "gresfa/model_spec.hpp"

#include <filesystem>
#include <istream>
#include <string>

namespace gresfa::io {

// Model files are line oriented:
//
//   # one factor, five indicators
//   m = 5
//   d = 1
//   mean_structure = true
//   loading_pattern:
//   1
//   1
//   ...
//
// `loading_pattern:` is followed by m rows of d whitespace-separated 0/1
// entries. Blank lines and text after '#' are ignored.

ModelSpec parse_model_spec(std::istream& in, const std::string& source = "<input>");
ModelSpec read_model_spec(const std::filesystem::path& path);
std::string format_model_spec(const ModelSpec& spec);

}  // namespace gresfa::io
