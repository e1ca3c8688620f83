#include "gresfa_io/grid_syntax.hpp"

#include "gresfa_io/files.hpp"

#include <charconv>

namespace gresfa::io {
namespace {

template <typename T>
T parse_number(const std::string& text, const std::string& whole) {
  T value{};
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, value);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ParseError("grid '" + whole + "': bad number '" + text + "'");
  }
  return value;
}

}  // namespace

std::vector<GridDim> parse_grid_spec(const std::string& text) {
  std::vector<GridDim> dims;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto c1 = part.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : part.find(':', c1 + 1);
    if (c2 == std::string::npos || part.find(':', c2 + 1) != std::string::npos) {
      throw ParseError("grid '" + text + "': expected lo:hi:count per dimension");
    }
    GridDim dim;
    dim.lo = parse_number<double>(part.substr(0, c1), text);
    dim.hi = parse_number<double>(part.substr(c1 + 1, c2 - c1 - 1), text);
    dim.count = parse_number<std::size_t>(part.substr(c2 + 1), text);
    if (dim.count == 0) throw ParseError("grid '" + text + "': count must be at least 1");
    if (!(dim.lo < dim.hi)) throw ParseError("grid '" + text + "': lo must be below hi");
    dims.push_back(dim);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return dims;
}

std::string format_grid_spec(const std::vector<GridDim>& dims) {
  std::string out;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k) out += ',';
    out += format_double(dims[k].lo) + ":" + format_double(dims[k].hi) + ":" + std::to_string(dims[k].count);
  }
  return out;
}

}  // namespace gresfa::io
