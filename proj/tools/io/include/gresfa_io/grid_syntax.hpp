#pragma once

#include "gresfa/batteries.hpp"

#include <string>

namespace gresfa::io {

/// "lo:hi:count" per dimension, comma-separated, e.g. "-3:3:19,-3:3:19".
std::vector<GridDim> parse_grid_spec(const std::string& text);
std::string format_grid_spec(const std::vector<GridDim>& dims);

}  // namespace gresfa::io
