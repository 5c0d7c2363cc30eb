#pragma once

#include <string>

#include "ptq/result_table.hpp"

namespace ptq {

/// Renders the table's plot spec as a standalone SVG with a fixed 720x450
/// viewBox. Output depends only on the table contents. Throws
/// std::invalid_argument if the table has no plot spec or names unknown columns.
std::string render_svg(const ResultTable& table);

}  // namespace ptq
