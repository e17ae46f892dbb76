#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace spmds {

/// Shortest decimal form that reads back to the same double.
std::string format_number(double value);

/// Fixed-point form with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace spmds
