#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace adaptd::detail {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);
std::vector<std::string_view> split_csv_line(std::string_view line);
/// Replaces characters that would break an unquoted CSV field.
std::string csv_safe(std::string_view text);

}  // namespace adaptd::detail
