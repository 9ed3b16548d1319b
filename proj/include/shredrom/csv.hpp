#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace shredrom {

/// Shortest text with 17 significant digits; parses back to the same double.
std::string format_double(double value);

/// Strict parse of the whole field; throws FormatError otherwise.
double parse_double(std::string_view text);

/// Comma-separated fields without quoting.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace shredrom
