#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace factorforge {

/// Shortest decimal string that parses back to the same double. Missing (NaN) prints as "".
std::string format_number(double value);

/// Parses a decimal cell; empty or unparseable text yields NaN.
double parse_number(std::string_view cell);

/// Splits one CSV line on commas. Quoting is not supported; none of the schemas need it.
std::vector<std::string_view> split_csv_line(std::string_view line);

/// Reads a whole file into memory, throwing Error when it cannot be opened.
std::string read_file(const std::string& path);

/// Writes `content` to `path`, creating parent directories.
void write_file(const std::string& path, std::string_view content);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace factorforge
