#pragma once

#include <string>
#include <string_view>

namespace anno {

std::string ascii_lower(std::string_view s);
std::string trim(std::string_view s);
bool is_blank(std::string_view s);

// Fixed-point formatting with half-up rounding, e.g. format_fixed(0.675, 2) == "0.68".
std::string format_fixed(double value, int decimals);

// Replace every filesystem-hostile character with '_' (model names contain '/').
std::string sanitize_filename(std::string_view s);

std::string read_file(const std::string& path);              // throws DataError
void write_file(const std::string& path, std::string_view content);

}  // namespace anno
