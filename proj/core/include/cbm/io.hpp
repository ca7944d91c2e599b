#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cbm {

/// Dot-decimal, 9 significant digits; the CSV number format.
std::string format_number(double x);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(const std::string& line);

double parse_double(const std::string& text, const std::string& what);

}  // namespace cbm
