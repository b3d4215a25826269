#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace terraid {

/// Shortest round-trip decimal representation (std::to_chars). Used for all
/// CSV and text artifacts so repeated runs are byte-identical.
std::string format_double(double v);

double parse_double(std::string_view text);
long parse_long(std::string_view text);

std::vector<std::string> split_line(const std::string& line, char sep = ',');

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Joins fields with commas and appends a newline.
std::string csv_row(const std::vector<std::string>& fields);

}  // namespace terraid
