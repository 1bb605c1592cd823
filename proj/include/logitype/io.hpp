#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace logitype {

/// Shortest round-trip decimal form; identical across runs for equal inputs.
std::string format_double(double value);

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace logitype
