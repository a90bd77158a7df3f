#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ua::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Strict full-string parse; throws std::invalid_argument on junk.
double parse_double(std::string_view s);

/// RFC 4180 field quoting, only when the field needs it.
std::string csv_field(std::string_view s);

/// Splits one CSV record, honouring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);

std::string read_file(const std::filesystem::path& path);

/// Writes bytes exactly, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view bytes);

std::string sha256_hex(std::string_view bytes);

}  // namespace ua::io
