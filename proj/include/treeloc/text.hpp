#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace treeloc::text {

/// Shortest decimal representation that round-trips to the same double.
std::string format_number(double value);

/// Parses a full-string decimal number; returns false on trailing garbage.
bool parse_number(std::string_view field, double& out);

/// One parsed CSV row with its 1-based source line number.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// RFC 4180-style reader: comma separated, optional double quotes, CRLF
/// tolerated, blank lines skipped. Throws kParse with the line number on an
/// unterminated quote.
std::vector<CsvRow> parse_csv(std::string_view content);

/// Quotes a field only when it contains a comma, quote, or line break.
std::string csv_escape(std::string_view field);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace treeloc::text
