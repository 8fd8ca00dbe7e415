#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stormsel {

/// Splits one CSV line on commas. No quoting: every file format in this
/// project is plain numeric/identifier cells.
std::vector<std::string> split_csv_line(std::string_view line);

/// Parses a cell; empty cell means missing and returns NaN. Throws ParseError
/// (with `context`) on anything that is not fully numeric.
double parse_cell(std::string_view cell, const std::string& context);

/// Shortest decimal form that round-trips a double exactly (max_digits10).
std::string format_double(double v);

/// Hex-float form (%a); bit-exact round trip through parse_hex_double.
std::string format_hex_double(double v);
double parse_hex_double(std::string_view s, const std::string& context);

/// Reads a whole text file; throws UserError if unreadable.
std::string read_text_file(const std::string& path);

/// Writes text to a file, creating parent directories; throws on failure.
void write_text_file(const std::string& path, const std::string& content);

/// Splits text into lines; tolerates trailing newline and CRLF.
std::vector<std::string> split_lines(std::string_view text);

/// FNV-1a of a file's bytes as fixed-width hex, for run manifests and
/// reproducibility checks.
std::string file_digest_hex(const std::string& path);
std::string bytes_digest_hex(std::string_view bytes);

}  // namespace stormsel
