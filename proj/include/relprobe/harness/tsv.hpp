#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace relprobe::harness {

/// Tab-separated table with a mandatory header line.
struct TsvTable {
  std::filesystem::path file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  /// "file:line" for row i, for error messages.
  std::string where(std::size_t row) const;
};

std::vector<std::string> split_tabs(std::string_view line);

/// Reads `file` and checks that its header equals `expected_header`.
/// Every row must have as many fields as the header. Blank lines are
/// skipped; a trailing '\r' is stripped. Errors: io if unreadable, format
/// for a header or field-count mismatch.
TsvTable read_tsv(const std::filesystem::path& file,
                  std::initializer_list<std::string_view> expected_header);

std::size_t parse_index(const std::string& field, const TsvTable& table, std::size_t row);
double parse_number(const std::string& field, const TsvTable& table, std::size_t row);

/// Fixed-point text with `digits` decimals, independent of locale.
std::string format_fixed(double v, int digits = 6);
/// Shortest "%.*g" rendering with `digits` significant digits.
std::string format_general(double v, int digits = 6);

/// Creates parent directories and replaces `file` with `content`.
void write_text_file(const std::filesystem::path& file, const std::string& content);

}  // namespace relprobe::harness
