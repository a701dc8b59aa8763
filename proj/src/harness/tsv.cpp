#include "relprobe/harness/tsv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "relprobe/error.hpp"

namespace relprobe::harness {

namespace {

std::string join_header(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += '\t';
    out += fields[i];
  }
  return out;
}

}  // namespace

std::string TsvTable::where(std::size_t row) const {
  return file.string() + ":" + std::to_string(line_numbers.at(row));
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

TsvTable read_tsv(const std::filesystem::path& file,
                  std::initializer_list<std::string_view> expected_header) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCategory::io, "cannot open " + file.string());
  TsvTable table;
  table.file = file;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_tabs(line);
    if (!have_header) {
      const std::vector<std::string> want(expected_header.begin(), expected_header.end());
      if (fields != want) {
        throw Error(ErrorCategory::format, file.string() + ":" + std::to_string(line_no) +
                                               ": header is '" + join_header(fields) +
                                               "', expected '" + join_header(want) + "'");
      }
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCategory::format, file.string() + ":" + std::to_string(line_no) + ": " +
                                             std::to_string(fields.size()) + " fields, expected " +
                                             std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (in.bad()) throw Error(ErrorCategory::io, "read failed for " + file.string());
  if (!have_header) throw Error(ErrorCategory::format, file.string() + ": missing header line");
  return table;
}

std::size_t parse_index(const std::string& field, const TsvTable& table, std::size_t row) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCategory::format,
                table.where(row) + ": '" + field + "' is not a non-negative integer");
  }
  return v;
}

double parse_number(const std::string& field, const TsvTable& table, std::size_t row) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCategory::format, table.where(row) + ": '" + field + "' is not a number");
  }
  return v;
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string format_general(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void write_text_file(const std::filesystem::path& file, const std::string& content) {
  std::error_code ec;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
  if (ec) throw Error(ErrorCategory::io, "cannot create " + file.parent_path().string());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::io, "cannot write " + file.string());
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCategory::io, "write failed for " + file.string());
}

}  // namespace relprobe::harness
