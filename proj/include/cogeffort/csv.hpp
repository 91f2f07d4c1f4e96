#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cogeffort::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
};

/// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_line(std::string_view line);

/// Parses comma-separated text with a header row. Blank lines are skipped;
/// a row whose field count differs from the header raises DataError naming
/// `source` and the line.
Table parse(std::string_view text, const std::string& source);

Table read_file(const std::filesystem::path& path);

/// 17 significant digits; parse_double(format_double(x)) == x for finite x.
std::string format_double(double x);

/// Strict decimal parse of the whole field (surrounding spaces allowed).
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);

std::string quote_if_needed(std::string_view field);

/// Index of `name` in the header, or throws DataError mentioning `source`.
std::size_t column(const Table& t, std::string_view name, const std::string& source);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace cogeffort::csv
