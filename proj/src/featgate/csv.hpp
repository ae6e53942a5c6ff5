#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace featgate {

using Date = std::chrono::sys_days;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

// RFC-4180 style: comma separated, optional double quotes, "" escapes a quote.
// Ragged rows are padded with empty cells.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// ISO-8601 calendar date, YYYY-MM-DD, optionally followed by a time part
// introduced by 'T' or ' ' which is ignored.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);

std::optional<double> parse_double(std::string_view text);
// Shortest representation that reads back to the same double.
std::string format_double(double value);

}  // namespace featgate
