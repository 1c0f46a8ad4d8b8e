#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace enrich::io {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`, so readers see
// either the old content or the complete new content.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Appends one line (a trailing '\n' is added) and flushes.
void append_line(const std::filesystem::path& path, std::string_view line);

// RFC 4180 CSV. Quoted fields may contain commas, quotes ("") and newlines.
using CsvRow = std::vector<std::string>;

struct CsvRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  CsvRow fields;
};

std::vector<CsvRecord> parse_csv(std::string_view content);

std::string csv_escape(std::string_view field);

std::string csv_join(const CsvRow& row);

}  // namespace enrich::io
