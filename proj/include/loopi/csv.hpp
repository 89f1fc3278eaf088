#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace loopi {

// Shortest representation that round-trips a double exactly.
std::string format_double(double value);

// 4 significant digits, for the human-readable summary.
std::string format_double_short(double value);

// Writes content to path via a sibling temp file and an atomic rename.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// Strict numeric CSV reader: one header line, every cell must parse as a
// double, every row must match the header width. Row numbers are 1-based in
// error messages (header is line 1).
CsvTable read_numeric_csv(const std::filesystem::path& path);

}  // namespace loopi
