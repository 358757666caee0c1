#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nirom/numerics.hpp"

namespace nirom::io {

/// Shortest-safe text form of a double ("%.17g"); parses back to the same bits.
std::string format_double(double x);

/// Parses a double, throwing IoError that names `where` on failure.
/// "(x0, x1, ...)" for messages.
std::string format_vector(const Vector& v);

double parse_double(const std::string& token, const std::string& where);

std::vector<std::string> split_csv_line(const std::string& line);

/// A CSV file with an optional header row. Lines starting with '#' are
/// comments; a comment of the form "# key=value" is kept as metadata.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  ///< source line of each row, 1-based
  std::vector<std::pair<std::string, std::string>> metadata;

  /// Column index by header name; throws IoError if absent.
  std::size_t column(const std::string& name) const;
};

/// Reads a CSV. When `has_header` is true the first non-comment line is the header.
CsvTable read_csv(const std::filesystem::path& path, bool has_header);

/// Numeric matrix, one CSV row per matrix row, no header. '#' comments skipped.
Matrix read_matrix_csv(const std::filesystem::path& path);

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header = {});

/// Creates parent directories, writes `content`, and throws IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace nirom::io
