#pragma once

#include <string>
#include <vector>

#include "igs/numerics.hpp"

namespace igs {

/// Shortest-17-significant-digit decimal; round-trips exactly through
/// strtod.
std::string format_double(double v);

/// Dense CSV, row-major, no header.
Mat read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Mat& m);

/// Tabular CSV with a header row; every cell is preformatted text.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  ~CsvWriter();
  void row(const std::vector<std::string>& cells);

 private:
  void* file_;
  std::size_t width_;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace igs
