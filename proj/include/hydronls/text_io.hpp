#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hydronls {

/// Shortest round-trip decimal form of a double ("%.17g"), so identical runs
/// produce byte-identical files.
std::string format_number(double v);

/// Minimal CSV writer: a header row, then rows of numbers.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns);
  void row(std::initializer_list<double> values);
  void row(std::span<const double> values);

 private:
  std::ofstream os_;
  std::size_t columns_;
};

}  // namespace hydronls
