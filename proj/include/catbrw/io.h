#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "catbrw/distribution.h"

namespace catbrw {

std::string sha256_hex(const std::string& bytes);
std::string format_double(double v);

using Metadata = std::vector<std::pair<std::string, std::string>>;

// Comma-separated table with '# key=value' header lines.
struct CsvTable {
  Metadata meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string render() const;
  static CsvTable parse(const std::string& text);
  const std::string& meta_value(const std::string& key) const;
  std::size_t column(const std::string& name) const;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

CsvTable distribution_to_csv(const TabulatedDistribution& d, Metadata meta);
TabulatedDistribution distribution_from_csv(const CsvTable& table);

}  // namespace catbrw
