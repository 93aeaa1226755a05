#include "catbrw/io.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "catbrw/errors.h"

namespace catbrw {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw DependencyError("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string CsvTable::render() const {
  std::string s;
  for (const auto& [k, v] : meta) s += "# " + k + "=" + v + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
  s += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_double(row[i]);
    s += "\n";
  }
  return s;
}

CsvTable CsvTable::parse(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw IntegrityError("malformed metadata line: " + line);
      t.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      t.columns = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.columns.size()) throw IntegrityError("row width does not match header");
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        row.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw IntegrityError("non-numeric cell '" + c + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw IntegrityError("table has no header row");
  return t;
}

const std::string& CsvTable::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  throw IntegrityError("table metadata lacks '" + key + "'");
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw IntegrityError("table lacks column '" + name + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DependencyError("cannot write " + path.string());
  out << bytes;
}

CsvTable distribution_to_csv(const TabulatedDistribution& d, Metadata meta) {
  CsvTable t;
  t.meta = std::move(meta);
  t.meta.emplace_back("total_mass", format_double(d.total_mass()));
  if (d.tail()) {
    t.meta.emplace_back("splice", format_double(d.tail()->splice));
    t.meta.emplace_back("tail_constant", format_double(d.tail()->constant));
    t.meta.emplace_back("tail_exponent", format_double(d.tail()->exponent));
  }
  t.columns = {"t", "cdf"};
  for (std::size_t i = 0; i < d.grid().size(); ++i) t.rows.push_back({d.grid()[i], d.cdf()[i]});
  return t;
}

TabulatedDistribution distribution_from_csv(const CsvTable& table) {
  std::vector<double> grid, cdf;
  for (const auto& r : table.rows) {
    grid.push_back(r.at(0));
    cdf.push_back(r.at(1));
  }
  std::optional<PowerTail> tail;
  for (const auto& [k, v] : table.meta)
    if (k == "tail_constant") {
      tail = PowerTail{std::stod(v), std::stod(table.meta_value("tail_exponent")), std::stod(table.meta_value("splice"))};
    }
  return TabulatedDistribution(std::move(grid), std::move(cdf), std::stod(table.meta_value("total_mass")), std::nullopt,
                               tail);
}

}  // namespace catbrw
