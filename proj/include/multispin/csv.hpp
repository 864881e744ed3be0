#pragma once

// CSV with a '#'-prefixed "key = value" header block.

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "multispin/errors.hpp"

namespace multispin {

using CsvCell = std::variant<double, long long, std::string>;

/// 17 significant digits: every double round-trips.
inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_cell(const CsvCell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

struct CsvTable {
  std::vector<std::pair<std::string, std::string>> header;  // echoed as "# key = value"
  std::vector<std::string> columns;
  std::vector<std::vector<CsvCell>> rows;

  void write(std::ostream& os) const {
    for (const auto& [k, v] : header) os << "# " << k << " = " << v << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
      if (r.size() != columns.size()) throw invalid_argument("CSV row width differs from the column count");
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_cell(r[i]);
      os << '\n';
    }
  }
};

/// Parsed CSV: header map, column names, cells as text.
struct CsvDocument {
  std::map<std::string, std::string> header;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw invalid_argument("no column named " + name);
  }
  std::vector<double> numbers(const std::string& name) const {
    const auto c = column(name);
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(std::stod(r.at(c)));
    return out;
  }
};

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/// Splits "key = value"; returns false for lines without '='.
inline bool split_key_value(const std::string& line, std::string& key, std::string& value) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) return false;
  key = trim(line.substr(0, eq));
  value = trim(line.substr(eq + 1));
  return !key.empty();
}

inline CsvDocument read_csv(std::istream& is) {
  CsvDocument doc;
  std::string line;
  bool have_columns = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string k, v;
      if (split_key_value(line.substr(1), k, v)) doc.header[k] = v;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!have_columns) {
      doc.columns = std::move(cells);
      have_columns = true;
    } else {
      doc.rows.push_back(std::move(cells));
    }
  }
  return doc;
}

inline CsvDocument read_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw invalid_argument("cannot open " + path);
  return read_csv(f);
}

}  // namespace multispin
