// io.cpp: CSV and manifest serialization.
// SPDX-License-Identifier: Apache-2.0
#include "rmx/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rmx {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  return out;
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  *out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

int Table::col_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> Table::column(const std::string& name) const {
  const int i = col_index(name);
  if (i < 0) throw std::invalid_argument("table: no column named " + name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(i)]);
  return out;
}

void Table::add_row(const std::vector<double>& row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("table: row width differs from header");
  rows.push_back(row);
}

void write_table_csv(const std::string& path, const Table& table) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    f << (i ? "," : "") << table.columns[i];
  f << "\n";
  char buf[40];
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      f << (i ? "," : "") << buf;
    }
    f << "\n";
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

Table read_table_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  Table t;
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error("empty CSV: " + path);
  t.columns = split_csv_line(line);
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != t.columns.size())
      throw std::runtime_error("ragged CSV row in " + path);
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (!parse_double(fields[i], &row[i]))
        throw std::runtime_error("non-numeric CSV field in " + path);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void read_two_column_csv(const std::string& path, std::vector<double>* xs,
                         std::vector<double>* ys) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  xs->clear();
  ys->clear();
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 2)
      throw std::runtime_error("need two columns per row in " + path);
    double x = 0.0, y = 0.0;
    const bool ok = parse_double(fields[0], &x) && parse_double(fields[1], &y);
    if (!ok) {
      if (first) {
        first = false;  // tolerated header row
        continue;
      }
      throw std::runtime_error("non-numeric CSV field in " + path);
    }
    first = false;
    xs->push_back(x);
    ys->push_back(y);
  }
}

void write_manifest(const std::string& path,
                    const std::map<std::string, std::string>& config,
                    const std::map<std::string, std::string>& run) {
  nlohmann::json j;
  j["config"] = config;
  j["run"] = run;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << j.dump(2) << "\n";
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace rmx
