// io.hpp: full-precision CSV tables and JSON run manifests.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

namespace rmx {

/// In-memory numeric table with named columns; the interchange format for
/// trajectories, spectral densities, and comparisons.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Index of a named column, or -1.
  int col_index(const std::string& name) const;
  bool has_column(const std::string& name) const {
    return col_index(name) >= 0;
  }
  std::vector<double> column(const std::string& name) const;
  void add_row(const std::vector<double>& row);
};

/// Writes the table as CSV with 17 significant digits (round-trip exact).
void write_table_csv(const std::string& path, const Table& table);

/// Reads a CSV written by write_table_csv (header row required).
Table read_table_csv(const std::string& path);

/// Two-column (energy, density) CSV for tabulated level densities; a header
/// row is optional and detected by non-numeric first field.
void read_two_column_csv(const std::string& path, std::vector<double>* xs,
                         std::vector<double>* ys);

/// Writes a JSON manifest: the flat key=value config echo plus run metadata
/// (string/number values, one level deep under "config" and "run").
void write_manifest(const std::string& path,
                    const std::map<std::string, std::string>& config,
                    const std::map<std::string, std::string>& run);

}  // namespace rmx
