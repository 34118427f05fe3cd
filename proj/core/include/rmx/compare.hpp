// compare.hpp: column-by-column comparison of trajectory tables.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rmx/io.hpp"

namespace rmx {

/// Outcome of comparing one shared value column.
struct ColumnComparison {
  std::string name;
  double max_abs_diff = 0.0;   // largest |a - b| over matched rows
  double mean_abs_diff = 0.0;  // mean |a - b| over matched rows
  double worst_allowed = 0.0;  // allowance at the worst row
  std::size_t worst_row = 0;   // row with the largest excess over allowance
  bool pass = true;
};

/// Comparison verdict across all shared value columns.
struct ComparisonReport {
  std::string label_a = "A";
  std::string label_b = "B";
  double tolerance = 0.0;
  bool stat_allowance = false;
  bool interpolated = false;
  std::size_t rows = 0;
  std::vector<ColumnComparison> columns;
  bool pass = true;

  /// One line per column plus a final verdict line.
  std::string summary() const;
  /// JSON document mirroring the summary fields.
  std::string to_json() const;
};

/// Compares every value column the two tables share, keyed on the first
/// column (equal key names required; companion `<name>_stderr` columns are
/// never compared directly). The statistical allowance widens the per-row
/// bound to tolerance + 3 * (stderr_a + stderr_b) where stderr columns
/// exist. With `interpolate` the second table is linearly resampled onto
/// the overlapping part of the first key grid; otherwise the key grids must
/// match to a relative 1e-9.
ComparisonReport compare_tables(const Table& a, const Table& b,
                                double tolerance, bool stat_allowance,
                                bool interpolate = false);

}  // namespace rmx
