// compare.cpp: table comparison with optional statistical allowance.
// SPDX-License-Identifier: Apache-2.0
#include "rmx/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rmx {

namespace {

bool is_stderr_column(const std::string& name) {
  const std::string tag = "_stderr";
  return name.size() > tag.size() &&
         name.compare(name.size() - tag.size(), tag.size(), tag) == 0;
}

// Linear interpolation of (xs, ys) at x; xs strictly increasing, x inside.
double lerp_at(const std::vector<double>& xs, const std::vector<double>& ys,
               double x) {
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  if (i + 1 >= xs.size()) i = xs.size() - 2;
  const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return (1.0 - t) * ys[i] + t * ys[i + 1];
}

}  // namespace

ComparisonReport compare_tables(const Table& a, const Table& b,
                                double tolerance, bool stat_allowance,
                                bool interpolate) {
  if (a.columns.empty() || b.columns.empty())
    throw std::invalid_argument("compare: table without columns");
  if (a.columns[0] != b.columns[0])
    throw std::invalid_argument("compare: key column mismatch (\"" +
                                a.columns[0] + "\" vs \"" + b.columns[0] +
                                "\")");
  const std::string key = a.columns[0];

  std::vector<std::string> shared;
  for (const std::string& name : a.columns) {
    if (name == key || is_stderr_column(name)) continue;
    if (b.has_column(name)) shared.push_back(name);
  }
  if (shared.empty())
    throw std::invalid_argument("compare: no shared value columns");

  const std::vector<double> ka = a.column(key);
  const std::vector<double> kb = b.column(key);
  if (ka.empty() || kb.empty())
    throw std::invalid_argument("compare: empty table");

  ComparisonReport rep;
  rep.tolerance = tolerance;
  rep.stat_allowance = stat_allowance;
  rep.interpolated = interpolate;

  // Row matching: either identical key grids, or resample b onto the part of
  // a's grid covered by b.
  std::vector<std::size_t> arow;       // rows of a that take part
  const auto b_value = [&](const std::string& name,
                           double x, std::size_t jb) {
    const std::vector<double> col = b.column(name);
    return interpolate ? lerp_at(kb, col, x) : col[jb];
  };
  std::vector<std::size_t> brow;       // aligned rows of b (exact mode)
  if (!interpolate) {
    if (ka.size() != kb.size())
      throw std::invalid_argument(
          "compare: key grids differ (enable interpolation to resample)");
    for (std::size_t i = 0; i < ka.size(); ++i) {
      const double scale =
          std::max({1.0, std::abs(ka[i]), std::abs(kb[i])});
      if (std::abs(ka[i] - kb[i]) > 1e-9 * scale)
        throw std::invalid_argument(
            "compare: key grids differ (enable interpolation to resample)");
      arow.push_back(i);
      brow.push_back(i);
    }
  } else {
    for (std::size_t i = 1; i < kb.size(); ++i)
      if (!(kb[i] > kb[i - 1]))
        throw std::invalid_argument(
            "compare: interpolation requires a strictly increasing key grid");
    for (std::size_t i = 0; i < ka.size(); ++i)
      if (ka[i] >= kb.front() && ka[i] <= kb.back()) {
        arow.push_back(i);
        brow.push_back(0);  // unused in interpolation mode
      }
    if (arow.empty())
      throw std::invalid_argument("compare: key ranges do not overlap");
  }
  rep.rows = arow.size();

  bool all_pass = true;
  for (const std::string& name : shared) {
    const std::vector<double> ca = a.column(name);
    const std::string sename = name + "_stderr";
    const bool has_sa = a.has_column(sename);
    const bool has_sb = b.has_column(sename);
    const std::vector<double> sa =
        has_sa ? a.column(sename) : std::vector<double>();

    ColumnComparison cc;
    cc.name = name;
    double sumd = 0.0;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < arow.size(); ++r) {
      const std::size_t ia = arow[r];
      const double x = ka[ia];
      const double va = ca[ia];
      const double vb = b_value(name, x, brow[r]);
      const double d = std::abs(va - vb);
      double allowed = tolerance;
      if (stat_allowance) {
        double se = 0.0;
        if (has_sa) se += sa[ia];
        if (has_sb) se += b_value(sename, x, brow[r]);
        allowed += 3.0 * se;
      }
      sumd += d;
      cc.max_abs_diff = std::max(cc.max_abs_diff, d);
      const double excess = d - allowed;
      if (excess > worst_excess) {
        worst_excess = excess;
        cc.worst_row = ia;
        cc.worst_allowed = allowed;
      }
    }
    cc.mean_abs_diff = sumd / static_cast<double>(arow.size());
    cc.pass = worst_excess <= 0.0;
    all_pass = all_pass && cc.pass;
    rep.columns.push_back(cc);
  }
  rep.pass = all_pass;
  return rep;
}

std::string ComparisonReport::summary() const {
  std::ostringstream os;
  os.setf(std::ios::scientific);
  os.precision(3);
  os << "compare " << label_a << " vs " << label_b << " (" << rows
     << " rows, tolerance " << tolerance
     << (stat_allowance ? ", statistical allowance on" : "")
     << (interpolated ? ", resampled" : "") << ")\n";
  for (const ColumnComparison& c : columns)
    os << "  " << (c.pass ? "PASS" : "FAIL") << "  " << c.name
       << "  max |diff| " << c.max_abs_diff << "  mean " << c.mean_abs_diff
       << "  allowed " << c.worst_allowed << " at row " << c.worst_row
       << "\n";
  os << (pass ? "PASS" : "FAIL") << " overall\n";
  return os.str();
}

std::string ComparisonReport::to_json() const {
  nlohmann::json j;
  j["label_a"] = label_a;
  j["label_b"] = label_b;
  j["tolerance"] = tolerance;
  j["stat_allowance"] = stat_allowance;
  j["interpolated"] = interpolated;
  j["rows"] = rows;
  j["pass"] = pass;
  j["columns"] = nlohmann::json::array();
  for (const ColumnComparison& c : columns) {
    nlohmann::json jc;
    jc["name"] = c.name;
    jc["max_abs_diff"] = c.max_abs_diff;
    jc["mean_abs_diff"] = c.mean_abs_diff;
    jc["worst_allowed"] = c.worst_allowed;
    jc["worst_row"] = c.worst_row;
    jc["pass"] = c.pass;
    j["columns"].push_back(jc);
  }
  return j.dump(2);
}

}  // namespace rmx
