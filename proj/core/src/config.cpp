// config.cpp: dotted-key parsing and experiment validation.
// SPDX-License-Identifier: Apache-2.0
#include "rmx/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rmx/io.hpp"

namespace rmx {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double x = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size())
    throw ConfigError(key + ": not a number: '" + value + "'");
  return x;
}

long to_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long x = std::strtol(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size())
    throw ConfigError(key + ": not an integer: '" + value + "'");
  return x;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap m;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    m[key] = value;
  }
  return m;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string require_string(const ConfigMap& m, const std::string& key) {
  const auto it = m.find(key);
  if (it == m.end()) throw ConfigError(key + ": required key is missing");
  return it->second;
}

double require_double(const ConfigMap& m, const std::string& key) {
  return to_double(key, require_string(m, key));
}

long require_int(const ConfigMap& m, const std::string& key) {
  return to_int(key, require_string(m, key));
}

std::string get_string(const ConfigMap& m, const std::string& key,
                       const std::string& fallback) {
  const auto it = m.find(key);
  return it == m.end() ? fallback : it->second;
}

double get_double(const ConfigMap& m, const std::string& key,
                  double fallback) {
  const auto it = m.find(key);
  return it == m.end() ? fallback : to_double(key, it->second);
}

long get_int(const ConfigMap& m, const std::string& key, long fallback) {
  const auto it = m.find(key);
  return it == m.end() ? fallback : to_int(key, it->second);
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    field = trim(field);
    if (field.empty()) continue;
    out.push_back(to_double(key, field));
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

DensityOfStates dos_from_config(const ConfigMap& m,
                                const std::string& prefix) {
  const std::string kind = require_string(m, prefix + ".kind");
  try {
    if (kind == "gaussian_convolution") {
      return DensityOfStates::gaussian_convolution(
          static_cast<int>(get_int(m, prefix + ".count", 1)),
          get_double(m, prefix + ".scale", 1.0),
          get_double(m, prefix + ".offset", 0.0));
    }
    if (kind == "lattice") {
      return DensityOfStates::lattice(require_double(m, prefix + ".spacing"));
    }
    if (kind == "scaled_flat") {
      const std::string prof = get_string(m, prefix + ".profile", "gaussian");
      FlatProfile p;
      if (prof == "gaussian")
        p = FlatProfile::Gaussian;
      else if (prof == "semicircle")
        p = FlatProfile::Semicircle;
      else
        throw ConfigError(prefix + ".profile: unknown profile '" + prof + "'");
      return DensityOfStates::scaled_flat(p,
                                          require_double(m, prefix + ".scale"));
    }
    if (kind == "tabulated") {
      const auto file = m.find(prefix + ".file");
      std::vector<double> grid, values;
      if (file != m.end()) {
        read_two_column_csv(file->second, &grid, &values);
      } else {
        grid = parse_double_list(require_string(m, prefix + ".grid"),
                                 prefix + ".grid");
        values = parse_double_list(require_string(m, prefix + ".values"),
                                   prefix + ".values");
      }
      return DensityOfStates::tabulated(std::move(grid), std::move(values));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(prefix + ": " + e.what());
  }
  throw ConfigError(prefix + ".kind: unknown kind '" + kind + "'");
}

ExperimentConfig ExperimentConfig::build(const ConfigMap& m) {
  ExperimentConfig c;
  c.raw = m;
  c.dos = dos_from_config(m, "model.dos");
  c.s = get_double(m, "model.s", 0.0);
  c.v = get_double(m, "model.v", 0.0);
  c.energy = get_double(m, "model.energy", 0.0);
  if (m.count("model.beta")) c.beta = require_double(m, "model.beta");

  const std::string engine = require_string(m, "engine");
  if (engine == "mc")
    c.engine = EngineKind::Mc;
  else if (engine == "analytic")
    c.engine = EngineKind::Analytic;
  else if (engine == "vanhove")
    c.engine = EngineKind::Vanhove;
  else if (engine == "band")
    c.engine = EngineKind::Band;
  else
    throw ConfigError("engine: unknown engine '" + engine + "'");

  if (c.engine == EngineKind::Mc) {
    c.mc_n = require_int(m, "engine.mc.n");
    c.mc_realizations = require_int(m, "engine.mc.realizations");
    if (c.mc_n < 1) throw ConfigError("engine.mc.n: must be >= 1");
    if (c.mc_realizations < 1)
      throw ConfigError("engine.mc.realizations: must be >= 1");
    c.mc_seed = static_cast<unsigned long long>(
        get_int(m, "engine.mc.seed", 1));
    const std::string res =
        get_string(m, "engine.mc.reservoir", "pure_level");
    if (res == "pure_level")
      c.mc_reservoir = ReservoirInit::PureLevel;
    else if (res == "canonical")
      c.mc_reservoir = ReservoirInit::Canonical;
    else
      throw ConfigError("engine.mc.reservoir: unknown value '" + res + "'");
    if (c.mc_reservoir == ReservoirInit::Canonical && !c.beta)
      throw ConfigError("model.beta: required for canonical reservoir");
  }
  if (c.engine == EngineKind::Band) {
    c.band_w0 = get_double(m, "model.band.w0", 1.0);
    c.band_b = get_double(m, "model.band.b", 1.0);
    if (!(c.band_w0 > 0.0)) throw ConfigError("model.band.w0: must be > 0");
    if (!(c.band_b > 0.0)) throw ConfigError("model.band.b: must be > 0");
    if (!c.beta) throw ConfigError("model.beta: required for band engine");
  }

  if (m.count("grid.values")) {
    c.grid = parse_double_list(require_string(m, "grid.values"),
                               "grid.values");
  } else {
    const double start = get_double(m, "grid.start", 0.0);
    const double stop = require_double(m, "grid.stop");
    const long count = require_int(m, "grid.count");
    if (count < 1) throw ConfigError("grid.count: must be >= 1");
    if (!(stop >= start)) throw ConfigError("grid.stop: must be >= grid.start");
    for (long i = 0; i < count; ++i)
      c.grid.push_back(count == 1 ? start
                                  : start + (stop - start) * double(i) /
                                        double(count - 1));
  }
  for (std::size_t i = 0; i + 1 < c.grid.size(); ++i)
    if (!(c.grid[i] < c.grid[i + 1]))
      throw ConfigError("grid: values must be strictly increasing");
  if (!c.grid.empty() && c.grid.front() < 0.0)
    throw ConfigError("grid: times must be >= 0");

  c.rho0.pp = get_double(m, "rho0.pp", 1.0);
  c.rho0.mm = get_double(m, "rho0.mm", 0.0);
  c.rho0.pm = Complex(get_double(m, "rho0.pm_re", 0.0),
                      get_double(m, "rho0.pm_im", 0.0));
  try {
    c.rho0.validate(1e-9);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("rho0: ") + e.what());
  }

  c.out_dir = get_string(m, "out.dir", ".");
  return c;
}

}  // namespace rmx
