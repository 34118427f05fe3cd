// config.hpp: flat dotted-key experiment configuration.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmx/dos.hpp"
#include "rmx/state.hpp"

namespace rmx {

/// Configuration or validation failure; the message starts with the dotted
/// key path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

using ConfigMap = std::map<std::string, std::string>;

/// Parses `key = value` lines; '#' starts a comment, blank lines ignored,
/// later duplicates win.
ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

/// Typed lookups; `require_*` throw ConfigError naming the key.
std::string require_string(const ConfigMap& m, const std::string& key);
double require_double(const ConfigMap& m, const std::string& key);
long require_int(const ConfigMap& m, const std::string& key);
std::string get_string(const ConfigMap& m, const std::string& key,
                       const std::string& fallback);
double get_double(const ConfigMap& m, const std::string& key, double fallback);
long get_int(const ConfigMap& m, const std::string& key, long fallback);
std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& key);

/// Builds the level-density model from keys under `prefix` (e.g.
/// "model.dos"): kind = gaussian_convolution (count, scale, offset) |
/// lattice (spacing) | scaled_flat (profile, scale) | tabulated (file or
/// grid/values lists).
DensityOfStates dos_from_config(const ConfigMap& m, const std::string& prefix);

enum class EngineKind { Mc, Analytic, Vanhove, Band };
enum class ReservoirInit { PureLevel, Canonical };

/// One fully validated experiment: model, engine selection, grids, initial
/// state, output directory.
struct ExperimentConfig {
  DensityOfStates dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  double s = 0.0;
  double v = 0.0;
  double energy = 0.0;            // target reservoir energy E
  std::optional<double> beta;     // canonical inverse temperature
  EngineKind engine = EngineKind::Vanhove;

  long mc_n = 64;
  long mc_realizations = 2;
  unsigned long long mc_seed = 1;
  ReservoirInit mc_reservoir = ReservoirInit::PureLevel;

  double band_w0 = 1.0;  // band weight height: w(x) = w0 / (1 + (x/b)^2)
  double band_b = 1.0;   // band width

  std::vector<double> grid;  // times (mc, analytic) or taus (vanhove, band)
  ReducedState rho0 = ReducedState::diagonal(1.0, 0.0);
  std::string out_dir = ".";

  ConfigMap raw;  // echoed into manifests

  /// Validates and assembles from a parsed map; throws ConfigError with the
  /// failing field path.
  static ExperimentConfig build(const ConfigMap& m);
};

}  // namespace rmx
