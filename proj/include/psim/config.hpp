#pragma once

// Experiment configuration: layered key=value settings (defaults, preset,
// file, environment, flags) resolved into a validated ExperimentConfig.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "psim/brahms.hpp"
#include "psim/engine.hpp"
#include "psim/trusted.hpp"

namespace psim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::size_t n = 10000;
  std::vector<double> f_values{0.10};
  std::vector<double> t_values{0.01};
  std::vector<EvictionPolicy> evictions{EvictionPolicy::adaptive()};
  BrahmsParams params{};
  std::size_t rounds = 200;
  std::size_t repetitions = 10;
  std::uint64_t seed = 1;
  double push_budget_factor = 1.0;
  double ident_threshold = 0.10;
  bool identification = false;
  bool injection = false;
  std::vector<double> injection_fractions;
  bool cache_handshakes = true;
  std::filesystem::path out = "results";

  /// Throws ConfigError.
  void validate() const;

  /// Configuration of one run; baselines pass t = 0 and injection = 0.
  RunConfig run_config(double f, double t, const EvictionPolicy& eviction, double injection,
                       std::uint64_t run_seed, bool with_identification) const;
};

struct ConfigKey {
  std::string name;
  std::string help;
  bool list = false;
};

/// Every accepted key, in documentation order.
const std::vector<ConfigKey>& config_keys();

inline constexpr std::string_view kEnvPrefix = "PSIM_";

/// key -> raw values; list keys may hold several.
using Settings = std::map<std::string, std::vector<std::string>>;

/// Parses "key = value" lines. '#' starts a comment. Repeating a list key
/// appends; repeating a scalar key or using an unknown key is an error.
Settings parse_settings(std::string_view text, const std::string& source = "config");
Settings read_settings_file(const std::filesystem::path& path);

/// Collects PSIM_<KEY> variables for known keys. List values are comma separated.
Settings settings_from_env(const std::function<const char*(const char*)>& getenv_fn);

/// Named presets: "full-sweep" and "desk".
Settings preset_settings(const std::string& name);

/// Keys present in `top` replace those in `base`.
void overlay(Settings& base, const Settings& top);

/// Resolves and validates. Throws ConfigError.
ExperimentConfig resolve_config(const Settings& settings);

}  // namespace psim
