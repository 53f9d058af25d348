// Command-line entry point for parameter sweeps.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "psim/config.hpp"
#include "psim/simd/minhash.hpp"
#include "psim/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

std::string env_help() {
  std::string s = "Environment: every key can be set as ";
  s += psim::kEnvPrefix;
  s += "<KEY> (upper case, lists comma separated), e.g. PSIM_F=0.1,0.2.\n";
  s += "Precedence: defaults < --preset < --config file < environment < flags.\n";
  s += "PSIM_SIMD=scalar|avx2|avx512|neon forces a sampler kernel.\n";
  s += "Exit codes: 0 success, 1 runtime failure, 2 configuration error.";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine-resilient peer sampling simulator with trusted nodes"};
  app.footer(env_help());

  std::string config_path;
  std::string preset;
  std::size_t workers = 1;
  bool force = false;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--preset", preset, "parameter preset: full-sweep or desk");
  app.add_option("--workers", workers, "parallel runs")->check(CLI::PositiveNumber);
  app.add_flag("--force", force, "rerun jobs whose output already exists");

  std::map<std::string, std::vector<std::string>> flag_values;
  for (const auto& key : psim::config_keys()) {
    auto* opt = app.add_option("--" + key.name, flag_values[key.name], key.help);
    if (key.list) opt->delimiter(',');
    else opt->expected(1);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  psim::ExperimentConfig config;
  try {
    psim::Settings settings;
    if (!preset.empty()) psim::overlay(settings, psim::preset_settings(preset));
    if (!config_path.empty()) psim::overlay(settings, psim::read_settings_file(config_path));
    psim::overlay(settings, psim::settings_from_env([](const char* name) { return std::getenv(name); }));
    psim::Settings flags;
    for (auto& [key, values] : flag_values) {
      if (!values.empty()) flags[key] = values;
    }
    psim::overlay(settings, flags);
    config = psim::resolve_config(settings);
  } catch (const psim::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::cerr << "sampler kernel: " << psim::simd::isa_name(psim::simd::active_isa()) << '\n';
  try {
    const auto outcome = psim::run_sweep(config, psim::SweepOptions{workers, force}, std::cout);
    std::cerr << "runs: " << outcome.ran << " ran, " << outcome.skipped << " skipped, " << outcome.failed
              << " failed; summary in " << (config.out / "summary.csv").string() << '\n';
    return outcome.failed == 0 ? kExitOk : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
