#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace webtrail {

// Every tunable of the pipeline. Resolution order, lowest to highest:
// defaults, environment variables, config file, command-line flags.
struct Settings {
  // [environment]
  std::string backend = "sim";  // sim | live
  std::string webdriver_url = "http://127.0.0.1:4444";
  std::string seed_url;
  int dynamic_items = 3;
  std::size_t budget = 1000;
  int dynamic_cap = 2;
  int menu_depth = 4;
  std::uint64_t seed = 0;

  // [oracle]
  std::string oracle = "scripted";  // scripted | remote
  std::string oracle_url;
  std::string oracle_model;
  std::string oracle_key;
  int oracle_max_in_flight = 4;

  // [refiner]
  int max_steps = 30;
  std::string hints = "on";  // on | off
  int parallel = 2;
  std::string agent = "optimal";  // optimal | never-finish | remote
  std::string agent_url;
  std::string agent_model;
  std::string agent_key;

  // [export]
  std::string site_name;             // manifest label; defaults to the site stem
  std::string embedder = "hashing";  // hashing | remote
  std::string embedder_url;
  std::string embedder_model;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Reads the real process environment.
EnvLookup process_env();

// WEBTRAIL_* variables; see README for the list. Malformed numbers raise
// invalid_argument.
void apply_env(Settings& settings, const EnvLookup& env);

// Sections {environment, oracle, refiner, export}; unknown keys raise
// invalid_argument.
void apply_config(Settings& settings, const nlohmann::json& config);

// Parses and applies a config file; a missing file raises invalid_argument.
void apply_config_file(Settings& settings, const std::string& path);

// Range checks shared by every entry point.
void validate_settings(const Settings& settings);

}  // namespace webtrail
