#include "webtrail/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "webtrail/error.hpp"

namespace webtrail {
namespace {

using nlohmann::json;

template <typename T>
T parse_number(const std::string& name, const std::string& text) {
  try {
    std::size_t used = 0;
    long long value = std::stoll(text, &used);
    if (used != text.size() || value < 0) throw std::invalid_argument(text);
    return static_cast<T>(value);
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_argument, name + " must be a non-negative integer, got '" + text + "'");
  }
}

struct Binding {
  std::string section;
  std::string key;
  std::string env;
  std::function<void(Settings&, const std::string&)> from_text;
  std::function<void(Settings&, const json&)> from_json;
};

template <typename T>
Binding number(std::string section, std::string key, std::string env, T Settings::*field) {
  const std::string name = key;
  return {std::move(section), std::move(key), std::move(env),
          [field, name](Settings& s, const std::string& v) { s.*field = parse_number<T>(name, v); },
          [field, name](Settings& s, const json& v) {
            if (!v.is_number_integer() || v.get<long long>() < 0)
              throw Error(ErrorCode::invalid_argument, name + " must be a non-negative integer");
            s.*field = v.get<T>();
          }};
}

Binding text(std::string section, std::string key, std::string env, std::string Settings::*field) {
  const std::string name = key;
  return {std::move(section), std::move(key), std::move(env), [field](Settings& s, const std::string& v) { s.*field = v; },
          [field, name](Settings& s, const json& v) {
            if (!v.is_string()) throw Error(ErrorCode::invalid_argument, name + " must be a string");
            s.*field = v.get<std::string>();
          }};
}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> all{
      text("environment", "backend", "WEBTRAIL_BACKEND", &Settings::backend),
      text("environment", "webdriver_url", "WEBTRAIL_WEBDRIVER_URL", &Settings::webdriver_url),
      text("environment", "seed_url", "WEBTRAIL_SEED_URL", &Settings::seed_url),
      number("environment", "dynamic_items", "WEBTRAIL_DYNAMIC_ITEMS", &Settings::dynamic_items),
      number("environment", "budget", "WEBTRAIL_BUDGET", &Settings::budget),
      number("environment", "dynamic_cap", "WEBTRAIL_DYNAMIC_CAP", &Settings::dynamic_cap),
      number("environment", "menu_depth", "WEBTRAIL_MENU_DEPTH", &Settings::menu_depth),
      number("environment", "seed", "WEBTRAIL_SEED", &Settings::seed),
      text("oracle", "kind", "WEBTRAIL_ORACLE", &Settings::oracle),
      text("oracle", "endpoint", "WEBTRAIL_ORACLE_URL", &Settings::oracle_url),
      text("oracle", "model", "WEBTRAIL_ORACLE_MODEL", &Settings::oracle_model),
      text("oracle", "api_key", "WEBTRAIL_ORACLE_KEY", &Settings::oracle_key),
      number("oracle", "max_in_flight", "WEBTRAIL_ORACLE_MAX_IN_FLIGHT", &Settings::oracle_max_in_flight),
      number("refiner", "max_steps", "WEBTRAIL_MAX_STEPS", &Settings::max_steps),
      text("refiner", "hints", "WEBTRAIL_HINTS", &Settings::hints),
      number("refiner", "parallel", "WEBTRAIL_PARALLEL", &Settings::parallel),
      text("refiner", "agent", "WEBTRAIL_AGENT", &Settings::agent),
      text("refiner", "endpoint", "WEBTRAIL_AGENT_URL", &Settings::agent_url),
      text("refiner", "model", "WEBTRAIL_AGENT_MODEL", &Settings::agent_model),
      text("refiner", "api_key", "WEBTRAIL_AGENT_KEY", &Settings::agent_key),
      text("export", "site_name", "WEBTRAIL_SITE_NAME", &Settings::site_name),
      text("export", "embedder", "WEBTRAIL_EMBEDDER", &Settings::embedder),
      text("export", "embedder_endpoint", "WEBTRAIL_EMBEDDER_URL", &Settings::embedder_url),
      text("export", "embedder_model", "WEBTRAIL_EMBEDDER_MODEL", &Settings::embedder_model),
  };
  return all;
}

}  // namespace

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* value = std::getenv(name.c_str());
    if (!value) return std::nullopt;
    return std::string(value);
  };
}

void apply_env(Settings& settings, const EnvLookup& env) {
  for (const auto& b : bindings()) {
    if (auto value = env(b.env)) b.from_text(settings, *value);
  }
}

void apply_config(Settings& settings, const json& config) {
  if (!config.is_object()) throw Error(ErrorCode::invalid_argument, "config must be an object");
  for (const auto& [section, values] : config.items()) {
    if (!values.is_object()) throw Error(ErrorCode::invalid_argument, "config section '" + section + "' must be an object");
    for (const auto& [key, value] : values.items()) {
      const Binding* match = nullptr;
      for (const auto& b : bindings()) {
        if (b.section == section && b.key == key) match = &b;
      }
      if (!match) throw Error(ErrorCode::invalid_argument, "unknown config key '" + section + "." + key + "'");
      match->from_json(settings, value);
    }
  }
}

void apply_config_file(Settings& settings, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_argument, "cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  json config;
  try {
    config = json::parse(buffer.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, "config file " + path + ": " + e.what());
  }
  apply_config(settings, config);
}

void validate_settings(const Settings& s) {
  auto require = [](bool ok, const std::string& message) {
    if (!ok) throw Error(ErrorCode::invalid_argument, message);
  };
  require(s.backend == "sim" || s.backend == "live", "backend must be sim or live");
  require(s.oracle == "scripted" || s.oracle == "remote", "oracle must be scripted or remote");
  require(s.hints == "on" || s.hints == "off", "hints must be on or off");
  require(s.agent == "optimal" || s.agent == "never-finish" || s.agent == "remote",
          "agent must be optimal, never-finish or remote");
  require(s.embedder == "hashing" || s.embedder == "remote", "embedder must be hashing or remote");
  require(s.budget >= 1, "budget must be >= 1");
  require(s.menu_depth >= 1, "menu depth must be >= 1");
  require(s.max_steps >= 1, "max steps must be >= 1");
  require(s.parallel >= 1, "parallel must be >= 1");
  require(s.oracle_max_in_flight >= 1, "max in-flight oracle requests must be >= 1");
}

}  // namespace webtrail
