#pragma once

// JSON run configuration: parsing with strict key checking, the canonical
// effective form and its hash.

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "rwtree/bounds.hpp"
#include "rwtree/mc.hpp"
#include "rwtree/model.hpp"

namespace rwtree {

enum class OutputFormat { json, csv };

struct RunConfig {
  EnvSpec env;
  BoundsParams bounds;
  CampaignConfig campaign;
  std::string out_path;  // empty: standard output
  OutputFormat format = OutputFormat::json;

  // psi, bounds and campaign invariants; throws ConfigError.
  void validate() const;
};

// Parses "a/b" or a decimal literal. Throws ConfigError naming `key`.
double parse_rational(std::string_view text, const std::string& key = {});

RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(std::string_view text);
RunConfig load_config(const std::string& path);

OutputFormat parse_format(std::string_view s);

// Canonical effective configuration: every parameter explicit, excluding
// the worker count and output settings, which never affect results.
nlohmann::json effective_config(const RunConfig& cfg);
nlohmann::json to_json(const EnvSpec& env);

// FNV-1a 64 of the canonical configuration, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace rwtree
