#pragma once

// JSON and CSV serialization of bounds, campaign and verification results.

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rwtree/bounds.hpp"
#include "rwtree/config.hpp"
#include "rwtree/mc.hpp"

namespace rwtree {

std::string_view tool_version() noexcept;

// Non-finite values become null.
nlohmann::json json_number(double x);
nlohmann::json to_json(const BoundValue& b);
nlohmann::json to_json(const OffspringDist& d);
nlohmann::json to_json(const BranchingSummary& s);
nlohmann::json to_json(const BoundsReport& r);
nlohmann::json to_json(const ReplicaStats& r);
nlohmann::json to_json(const VerificationReport& r);

// {tool, version, command, config_hash, seed, config}.
nlohmann::json provenance(std::string_view command, const RunConfig& cfg);

// RFC 4180 field quoting.
std::string csv_field(std::string_view s);
// Flattened key,value rows of a JSON document.
std::string to_csv_kv(const nlohmann::json& j);
std::string replicas_csv(const std::vector<ReplicaStats>& stats);
std::string blocks_csv(const std::vector<ReplicaStats>& stats);

// Writes via a temporary file in the same directory, then renames.
void write_atomically(const std::string& path, const std::string& content);

}  // namespace rwtree
