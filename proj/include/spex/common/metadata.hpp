#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

namespace spex {

inline constexpr std::string_view kToolVersion = "0.3.0";

// 64-bit FNV-1a; stable across platforms, used to fingerprint configs.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

struct RunMetadata {
  std::string tool_version{kToolVersion};
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string config;  // canonical JSON dump of the effective configuration

  static RunMetadata from_config(std::string command, const nlohmann::json& config, std::uint64_t seed);
  nlohmann::json to_json() const;
};

}  // namespace spex
