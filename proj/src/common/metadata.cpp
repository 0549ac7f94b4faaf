#include "spex/common/metadata.hpp"

#include <cstdio>

namespace spex {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

RunMetadata RunMetadata::from_config(std::string command, const nlohmann::json& config, std::uint64_t seed) {
  RunMetadata m;
  m.command = std::move(command);
  m.config = config.dump();
  m.config_hash = hex64(fnv1a(m.config));
  m.seed = seed;
  return m;
}

nlohmann::json RunMetadata::to_json() const {
  return {{"tool_version", tool_version},
          {"command", command},
          {"config_hash", config_hash},
          {"seed", seed},
          {"config", nlohmann::json::parse(config.empty() ? "{}" : config)}};
}

}  // namespace spex
