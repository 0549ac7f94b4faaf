#pragma once

#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spex/common/metadata.hpp"

namespace spex::cli {

// Declared configuration key of a subcommand. Flags use the key with
// underscores replaced by hyphens.
struct Key {
  enum class Kind { string, number, integer, boolean, list };
  std::string name;
  Kind kind = Kind::string;
  std::string help;
  nlohmann::json fallback;  // null: no default
  bool required = false;
};

// Writes every output file of a run with the run's metadata header.
class Output {
 public:
  Output(std::string dir, RunMetadata meta);

  const RunMetadata& metadata() const { return meta_; }
  std::string path(const std::string& name) const;
  std::vector<std::string> header_lines() const;

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) const;
  void json(const std::string& name, const std::string& key, const nlohmann::json& body) const;
  // Opens a file for a writer that emits its own header (comments first).
  std::ofstream open(const std::string& name) const;
  std::vector<std::string> written() const { return written_; }

 private:
  std::string dir_;
  RunMetadata meta_;
  mutable std::vector<std::string> written_;
};

struct Command {
  std::string name;
  std::string description;
  std::vector<Key> keys;
  std::function<void(const nlohmann::json& config, Output& out)> run;
};

// Effective configuration: defaults, then the config file (top-level keys
// this command declares and its own section), then flags.
nlohmann::json merge_config(const Command& cmd, const nlohmann::json& file, const nlohmann::json& flags);

// Throws ConfigError on missing or mistyped keys.
void validate_config(const Command& cmd, const nlohmann::json& config);

// Reads a JSON document, or the value stored under `key` when the document
// is a tool output wrapping it.
nlohmann::json read_json(const std::string& path, const std::string& key = {});

std::string fmt(double v);
std::string fmt(long long v);
inline std::string fmt(int v) { return fmt(static_cast<long long>(v)); }
inline std::string fmt(std::size_t v) { return fmt(static_cast<long long>(v)); }

}  // namespace spex::cli
