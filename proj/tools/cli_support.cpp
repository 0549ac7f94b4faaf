#include "cli_support.hpp"

#include <filesystem>
#include <fstream>

#include "spex/common/csv.hpp"
#include "spex/common/error.hpp"

namespace spex::cli {

Output::Output(std::string dir, RunMetadata meta) : dir_(std::move(dir)), meta_(std::move(meta)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir_ + ": " + ec.message());
}

std::string Output::path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }

std::vector<std::string> Output::header_lines() const {
  return {" spex " + meta_.tool_version, " command: " + meta_.command, " config_hash: " + meta_.config_hash,
          " seed: " + std::to_string(meta_.seed), " config: " + meta_.config};
}

void Output::csv(const std::string& name, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) const {
  std::ofstream f(path(name), std::ios::binary);
  if (!f) throw DataError("cannot write " + path(name));
  csv::Writer w(f);
  for (const auto& line : header_lines()) w.comment(line);
  w.row(header);
  for (const auto& r : rows) w.row(r);
  if (!f) throw DataError("write failed for " + path(name));
  written_.push_back(name);
}

void Output::json(const std::string& name, const std::string& key, const nlohmann::json& body) const {
  nlohmann::json doc;
  doc["metadata"] = meta_.to_json();
  doc[key] = body;
  std::ofstream f(path(name), std::ios::binary);
  if (!f) throw DataError("cannot write " + path(name));
  f << doc.dump(2) << '\n';
  if (!f) throw DataError("write failed for " + path(name));
  written_.push_back(name);
}

std::ofstream Output::open(const std::string& name) const {
  std::ofstream f(path(name), std::ios::binary);
  if (!f) throw DataError("cannot write " + path(name));
  written_.push_back(name);
  return f;
}

nlohmann::json merge_config(const Command& cmd, const nlohmann::json& file, const nlohmann::json& flags) {
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& k : cmd.keys) {
    if (!k.fallback.is_null()) cfg[k.name] = k.fallback;
  }
  auto declared = [&](const std::string& name) {
    for (const auto& k : cmd.keys) {
      if (k.name == name) return true;
    }
    return false;
  };
  if (!file.is_null()) {
    if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [name, value] : file.items()) {
      if (declared(name)) cfg[name] = value;
    }
    if (file.contains(cmd.name)) {
      const auto& section = file.at(cmd.name);
      if (!section.is_object()) throw ConfigError("config section '" + cmd.name + "' must be an object");
      for (const auto& [name, value] : section.items()) {
        if (!declared(name)) throw ConfigError("unknown key '" + name + "' in config section '" + cmd.name + "'");
        cfg[name] = value;
      }
    }
  }
  for (const auto& [name, value] : flags.items()) cfg[name] = value;
  return cfg;
}

void validate_config(const Command& cmd, const nlohmann::json& config) {
  for (const auto& k : cmd.keys) {
    if (!config.contains(k.name) || config.at(k.name).is_null()) {
      if (k.required) throw ConfigError(cmd.name + ": missing required setting '" + k.name + "'");
      continue;
    }
    const auto& v = config.at(k.name);
    bool ok = true;
    switch (k.kind) {
      case Key::Kind::string: ok = v.is_string(); break;
      case Key::Kind::number: ok = v.is_number(); break;
      case Key::Kind::integer: ok = v.is_number_integer(); break;
      case Key::Kind::boolean: ok = v.is_boolean(); break;
      case Key::Kind::list: ok = v.is_array(); break;
    }
    if (!ok) throw ConfigError(cmd.name + ": setting '" + k.name + "' has the wrong type (" + v.dump() + ")");
  }
}

nlohmann::json read_json(const std::string& path, const std::string& key) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
  if (!key.empty() && j.is_object() && j.contains("metadata") && j.contains(key)) return j.at(key);
  return j;
}

std::string fmt(double v) { return csv::format(v); }
std::string fmt(long long v) { return std::to_string(v); }

}  // namespace spex::cli
