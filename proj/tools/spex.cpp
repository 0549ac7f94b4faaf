#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "spex/common/error.hpp"
#include "spex/common/parallel.hpp"

namespace {

using nlohmann::json;
using spex::cli::Key;

std::string hyphenated(std::string s) {
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return s;
}

json parse_flag(const Key& k, const std::string& text) {
  if (k.kind == Key::Kind::string) return text;
  if (k.kind == Key::Kind::boolean) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw spex::ConfigError("--" + hyphenated(k.name) + " expects true or false");
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    throw spex::ConfigError("--" + hyphenated(k.name) + ": cannot parse '" + text + "'");
  }
}

int report(const std::string& command, const std::string& kind, const std::string& message, int code,
           const std::string& out_dir) {
  const json err{{"status", "error"}, {"command", command}, {"kind", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << err.dump() << '\n';
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream f(std::filesystem::path(out_dir) / "error.json", std::ios::binary);
    if (f) f << err.dump(2) << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  const auto cmds = spex::cli::commands();
  CLI::App app{"spex: spatial extremes of hourly precipitation (GEV additive margins, max-id dependence)"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir = ".";
  std::size_t workers = 1;
  app.add_option("--config", config_path, "JSON config; top-level keys and a section named after the subcommand");
  app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
  app.add_option("--workers", workers, "worker threads; results do not depend on it")->capture_default_str()->check(CLI::PositiveNumber);

  std::vector<std::unique_ptr<std::map<std::string, std::string>>> values;
  std::vector<std::map<std::string, CLI::Option*>> options;
  std::vector<CLI::App*> subs;
  for (const auto& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.description);
    values.push_back(std::make_unique<std::map<std::string, std::string>>());
    options.emplace_back();
    for (const auto& k : c.keys) {
      std::string help = k.help;
      if (!k.fallback.is_null()) help += " [default: " + (k.fallback.is_string() ? k.fallback.get<std::string>() : k.fallback.dump()) + "]";
      if (k.required) help += " (required)";
      options.back()[k.name] = sub->add_option("--" + hyphenated(k.name), (*values.back())[k.name], help);
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << app.help() << '\n';
    return report("", "usage", e.what(), 2, "");
  }

  std::size_t which = 0;
  while (which < subs.size() && !subs[which]->parsed()) ++which;
  const auto& cmd = cmds[which];
  spex::worker_count() = workers;
  try {
    json file;
    if (!config_path.empty()) file = spex::cli::read_json(config_path);
    json flags = json::object();
    for (const auto& k : cmd.keys) {
      if (options[which].at(k.name)->count() > 0) flags[k.name] = parse_flag(k, values[which]->at(k.name));
    }
    const json cfg = spex::cli::merge_config(cmd, file, flags);
    spex::cli::validate_config(cmd, cfg);
    const std::uint64_t seed = cfg.contains("seed") ? cfg.at("seed").get<std::uint64_t>() : 0;
    spex::cli::Output out(out_dir, spex::RunMetadata::from_config(cmd.name, cfg, seed));
    cmd.run(cfg, out);
    for (const auto& name : out.written()) std::cout << out.path(name) << '\n';
    return 0;
  } catch (const spex::ConfigError& e) {
    return report(cmd.name, "config", e.what(), 2, out_dir);
  } catch (const json::exception& e) {
    return report(cmd.name, "config", e.what(), 2, out_dir);
  } catch (const spex::DataError& e) {
    return report(cmd.name, "data", e.what(), 1, out_dir);
  } catch (const spex::NumericError& e) {
    return report(cmd.name, "numeric", e.what(), 1, out_dir);
  } catch (const spex::DomainError& e) {
    return report(cmd.name, "domain", e.what(), 1, out_dir);
  } catch (const std::exception& e) {
    return report(cmd.name, "failure", e.what(), 1, out_dir);
  }
}
