#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

namespace fs = std::filesystem;

inline std::string fixture(const std::string& rel) { return std::string(SPEX_FIXTURES) + "/" + rel; }

// Fresh scratch directory under the system temp dir.
inline fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spex_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Runs the CLI with the given arguments; returns the exit status.
inline int run_cli(const std::string& args, const fs::path& log = {}) {
  std::string cmd = std::string(SPEX_CLI) + " " + args;
  cmd += log.empty() ? " > /dev/null 2>&1" : " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// Lines of a CSV without the '#' metadata header.
inline std::vector<std::string> data_lines(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(f, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

// Selected columns of a CSV (by header name), '#' lines skipped.
inline std::vector<std::string> columns(const fs::path& p, const std::vector<std::string>& names) {
  const auto lines = data_lines(p);
  std::vector<std::string> out;
  if (lines.empty()) return out;
  auto split = [](const std::string& l) {
    std::vector<std::string> f;
    std::stringstream ss(l);
    for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
    if (!l.empty() && l.back() == ',') f.push_back("");
    return f;
  };
  const auto header = split(lines[0]);
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == n) idx.push_back(i);
  }
  for (const auto& l : lines) {
    const auto f = split(l);
    std::string row;
    for (std::size_t k = 0; k < idx.size(); ++k) row += (k ? "," : "") + f.at(idx[k]);
    out.push_back(row);
  }
  return out;
}

}  // namespace testing
