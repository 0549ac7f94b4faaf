#pragma once

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string_view>

namespace spex::log {

enum class Level { quiet = 0, warn = 1, info = 2, debug = 3 };

// Verbosity comes from SPEX_VERBOSITY (0..3); default is warnings only.
inline Level& level() {
  static Level lvl = [] {
    const char* env = std::getenv("SPEX_VERBOSITY");
    if (env == nullptr) return Level::warn;
    const int v = std::atoi(env);
    if (v <= 0) return Level::quiet;
    if (v >= 3) return Level::debug;
    return static_cast<Level>(v);
  }();
  return lvl;
}

template <typename... Args>
void write(Level at, std::string_view tag, const Args&... args) {
  if (static_cast<int>(level()) < static_cast<int>(at)) return;
  std::ostringstream os;
  os << "[spex " << tag << "] ";
  (os << ... << args);
  os << '\n';
  std::cerr << os.str();
}

template <typename... Args>
void warn(const Args&... args) { write(Level::warn, "warn", args...); }
template <typename... Args>
void info(const Args&... args) { write(Level::info, "info", args...); }
template <typename... Args>
void debug(const Args&... args) { write(Level::debug, "debug", args...); }

}  // namespace spex::log
