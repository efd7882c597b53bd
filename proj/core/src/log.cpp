#include "confmask/log.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <string>

namespace confmask::log {

namespace {

Level parse_level(const char* text) {
  if (text == nullptr) return Level::warn;
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "off" || s == "quiet" || s == "none" || s == "0") return Level::off;
  if (s == "error") return Level::error;
  if (s == "warn" || s == "warning") return Level::warn;
  if (s == "info") return Level::info;
  if (s == "debug" || s == "trace") return Level::debug;
  return Level::warn;
}

const char* level_name(Level lvl) {
  switch (lvl) {
    case Level::error: return "error";
    case Level::warn: return "warn";
    case Level::info: return "info";
    case Level::debug: return "debug";
    default: return "?";
  }
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Level level() {
  static Level cached = parse_level(std::getenv("CONFMASK_LOG"));
  return cached;
}

void write(Level lvl, std::string_view msg) {
  if (static_cast<int>(lvl) > static_cast<int>(level())) return;
  std::lock_guard<std::mutex> lock(sink_mutex());
  std::fprintf(stderr, "confmask[%s]: %.*s\n", level_name(lvl),
               static_cast<int>(msg.size()), msg.data());
}

}  // namespace confmask::log
