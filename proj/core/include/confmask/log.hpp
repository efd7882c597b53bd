#pragma once

#include <string_view>

namespace confmask::log {

enum class Level { off = 0, error = 1, warn = 2, info = 3, debug = 4 };

/// Active verbosity, parsed once from the CONFMASK_LOG environment variable
/// ("off", "error", "warn", "info", "debug"; default "warn").
Level level();

void write(Level lvl, std::string_view msg);

inline void error(std::string_view msg) { write(Level::error, msg); }
inline void warn(std::string_view msg) { write(Level::warn, msg); }
inline void info(std::string_view msg) { write(Level::info, msg); }
inline void debug(std::string_view msg) { write(Level::debug, msg); }

}  // namespace confmask::log
