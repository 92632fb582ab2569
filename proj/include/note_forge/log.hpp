#pragma once

#include <string_view>

namespace note_forge::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Defaults to warn, or the NOTE_FORGE_LOG environment variable (error|warn|info|debug).
Level level();
void set_level(Level level);

// Thread-safe single-line write to stderr.
void write(Level level, std::string_view message);

inline void error(std::string_view m) { write(Level::error, m); }
inline void warn(std::string_view m) { write(Level::warn, m); }
inline void info(std::string_view m) { write(Level::info, m); }
inline void debug(std::string_view m) { write(Level::debug, m); }

}  // namespace note_forge::log
