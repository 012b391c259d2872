#pragma once

#include <string_view>

namespace kswarm::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Initialized from the KS_LOG environment variable (error|warn|info|debug).
Level level();
void set_level(Level l);

void write(Level l, std::string_view msg);

inline void warn(std::string_view msg) { write(Level::warn, msg); }
inline void info(std::string_view msg) { write(Level::info, msg); }
inline void debug(std::string_view msg) { write(Level::debug, msg); }

}  // namespace kswarm::log
