#pragma once

#include <ostream>
#include <string_view>

namespace netgen::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

void set_level(Level level);
Level level();

/// Additional sink receiving every message at or above Info, prefixed with
/// a wall-clock timestamp. Pass nullptr to detach.
void set_file(std::ostream* out);

void debug(std::string_view msg);
void info(std::string_view msg);
void warn(std::string_view msg);
void error(std::string_view msg);

}  // namespace netgen::log
