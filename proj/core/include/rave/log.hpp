#pragma once
// Minimal synchronized stderr logger.

#include <string>

namespace rave::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3 };

// Messages below the threshold are dropped. Default: Info.
Level threshold();
void set_threshold(Level level);

void write(Level level, const std::string& message);

inline void debug(const std::string& m) { write(Level::Debug, m); }
inline void info(const std::string& m) { write(Level::Info, m); }
inline void warn(const std::string& m) { write(Level::Warn, m); }
inline void error(const std::string& m) { write(Level::Error, m); }

}  // namespace rave::log
