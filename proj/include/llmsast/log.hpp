#pragma once

#include <functional>
#include <string_view>

namespace llmsast::log {

enum class Level { debug, info, warn, error };

using Sink = std::function<void(Level, std::string_view)>;

/// Replace the process-wide sink; returns the previous one. The default sink
/// writes warnings and errors to stderr.
Sink set_sink(Sink sink);

void write(Level level, std::string_view message);

inline void info(std::string_view m) { write(Level::info, m); }
inline void warn(std::string_view m) { write(Level::warn, m); }
inline void error(std::string_view m) { write(Level::error, m); }

} // namespace llmsast::log
