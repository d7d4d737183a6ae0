#pragma once

#include <functional>
#include <string_view>

namespace varkde {

enum class LogLevel { Debug, Info, Warning, Error };

using LogSink = std::function<void(LogLevel, std::string_view)>;

/// Replaces the process-wide sink. Passing an empty function silences logging.
void set_log_sink(LogSink sink);

void log(LogLevel level, std::string_view message);

}  // namespace varkde
